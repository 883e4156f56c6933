#include "qclassical/fuzz.hpp"

#include <algorithm>
#include <cstdlib>
#include <random>
#include <thread>

#include "qclassical/checkers.hpp"
#include "qclassical/random.hpp"

namespace qclassical {

namespace {

constexpr std::size_t kSteps = 3;
constexpr std::size_t kReportedViolations = 8;

struct Outcome {
  bool premise = false;
  bool violated = false;
};

Rng instance_rng(std::uint64_t seed, FuzzClass kind, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(kind), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(static_cast<std::uint64_t>(index) >> 32)};
  return Rng(seq);
}

Observable random_observable(std::size_t dim, const ComplexMatrix& basis) {
  std::vector<double> values(dim);
  for (std::size_t i = 0; i < dim; ++i) values[i] = static_cast<double>(i);
  return Observable::from_basis(basis, values);
}

/// 0: block-triangular, 1: non-creating, 2: generic CPTP.
MarkovProcess random_markov(std::size_t dim, const ComplexMatrix& basis, int family, Rng& rng) {
  std::vector<Superoperator> maps;
  for (std::size_t k = 0; k < kSteps; ++k) {
    switch (family) {
      case 0: maps.push_back(random_block_triangular_map(dim, basis, rng)); break;
      case 1: maps.push_back(random_noncreating_map(dim, basis, rng)); break;
      default: maps.push_back(random_cptp(dim, rng)); break;
    }
  }
  return MarkovProcess(random_density_matrix(dim, rng), std::move(maps));
}

Outcome implication_outcome(const PipelineReport& report) {
  Outcome o;
  for (const Implication& i : report.implications) {
    o.premise = o.premise || i.premise;
    o.violated = o.violated || i.violated;
  }
  return o;
}

Outcome run_instance(FuzzClass kind, std::uint64_t seed, std::size_t index) {
  Rng rng = instance_rng(seed, kind, index);
  const std::size_t dim = (rng() % 4 == 0) ? 3 : 2;
  const ComplexMatrix basis = haar_unitary(dim, rng);
  const Observable obs = random_observable(dim, basis);
  PipelineOptions options;
  options.classical_implies_incoherent = false;
  options.markov_incoherent_implies_classical = false;
  options.markov_incoherent_implies_ncgd = false;
  options.markov_ncgd_implies_diagonal_incoherent = false;

  switch (kind) {
    case FuzzClass::ClassicalImpliesIncoherent: {
      options.classical_implies_incoherent = true;
      const std::size_t dim_s = 2;
      const ComplexMatrix b = haar_unitary(dim_s, rng);
      const Process p = (index % 2 == 0)
                            ? Process(random_controlled_permutation_process(dim_s, 2, kSteps, b, rng))
                            : Process(random_dilated_process(dim_s, 2, kSteps, rng));
      return implication_outcome(check_theorem_pipeline(
          p, random_observable(dim_s, b), SinglePreparation{IdentityIntervention{}}, options));
    }
    case FuzzClass::BlockTriangularClassical: {
      options.markov_incoherent_implies_classical = true;
      const Process p = random_markov(dim, basis, 0, rng);
      return implication_outcome(
          check_theorem_pipeline(p, obs, SinglePreparation{IdentityIntervention{}}, options));
    }
    case FuzzClass::IncoherentImpliesNcgd: {
      options.markov_incoherent_implies_ncgd = true;
      const Process p = random_markov(dim, basis, index % 2 == 0 ? 0 : 2, rng);
      return implication_outcome(
          check_theorem_pipeline(p, obs, SinglePreparation{IdentityIntervention{}}, options));
    }
    case FuzzClass::NcgdImpliesDiagonal: {
      options.markov_ncgd_implies_diagonal_incoherent = true;
      const Process p = random_markov(dim, basis, static_cast<int>(index % 3), rng);
      return implication_outcome(
          check_theorem_pipeline(p, obs, SinglePreparation{IdentityIntervention{}}, options));
    }
  }
  return {};
}

const char* class_name(FuzzClass kind) {
  switch (kind) {
    case FuzzClass::ClassicalImpliesIncoherent: return "a";
    case FuzzClass::BlockTriangularClassical: return "b";
    case FuzzClass::IncoherentImpliesNcgd: return "c";
    case FuzzClass::NcgdImpliesDiagonal: return "d";
  }
  return "?";
}

const char* class_theorem(FuzzClass kind) {
  switch (kind) {
    case FuzzClass::ClassicalImpliesIncoherent: return "classical => incoherent (non-degenerate)";
    case FuzzClass::BlockTriangularClassical:
      return "markov & invertible & incoherent(all) => classical(all)";
    case FuzzClass::IncoherentImpliesNcgd: return "markov & invertible & incoherent(all) => ncgd";
    case FuzzClass::NcgdImpliesDiagonal: return "markov & ncgd => incoherent(diagonal)";
  }
  return "";
}

}  // namespace

bool FuzzReport::violated() const {
  return std::any_of(classes.begin(), classes.end(),
                     [](const FuzzClassReport& c) { return c.violations > 0; });
}

std::size_t fuzz_thread_count() {
  if (const char* env = std::getenv("QCLASSICAL_THREADS")) {
    char* end = nullptr;
    const long value = std::strtol(env, &end, 10);
    if (end != env && value > 0) return static_cast<std::size_t>(value);
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

FuzzClassReport run_fuzz_class(FuzzClass kind, std::uint64_t seed, std::size_t count,
                               std::size_t threads) {
  if (threads == 0) threads = fuzz_thread_count();
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(count, 1));
  std::vector<Outcome> outcomes(count);
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < threads; ++w) {
    workers.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += threads) outcomes[i] = run_instance(kind, seed, i);
    });
  }
  for (std::thread& t : workers) t.join();

  FuzzClassReport report;
  report.kind = kind;
  report.name = class_name(kind);
  report.theorem = class_theorem(kind);
  report.instances = count;
  for (std::size_t i = 0; i < count; ++i) {
    if (outcomes[i].premise) ++report.premise_true;
    if (outcomes[i].violated) {
      ++report.violations;
      if (report.violating_instances.size() < kReportedViolations) {
        report.violating_instances.push_back(i);
      }
    }
  }
  return report;
}

FuzzReport run_fuzz(std::uint64_t seed, std::size_t count, std::size_t threads) {
  FuzzReport report;
  report.seed = seed;
  for (FuzzClass kind : {FuzzClass::ClassicalImpliesIncoherent, FuzzClass::BlockTriangularClassical,
                         FuzzClass::IncoherentImpliesNcgd, FuzzClass::NcgdImpliesDiagonal}) {
    report.classes.push_back(run_fuzz_class(kind, seed, count, threads));
  }
  return report;
}

}  // namespace qclassical
