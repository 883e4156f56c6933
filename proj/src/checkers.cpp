#include "qclassical/checkers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <utility>

#include "qclassical/errors.hpp"
#include "qclassical/random.hpp"

namespace qclassical {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

Eigen::Index idx(std::size_t n) { return static_cast<Eigen::Index>(n); }

ComplexMatrix scalar(double v) {
  ComplexMatrix m(1, 1);
  m(0, 0) = v;
  return m;
}

/// Records the first violation and the running maximum.
void observe(Verdict& v, double distance, const auto& make_witness) {
  v.max_violation = std::max(v.max_violation, distance);
  if (distance > v.tolerance && !v.witness) {
    v.holds = false;
    v.witness = make_witness();
  }
}

/// One concrete (process, preparation) instance of a preparation set.
struct Instance {
  Process process;
  Intervention preparation;
  std::string label;
};

/// Markov process started from P_r / rank at t_1: the first interval is
/// replaced by the identity so the state entering t_1 is diagonal.
MarkovProcess diagonal_start(const MarkovProcess& p, const ComplexMatrix& state) {
  std::vector<Superoperator> maps = p.maps();
  maps.front() = Superoperator::identity(p.dim_s());
  return MarkovProcess(DensityMatrix::from_matrix(state), std::move(maps), p.times(), p.derived());
}

std::vector<Instance> expand(const Process& process, const Observable& obs,
                             const PreparationSet& set) {
  std::vector<Instance> out;
  std::visit(
      Overloaded{
          [&](const SinglePreparation& s) { out.push_back({process, s.preparation, ""}); },
          [&](const BasisSpanningPreparations& s) {
            validate_spanning(process, s);
            for (std::size_t i = 0; i < s.preparations.size(); ++i) {
              out.push_back({process, s.preparations[i], "prep=" + std::to_string(i) + " "});
            }
          },
          [&](const AllDiagonalPreparations&) {
            if (obs.dim() != system_dim(process)) {
              throw DimensionError("observable dimension does not match the system");
            }
            for (std::size_t r = 0; r < obs.size(); ++r) {
              const ObservableOutcome& o = obs.outcome(r);
              const ComplexMatrix state = o.projector / static_cast<double>(o.rank);
              const std::string label = "diag=" + std::to_string(r) + " ";
              if (const auto* m = std::get_if<MarkovProcess>(&process); m && m->steps() > 0) {
                out.push_back({diagonal_start(*m, state), IdentityIntervention{}, label});
              } else {
                out.push_back({process,
                               MapIntervention{Superoperator::replacement(obs.dim(), state)}, label});
              }
            }
          },
      },
      set);
  return out;
}

std::string outcome_tuple(const std::vector<std::size_t>& steps, const std::vector<std::size_t>& r,
                          std::optional<std::size_t> marked, const char* marked_text) {
  std::ostringstream os;
  os << "p(";
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (i) os << ',';
    os << 't' << steps[i] + 1 << '=';
    if (marked && *marked == i) {
      os << marked_text;
    } else {
      os << r[i];
    }
  }
  os << ')';
  return os.str();
}

Verdict classicality_single(const Process& process, const Observable& obs,
                            const Intervention& preparation, const std::vector<std::size_t>& steps,
                            double tol, const std::string& label) {
  Verdict v;
  v.check = "classical";
  v.tolerance = tol;
  const std::size_t m = steps.size();
  const std::size_t nr = obs.size();

  std::map<std::pair<unsigned, std::vector<std::size_t>>, double> memo;
  auto probability = [&](unsigned mask, const std::vector<std::size_t>& outcomes) {
    auto key = std::make_pair(mask, outcomes);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    std::vector<MeasuredOutcome> measured;
    std::size_t j = 0;
    for (std::size_t i = 0; i < m; ++i) {
      if (mask & (1u << i)) measured.push_back({steps[i], outcomes[j++]});
    }
    const double p = joint_probability(process, obs, preparation, measured);
    memo.emplace(std::move(key), p);
    return p;
  };

  for (unsigned mask = 1; mask < (1u << m); ++mask) {
    std::vector<std::size_t> subset;
    for (std::size_t i = 0; i < m; ++i) {
      if (mask & (1u << i)) subset.push_back(i);
    }
    if (subset.size() < 2) continue;
    for (std::size_t pos = 0; pos < subset.size(); ++pos) {
      const unsigned reduced = mask & ~(1u << subset[pos]);
      // Outcomes on the remaining times, lexicographic with t_first slowest.
      std::vector<std::size_t> rest(subset.size() - 1, 0);
      while (true) {
        double total = 0.0;
        std::vector<std::size_t> full(subset.size());
        for (std::size_t rk = 0; rk < nr; ++rk) {
          for (std::size_t i = 0, j = 0; i < subset.size(); ++i) {
            full[i] = (i == pos) ? rk : rest[j++];
          }
          total += probability(mask, full);
        }
        const double marginal = probability(reduced, rest);
        const double distance = std::abs(total - marginal);
        observe(v, distance, [&] {
          std::vector<std::size_t> labels;
          std::vector<std::size_t> shown(subset.size());
          for (std::size_t i = 0, j = 0; i < subset.size(); ++i) {
            labels.push_back(steps[subset[i]]);
            shown[i] = (i == pos) ? 0 : rest[j++];
          }
          std::ostringstream os;
          os << label << "sum_t" << steps[subset[pos]] + 1 << ' '
             << outcome_tuple(labels, shown, pos, "*") << " vs "
             << outcome_tuple(labels, shown, pos, "I");
          return Witness{os.str(), scalar(total), scalar(marginal), distance};
        });
        std::size_t d = rest.size();
        while (d > 0 && ++rest[d - 1] == nr) rest[--d] = 0;
        if (d == 0) break;
      }
    }
  }
  return v;
}

std::vector<std::size_t> resolve_steps(const Process& process, std::vector<std::size_t> steps) {
  const std::size_t n = step_count(process);
  if (steps.empty()) {
    steps.resize(n);
    for (std::size_t i = 0; i < n; ++i) steps[i] = i;
  }
  std::sort(steps.begin(), steps.end());
  if (std::adjacent_find(steps.begin(), steps.end()) != steps.end()) {
    throw SequenceError("check_classicality: repeated step index");
  }
  if (!steps.empty() && steps.back() >= n) {
    throw IndexError("check_classicality: step " + std::to_string(steps.back()) + " out of range");
  }
  if (steps.size() > kMaxEnumeratedTimes) {
    throw SequenceError("check_classicality: at most " + std::to_string(kMaxEnumeratedTimes) +
                        " times can be enumerated");
  }
  return steps;
}

void merge(Verdict& into, const Verdict& part) {
  into.max_violation = std::max(into.max_violation, part.max_violation);
  if (!part.holds && into.holds) {
    into.holds = false;
    into.witness = part.witness;
  }
}

std::string pattern_text(std::size_t bits, std::size_t length) {
  std::string s;
  for (std::size_t i = 0; i < length; ++i) {
    if (i) s += ',';
    s += ((bits >> (length - 1 - i)) & 1u) ? 'I' : 'D';
  }
  if (length) s += ',';
  s += 'D';
  return s;
}

Verdict incoherence_single(const Process& process, const Observable& obs,
                           const Intervention& preparation, std::size_t ell, double tol,
                           const std::string& label) {
  Verdict v;
  v.check = "incoherent";
  v.tolerance = tol;
  const Process head = truncate(process, ell);
  const std::size_t free_steps = ell - 1;
  const std::size_t count = std::size_t{1} << free_steps;
  std::vector<ComplexMatrix> outputs;
  outputs.reserve(count);
  InterventionSequence seq;
  seq.observables = {obs};
  seq.preparation = preparation;
  seq.steps.assign(ell, DephaseIntervention{0});
  for (std::size_t bits = 0; bits < count; ++bits) {
    for (std::size_t i = 0; i < free_steps; ++i) {
      const bool identity = (bits >> (free_steps - 1 - i)) & 1u;
      seq.steps[i] = identity ? Intervention{IdentityIntervention{}} : Intervention{DephaseIntervention{0}};
    }
    outputs.push_back(evaluate(head, seq).matrix());
  }
  for (std::size_t a = 0; a < count; ++a) {
    for (std::size_t b = a + 1; b < count; ++b) {
      const double distance = trace_distance(outputs[a], outputs[b]);
      observe(v, distance, [&] {
        return Witness{label + "l=" + std::to_string(ell) + " [" + pattern_text(a, free_steps) +
                           "] vs [" + pattern_text(b, free_steps) + "]",
                       outputs[a], outputs[b], distance};
      });
    }
  }
  return v;
}

ComplexMatrix pure_state(const ComplexVector& psi) { return outer(psi / psi.norm()); }

}  // namespace

BasisSpanningPreparations spanning_preparations(std::size_t dim) {
  BasisSpanningPreparations set;
  std::vector<ComplexMatrix> states;
  for (std::size_t i = 0; i < dim; ++i) states.push_back(outer(basis_ket(dim, i)));
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = i + 1; j < dim; ++j) {
      states.push_back(pure_state(basis_ket(dim, i) + basis_ket(dim, j)));
      states.push_back(pure_state(basis_ket(dim, i) + Complex(0.0, 1.0) * basis_ket(dim, j)));
    }
  }
  for (const ComplexMatrix& s : states) {
    set.preparations.push_back(MapIntervention{Superoperator::replacement(dim, s)});
  }
  return set;
}

void validate_spanning(const Process& process, const BasisSpanningPreparations& set) {
  const std::size_t d = system_dim(process);
  const ComplexMatrix rho0 = initial_system_state(process);
  const std::vector<Observable> none;
  ComplexMatrix columns(idx(d * d), idx(set.preparations.size()));
  for (std::size_t i = 0; i < set.preparations.size(); ++i) {
    const Superoperator map = intervention_map(set.preparations[i], none, d);
    columns.col(idx(i)) = vectorize(map.apply(rho0));
  }
  Eigen::JacobiSVD<ComplexMatrix> svd(columns);
  svd.setThreshold(1e-10);
  if (static_cast<std::size_t>(svd.rank()) != d * d) {
    throw InvalidStateError("preparation set does not span the operator space (rank " +
                            std::to_string(svd.rank()) + " < " + std::to_string(d * d) + ")");
  }
}

Verdict check_classicality(const Process& process, const Observable& obs,
                           const Intervention& preparation, std::vector<std::size_t> steps,
                           double tol) {
  return classicality_single(process, obs, preparation, resolve_steps(process, std::move(steps)),
                             tol, "");
}

Verdict check_classicality(const Process& process, const Observable& obs,
                           const PreparationSet& preparations, std::vector<std::size_t> steps,
                           double tol) {
  const std::vector<std::size_t> resolved = resolve_steps(process, std::move(steps));
  Verdict v;
  v.check = "classical";
  v.tolerance = tol;
  for (const Instance& inst : expand(process, obs, preparations)) {
    merge(v, classicality_single(inst.process, obs, inst.preparation, resolved, tol, inst.label));
  }
  return v;
}

Verdict check_incoherence(const Process& process, const Observable& obs,
                          const PreparationSet& preparations, std::optional<std::size_t> ell,
                          double tol) {
  const std::size_t n = step_count(process);
  if (ell && (*ell == 0 || *ell > n)) {
    throw IndexError("check_incoherence: ell must lie in 1.." + std::to_string(n));
  }
  if (n > kMaxEnumeratedTimes) {
    throw SequenceError("check_incoherence: at most " + std::to_string(kMaxEnumeratedTimes) +
                        " times can be enumerated");
  }
  Verdict v;
  v.check = "incoherent";
  v.tolerance = tol;
  const std::size_t first = ell ? *ell : 1;
  const std::size_t last = ell ? *ell : n;
  for (const Instance& inst : expand(process, obs, preparations)) {
    for (std::size_t l = first; l <= last; ++l) {
      merge(v, incoherence_single(inst.process, obs, inst.preparation, l, tol, inst.label));
    }
  }
  return v;
}

Verdict check_ncgd(const MarkovProcess& process, const Observable& obs, double tol) {
  if (obs.dim() != process.dim_s()) {
    throw DimensionError("check_ncgd: observable dimension does not match the system");
  }
  Verdict v;
  v.check = "ncgd";
  v.tolerance = tol;
  const ComplexMatrix delta = dephasing_channel(obs).matrix();
  const std::size_t n = process.steps();
  for (std::size_t l = 1; l <= n; ++l) {
    for (std::size_t k = 1; k <= l; ++k) {
      for (std::size_t j = 1; j <= k; ++j) {
        const ComplexMatrix lhs = delta * process.map_between(l, k).matrix() * delta *
                                  process.map_between(k, j).matrix() * delta;
        const ComplexMatrix rhs = delta * process.map_between(l, j).matrix() * delta;
        const double distance = max_abs_entry(lhs - rhs);
        observe(v, distance, [&] {
          return Witness{"l=" + std::to_string(l) + " k=" + std::to_string(k) +
                             " j=" + std::to_string(j),
                         lhs, rhs, distance};
        });
      }
    }
  }
  return v;
}

Verdict check_ncgd(const Process& process, const Observable& obs, double tol) {
  if (const auto* m = std::get_if<MarkovProcess>(&process)) return check_ncgd(*m, obs, tol);
  return check_ncgd(markov_from_dilation(process), obs, tol);
}

Verdict check_projector_identity(const Superoperator& map, const Observable& obs_in,
                            const Observable& obs_out, double tol) {
  if (obs_in.dim() != map.dim_in() || obs_out.dim() != map.dim_out()) {
    throw DimensionError("check_projector_identity: observable dimensions do not match the map");
  }
  Verdict v;
  v.check = "projector_identity";
  v.tolerance = tol;
  ComplexMatrix sum_in = ComplexMatrix::Zero(map.matrix().cols(), map.matrix().cols());
  for (std::size_t r = 0; r < obs_in.size(); ++r) sum_in += projector_superop(obs_in, r).matrix();
  for (std::size_t r = 0; r < obs_out.size(); ++r) {
    const ComplexMatrix out = projector_superop(obs_out, r).matrix();
    const ComplexMatrix lhs = out * map.matrix() * sum_in;
    const ComplexMatrix rhs = out * map.matrix();
    const double distance = max_abs_entry(lhs - rhs);
    observe(v, distance, [&] {
      return Witness{"r_out=" + std::to_string(r), lhs, rhs, distance};
    });
  }
  return v;
}

Verdict check_invertibility(const MarkovProcess& process, double max_condition) {
  Verdict v;
  v.check = "invertible";
  v.tolerance = max_condition;
  for (std::size_t k = 1; k <= process.steps(); ++k) {
    const Superoperator map = process.map_between(k, 0);
    const double cond = condition_number(map);
    const double distance = std::isfinite(cond) ? cond : std::numeric_limits<double>::infinity();
    v.max_violation = std::max(v.max_violation, distance);
    if (!(distance <= max_condition) && !v.witness) {
      v.holds = false;
      v.witness = Witness{"Lambda_{" + std::to_string(k) + ",0}", map.matrix(),
                          ComplexMatrix(0, 0), distance};
    }
  }
  return v;
}

Verdict check_markovianity(const Process& process, double tol, std::uint64_t seed) {
  Verdict v;
  v.check = "markov";
  v.tolerance = tol;
  if (std::holds_alternative<MarkovProcess>(process)) return v;

  const std::size_t d = system_dim(process);
  const std::size_t n = step_count(process);
  Rng rng(seed);
  const ComplexMatrix random_basis = haar_unitary(d, rng);
  std::vector<double> labels(d);
  for (std::size_t i = 0; i < d; ++i) labels[i] = static_cast<double>(i);
  const std::vector<Observable> registry{Observable::computational(d),
                                         Observable::from_basis(random_basis, labels)};
  std::vector<std::pair<std::string, Intervention>> tests{
      {"I", IdentityIntervention{}},
      {"D", DephaseIntervention{0}},
      {"Drand", DephaseIntervention{1}},
      {"cptp", MapIntervention{random_cptp(d, rng)}},
      {"P0", MapIntervention{projector_superop(registry[0], 0)}},
      {"P0rand", MapIntervention{projector_superop(registry[1], 0)}},
  };
  const BasisSpanningPreparations spanning = spanning_preparations(d);
  std::vector<std::pair<std::string, Intervention>> preps{{"I", IdentityIntervention{}}};
  for (std::size_t i = 0; i < spanning.preparations.size(); ++i) {
    preps.emplace_back("S" + std::to_string(i), spanning.preparations[i]);
  }
  std::vector<Superoperator> random_maps;
  for (std::size_t i = 0; i < 8 * n; ++i) random_maps.push_back(random_cptp(d, rng));

  for (std::size_t m = 2; m <= n; ++m) {
    const Process head = truncate(process, m);
    for (std::size_t b = 1; b < m; ++b) {
      for (std::size_t s = 0; s < spanning.preparations.size(); ++s) {
        InterventionSequence seq;
        seq.observables = registry;
        seq.steps.assign(m, IdentityIntervention{});
        seq.steps[b] = spanning.preparations[s];
        const ComplexMatrix reference = evaluate(head, seq).matrix();
        const std::string tail = " | break t" + std::to_string(b + 1) + "->S" + std::to_string(s) +
                                 " len=" + std::to_string(m);

        auto compare = [&](const InterventionSequence& past, const std::string& pattern) {
          const SubnormalizedState out = evaluate(head, past);
          if (out.norm() < 1e-12) return;
          const ComplexMatrix normalized = out.matrix() / out.norm();
          const double distance = trace_distance(normalized, reference);
          observe(v, distance,
                  [&] { return Witness{pattern + tail, normalized, reference, distance}; });
        };

        for (const auto& [name, prep] : preps) {
          InterventionSequence past = seq;
          past.preparation = prep;
          compare(past, "prep=" + name);
        }
        for (std::size_t q = 0; q < b; ++q) {
          for (const auto& [name, t] : tests) {
            InterventionSequence past = seq;
            past.steps[q] = t;
            compare(past, "t" + std::to_string(q + 1) + "=" + name);
          }
        }
        for (std::size_t q1 = 0; q1 < b; ++q1) {
          for (std::size_t q2 = q1 + 1; q2 < b; ++q2) {
            for (const auto& [n1, t1] : tests) {
              for (const auto& [n2, t2] : tests) {
                InterventionSequence past = seq;
                past.steps[q1] = t1;
                past.steps[q2] = t2;
                compare(past, "t" + std::to_string(q1 + 1) + "=" + n1 + ",t" +
                                  std::to_string(q2 + 1) + "=" + n2);
              }
            }
          }
        }
        for (std::size_t r = 0; r < 8; ++r) {
          InterventionSequence past = seq;
          past.preparation = preps[(r * 7 + s) % preps.size()].second;
          for (std::size_t q = 0; q < b; ++q) past.steps[q] = MapIntervention{random_maps[r * n + q]};
          compare(past, "random=" + std::to_string(r));
        }
      }
    }
  }
  return v;
}

bool PipelineReport::violated() const {
  return std::any_of(implications.begin(), implications.end(),
                     [](const Implication& i) { return i.violated; });
}

const Verdict* PipelineReport::find(const std::string& check) const {
  for (const Verdict& v : verdicts) {
    if (v.check == check) return &v;
  }
  return nullptr;
}

PipelineReport check_theorem_pipeline(const Process& process, const Observable& obs,
                                      const PreparationSet& preparations,
                                      const PipelineOptions& options) {
  PipelineReport report;
  const double tol = options.tolerance;
  const std::size_t d = system_dim(process);

  if (options.classical_implies_incoherent) {
    Verdict classical{"classical", true, tol, 0.0, {}};
    Verdict incoherent{"incoherent", true, tol, 0.0, {}};
    Implication imp{"classical => incoherent (non-degenerate)", false, true, false};
    const bool applicable = !obs.is_degenerate();
    for (const Instance& inst : expand(process, obs, preparations)) {
      const Verdict c = check_classicality(inst.process, obs, inst.preparation, {}, tol);
      const Verdict i = check_incoherence(inst.process, obs, SinglePreparation{inst.preparation}, {}, tol);
      merge(classical, c);
      merge(incoherent, i);
      if (applicable && c.holds) {
        imp.premise = true;
        if (!i.holds) {
          imp.conclusion = false;
          imp.violated = true;
        }
      }
    }
    report.verdicts.push_back(std::move(classical));
    report.verdicts.push_back(std::move(incoherent));
    report.implications.push_back(imp);
  }

  const bool need_markov = options.markov_incoherent_implies_classical ||
                           options.markov_incoherent_implies_ncgd ||
                           options.markov_ncgd_implies_diagonal_incoherent;
  if (!need_markov) return report;

  Verdict markov = check_markovianity(process, tol);
  report.verdicts.push_back(markov);
  const auto* native = std::get_if<MarkovProcess>(&process);
  // Invertibility is only defined for Markov families; elsewhere the
  // remaining premises are reported as false.
  if (!native) return report;

  const Verdict invertible = check_invertibility(*native);
  const Verdict ncgd = check_ncgd(*native, obs, tol);
  const PreparationSet all = spanning_preparations(d);
  const Verdict incoherent_all = [&] {
    Verdict v = check_incoherence(process, obs, all, {}, tol);
    v.check = "incoherent_all";
    return v;
  }();
  report.verdicts.push_back(invertible);
  report.verdicts.push_back(ncgd);
  report.verdicts.push_back(incoherent_all);

  const bool premise = markov.holds && invertible.holds && incoherent_all.holds;
  if (options.markov_incoherent_implies_classical) {
    Verdict classical_all = check_classicality(process, obs, all, {}, tol);
    classical_all.check = "classical_all";
    report.implications.push_back({"markov & invertible & incoherent(all) => classical(all)",
                                   premise, classical_all.holds, premise && !classical_all.holds});
    report.verdicts.push_back(std::move(classical_all));
  }
  if (options.markov_incoherent_implies_ncgd) {
    report.implications.push_back({"markov & invertible & incoherent(all) => ncgd", premise,
                                   ncgd.holds, premise && !ncgd.holds});
  }
  if (options.markov_ncgd_implies_diagonal_incoherent) {
    Verdict diagonal = check_incoherence(process, obs, AllDiagonalPreparations{0}, {}, tol);
    diagonal.check = "incoherent_diagonal";
    const bool p = markov.holds && ncgd.holds;
    report.implications.push_back(
        {"markov & ncgd => incoherent(diagonal)", p, diagonal.holds, p && !diagonal.holds});
    report.verdicts.push_back(std::move(diagonal));
  }
  return report;
}

}  // namespace qclassical
