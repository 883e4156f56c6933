#include "qclassical/process.hpp"

#include <cmath>
#include <string>
#include <type_traits>

#include "qclassical/errors.hpp"

namespace qclassical {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_grid_length(const TimeGrid& times, std::size_t steps) {
  if (!times.empty() && times.size() != steps + 1) {
    throw SequenceError("time grid has " + std::to_string(times.size()) +
                        " labels, expected " + std::to_string(steps + 1) + " (t_0..t_n)");
  }
}

TimeGrid truncate_grid(const TimeGrid& times, std::size_t steps) {
  if (times.empty()) return {};
  return TimeGrid(std::vector<double>(times.times().begin(),
                                      times.times().begin() + static_cast<long>(steps + 1)));
}

/// Superoperators of the preparation and of each step, resolved once.
struct ResolvedSequence {
  Superoperator preparation;
  std::vector<std::optional<Superoperator>> steps;  // nullopt = identity
};

ResolvedSequence resolve(const InterventionSequence& seq, std::size_t steps, std::size_t dim,
                         bool require_physical) {
  if (seq.steps.size() != steps) {
    throw SequenceError("sequence has " + std::to_string(seq.steps.size()) +
                        " interventions, process has " + std::to_string(steps) + " steps");
  }
  for (std::size_t i = 0; i < seq.observables.size(); ++i) {
    if (seq.observables[i].dim() != dim) {
      throw DimensionError("observable " + std::to_string(i) + " has dimension " +
                           std::to_string(seq.observables[i].dim()) + ", system has " +
                           std::to_string(dim));
    }
  }
  if (std::holds_alternative<OutcomeIntervention>(seq.preparation) ||
      std::holds_alternative<DephaseIntervention>(seq.preparation)) {
    throw SequenceError("preparation must be a map or the identity");
  }
  ResolvedSequence out{intervention_map(seq.preparation, seq.observables, dim), {}};
  if (require_physical &&
      (!out.preparation.completely_positive() || !out.preparation.trace_preserving())) {
    throw NotCompletelyPositiveError("preparation must be completely positive and trace preserving");
  }
  out.steps.reserve(steps);
  for (const Intervention& step : seq.steps) {
    if (std::holds_alternative<IdentityIntervention>(step)) {
      out.steps.emplace_back(std::nullopt);
      continue;
    }
    Superoperator map = intervention_map(step, seq.observables, dim);
    if (require_physical && !map.completely_positive()) {
      throw NotCompletelyPositiveError("intervention is not completely positive");
    }
    out.steps.emplace_back(std::move(map));
  }
  return out;
}

ComplexMatrix conjugate_by(const ComplexMatrix& u, const ComplexMatrix& rho) {
  return u * rho * u.adjoint();
}

ComplexMatrix run_dilated(const DilatedProcess& p, const ResolvedSequence& seq) {
  ComplexMatrix rho = apply_to_system(seq.preparation, p.initial_se().matrix(), p.dim_e());
  for (std::size_t k = 0; k < p.steps(); ++k) {
    rho = conjugate_by(p.unitaries()[k], rho);
    if (seq.steps[k]) rho = apply_to_system(*seq.steps[k], rho, p.dim_e());
  }
  return partial_trace(rho, p.dim_s(), p.dim_e(), Subsystem::A);
}

ComplexMatrix run_markov(const MarkovProcess& p, const ResolvedSequence& seq) {
  ComplexMatrix rho = seq.preparation.apply(p.initial_s().matrix());
  for (std::size_t k = 0; k < p.steps(); ++k) {
    rho = p.maps()[k].apply(rho);
    if (seq.steps[k]) rho = seq.steps[k]->apply(rho);
  }
  return rho;
}

ComplexMatrix run_mixed(const MixedUnitaryProcess& p, const ResolvedSequence& seq) {
  const ComplexMatrix prepared = seq.preparation.apply(p.initial_s().matrix());
  ComplexMatrix total = ComplexMatrix::Zero(prepared.rows(), prepared.cols());
  for (const MixedUnitaryProcess::Branch& branch : p.branches()) {
    ComplexMatrix rho = prepared;
    for (std::size_t k = 0; k < branch.unitaries.size(); ++k) {
      rho = conjugate_by(branch.unitaries[k], rho);
      if (seq.steps[k]) rho = seq.steps[k]->apply(rho);
    }
    total += branch.weight * rho;
  }
  return total;
}

ComplexMatrix run(const Process& process, const ResolvedSequence& seq) {
  return std::visit(Overloaded{
                        [&](const DilatedProcess& p) { return run_dilated(p, seq); },
                        [&](const MarkovProcess& p) { return run_markov(p, seq); },
                        [&](const MixedUnitaryProcess& p) { return run_mixed(p, seq); },
                    },
                    process);
}

}  // namespace

TimeGrid::TimeGrid(std::vector<double> times) : times_(std::move(times)) {
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (!std::isfinite(times_[i])) throw SequenceError("time grid: non-finite label");
    if (i > 0 && !(times_[i] > times_[i - 1])) {
      throw SequenceError("time grid must be strictly increasing");
    }
  }
}

DilatedProcess::DilatedProcess(std::size_t dim_s, std::size_t dim_e, DensityMatrix initial_se,
                               std::vector<ComplexMatrix> unitaries, TimeGrid times)
    : dim_s_(dim_s),
      dim_e_(dim_e),
      initial_se_(std::move(initial_se)),
      unitaries_(std::move(unitaries)),
      times_(std::move(times)) {
  if (dim_s_ == 0 || dim_e_ == 0) throw DimensionError("DilatedProcess: zero dimension");
  const std::size_t joint = dim_s_ * dim_e_;
  if (joint > kMaxJointDimension) {
    throw DimensionError("DilatedProcess: joint dimension " + std::to_string(joint) +
                         " exceeds the cap of " + std::to_string(kMaxJointDimension));
  }
  if (initial_se_.dim() != joint) {
    throw DimensionError("DilatedProcess: initial state has dimension " +
                         std::to_string(initial_se_.dim()) + ", expected " +
                         std::to_string(joint));
  }
  for (std::size_t k = 0; k < unitaries_.size(); ++k) {
    const ComplexMatrix& u = unitaries_[k];
    if (u.rows() != static_cast<Eigen::Index>(joint) || u.cols() != u.rows()) {
      throw DimensionError("DilatedProcess: unitary " + std::to_string(k) +
                           " has the wrong dimension");
    }
    if (!is_unitary(u)) {
      throw NotUnitaryError("DilatedProcess: unitary " + std::to_string(k) + " is not unitary");
    }
  }
  check_grid_length(times_, unitaries_.size());
}

MarkovProcess::MarkovProcess(DensityMatrix initial_s, std::vector<Superoperator> maps,
                             TimeGrid times, bool derived)
    : initial_s_(std::move(initial_s)),
      maps_(std::move(maps)),
      times_(std::move(times)),
      derived_(derived) {
  for (std::size_t k = 0; k < maps_.size(); ++k) {
    const Superoperator& m = maps_[k];
    if (m.dim_in() != dim_s() || m.dim_out() != dim_s()) {
      throw DimensionError("MarkovProcess: map " + std::to_string(k) +
                           " does not act on the system dimension");
    }
    if (!m.completely_positive() || !m.trace_preserving()) {
      throw NotCompletelyPositiveError("MarkovProcess: map " + std::to_string(k) +
                                       " is not CPTP");
    }
  }
  check_grid_length(times_, maps_.size());
}

Superoperator MarkovProcess::map_between(std::size_t to, std::size_t from) const {
  if (from > to || to > maps_.size()) {
    throw IndexError("map_between: need from <= to <= " + std::to_string(maps_.size()));
  }
  Superoperator out = Superoperator::identity(dim_s());
  for (std::size_t k = from; k < to; ++k) out = compose(maps_[k], out);
  return out;
}

MixedUnitaryProcess::MixedUnitaryProcess(DensityMatrix initial_s, std::vector<Branch> branches,
                                         TimeGrid times)
    : initial_s_(std::move(initial_s)), branches_(std::move(branches)), times_(std::move(times)) {
  if (branches_.empty()) throw DimensionError("MixedUnitaryProcess: no branches");
  double total = 0.0;
  const std::size_t n = branches_.front().unitaries.size();
  for (const Branch& b : branches_) {
    if (!(b.weight >= 0.0) || !std::isfinite(b.weight)) {
      throw InvalidStateError("MixedUnitaryProcess: negative or non-finite branch weight");
    }
    if (b.unitaries.size() != n) {
      throw SequenceError("MixedUnitaryProcess: branches have different step counts");
    }
    for (const ComplexMatrix& u : b.unitaries) {
      if (u.rows() != static_cast<Eigen::Index>(dim_s()) || u.cols() != u.rows()) {
        throw DimensionError("MixedUnitaryProcess: unitary has the wrong dimension");
      }
      if (!is_unitary(u)) throw NotUnitaryError("MixedUnitaryProcess: branch unitary");
    }
    total += b.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw InvalidStateError("MixedUnitaryProcess: branch weights sum to " +
                            std::to_string(total));
  }
  check_grid_length(times_, n);
}

std::size_t MixedUnitaryProcess::steps() const { return branches_.front().unitaries.size(); }

DilatedProcess MixedUnitaryProcess::to_dilated() const {
  const std::size_t ds = dim_s();
  const std::size_t de = branches_.size();
  if (ds * de > kMaxJointDimension) {
    throw DimensionError("MixedUnitaryProcess::to_dilated: joint dimension exceeds the cap");
  }
  ComplexMatrix env = ComplexMatrix::Zero(static_cast<Eigen::Index>(de),
                                          static_cast<Eigen::Index>(de));
  for (std::size_t b = 0; b < de; ++b) {
    env(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(b)) = branches_[b].weight;
  }
  std::vector<ComplexMatrix> joint_unitaries;
  for (std::size_t k = 0; k < steps(); ++k) {
    ComplexMatrix u = ComplexMatrix::Zero(static_cast<Eigen::Index>(ds * de),
                                          static_cast<Eigen::Index>(ds * de));
    for (std::size_t b = 0; b < de; ++b) {
      u += tensor_product(branches_[b].unitaries[k], matrix_unit(de, b, b));
    }
    joint_unitaries.push_back(std::move(u));
  }
  return DilatedProcess(ds, de, DensityMatrix::from_matrix(tensor_product(initial_s_.matrix(), env)),
                        std::move(joint_unitaries), times_);
}

std::size_t step_count(const Process& process) {
  return std::visit([](const auto& p) { return p.steps(); }, process);
}

std::size_t system_dim(const Process& process) {
  return std::visit([](const auto& p) { return p.dim_s(); }, process);
}

const TimeGrid& time_grid(const Process& process) {
  return std::visit([](const auto& p) -> const TimeGrid& { return p.times(); }, process);
}

ComplexMatrix initial_system_state(const Process& process) {
  return std::visit(Overloaded{
                        [](const DilatedProcess& p) {
                          return partial_trace(p.initial_se().matrix(), p.dim_s(), p.dim_e(),
                                               Subsystem::A);
                        },
                        [](const MarkovProcess& p) { return ComplexMatrix(p.initial_s().matrix()); },
                        [](const MixedUnitaryProcess& p) {
                          return ComplexMatrix(p.initial_s().matrix());
                        },
                    },
                    process);
}

Process truncate(const Process& process, std::size_t steps) {
  if (steps > step_count(process)) {
    throw SequenceError("truncate: process has only " + std::to_string(step_count(process)) +
                        " steps");
  }
  return std::visit(
      Overloaded{
          [&](const DilatedProcess& p) -> Process {
            return DilatedProcess(p.dim_s(), p.dim_e(), p.initial_se(),
                                  {p.unitaries().begin(), p.unitaries().begin() + static_cast<long>(steps)},
                                  truncate_grid(p.times(), steps));
          },
          [&](const MarkovProcess& p) -> Process {
            return MarkovProcess(p.initial_s(),
                                 {p.maps().begin(), p.maps().begin() + static_cast<long>(steps)},
                                 truncate_grid(p.times(), steps), p.derived());
          },
          [&](const MixedUnitaryProcess& p) -> Process {
            std::vector<MixedUnitaryProcess::Branch> branches;
            branches.reserve(p.branches().size());
            for (const auto& b : p.branches()) {
              branches.push_back(
                  {b.weight, {b.unitaries.begin(), b.unitaries.begin() + static_cast<long>(steps)}});
            }
            return MixedUnitaryProcess(p.initial_s(), std::move(branches),
                                       truncate_grid(p.times(), steps));
          },
      },
      process);
}

Superoperator intervention_map(const Intervention& intervention,
                               std::span<const Observable> observables, std::size_t dim) {
  auto lookup = [&](std::size_t index) -> const Observable& {
    if (index >= observables.size()) {
      throw IndexError("intervention refers to observable " + std::to_string(index) + ", only " +
                       std::to_string(observables.size()) + " registered");
    }
    if (observables[index].dim() != dim) {
      throw DimensionError("observable dimension does not match the system");
    }
    return observables[index];
  };
  return std::visit(
      Overloaded{
          [&](const OutcomeIntervention& o) {
            return projector_superop(lookup(o.observable), o.outcome);
          },
          [&](const DephaseIntervention& d) { return dephasing_channel(lookup(d.observable)); },
          [&](const IdentityIntervention&) { return Superoperator::identity(dim); },
          [&](const MapIntervention& m) {
            if (m.map.dim_in() != dim || m.map.dim_out() != dim) {
              throw DimensionError("intervention map does not act on the system dimension");
            }
            return m.map;
          },
      },
      intervention);
}

SubnormalizedState evaluate(const Process& process, const InterventionSequence& seq) {
  const ResolvedSequence resolved = resolve(seq, step_count(process), system_dim(process), true);
  ComplexMatrix out = run(process, resolved);
  // Remove rounding-level anti-Hermitian parts before validation.
  out = (0.5 * (out + out.adjoint())).eval();
  return SubnormalizedState::from_cp_output(std::move(out));
}

ComplexMatrix evaluate_operator(const Process& process, const InterventionSequence& seq) {
  const ResolvedSequence resolved = resolve(seq, step_count(process), system_dim(process), false);
  return run(process, resolved);
}

ComplexMatrix evaluate_factorized(const MarkovProcess& process, const InterventionSequence& seq) {
  const ResolvedSequence resolved = resolve(seq, process.steps(), process.dim_s(), false);
  ComplexMatrix total = resolved.preparation.matrix();
  for (std::size_t k = 0; k < process.steps(); ++k) {
    total = process.maps()[k].matrix() * total;
    if (resolved.steps[k]) total = resolved.steps[k]->matrix() * total;
  }
  const std::size_t d = process.dim_s();
  return unvectorize(total * vectorize(process.initial_s().matrix()), d, d);
}

double joint_probability(const Process& process, const Observable& obs,
                         const Intervention& preparation,
                         std::span<const MeasuredOutcome> outcomes) {
  InterventionSequence seq;
  seq.observables = {obs};
  seq.preparation = preparation;
  seq.steps.assign(step_count(process), IdentityIntervention{});
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (i > 0 && outcomes[i].step <= outcomes[i - 1].step) {
      throw SequenceError("joint_probability: measured steps must be strictly increasing");
    }
    if (outcomes[i].step >= seq.steps.size()) {
      throw SequenceError("joint_probability: step " + std::to_string(outcomes[i].step) +
                          " beyond the process length");
    }
    seq.steps[outcomes[i].step] = OutcomeIntervention{0, outcomes[i].outcome};
  }
  return evaluate(process, seq).norm();
}

Superoperator reduced_map(const Process& process, std::size_t k) {
  const Process head = truncate(process, k);
  const std::size_t d = system_dim(process);
  const auto d2 = static_cast<Eigen::Index>(d * d);
  ComplexMatrix m(d2, d2);
  InterventionSequence seq;
  seq.steps.assign(k, IdentityIntervention{});
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = 0; b < d; ++b) {
      // Linear "prepare |a><b|" slot; the product environment rides along.
      seq.preparation = MapIntervention{Superoperator::replacement(d, matrix_unit(d, a, b))};
      const ComplexMatrix image = evaluate_operator(head, seq);
      m.col(static_cast<Eigen::Index>(a + b * d)) = vectorize(image);
    }
  }
  return Superoperator::from_matrix(d, d, std::move(m));
}

MarkovProcess markov_from_dilation(const Process& process) {
  if (const auto* dilated = std::get_if<DilatedProcess>(&process)) {
    const ComplexMatrix& joint = dilated->initial_se().matrix();
    const ComplexMatrix rho_s = partial_trace(joint, dilated->dim_s(), dilated->dim_e(), Subsystem::A);
    const ComplexMatrix rho_e = partial_trace(joint, dilated->dim_s(), dilated->dim_e(), Subsystem::B);
    if (max_abs_entry(joint - tensor_product(rho_s, rho_e)) > 1e-10) {
      throw NotDerivableError("markov_from_dilation: initial system-environment state is correlated");
    }
  }
  const std::size_t n = step_count(process);
  std::vector<Superoperator> maps;
  maps.reserve(n);
  Superoperator previous = Superoperator::identity(system_dim(process));
  for (std::size_t k = 1; k <= n; ++k) {
    Superoperator current = reduced_map(process, k);
    const Superoperator step = Superoperator::from_matrix(
        current.dim_in(), current.dim_out(), current.matrix() * invert(previous).matrix());
    if (!step.completely_positive() || !step.trace_preserving()) {
      throw NotDerivableError("markov_from_dilation: intermediate map " + std::to_string(k) +
                              " is not CPTP");
    }
    maps.push_back(step);
    previous = std::move(current);
  }
  ComplexMatrix rho0 = initial_system_state(process);
  return MarkovProcess(DensityMatrix::from_matrix(std::move(rho0)), std::move(maps),
                       time_grid(process), true);
}

}  // namespace qclassical
