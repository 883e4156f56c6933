#pragma once

// Multi-time processes and their behavioural process tensor: an evaluator
// that maps a preparation plus one intervention per grid time to the
// resulting subnormalised system state.
//
// Step indices are zero-based: step k is the grid time t_{k+1}; t_0 is the
// preparation time.

#include <cstddef>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "qclassical/channels.hpp"
#include "qclassical/linalg.hpp"

namespace qclassical {

/// Largest number of grid times the enumerating checkers accept.
inline constexpr std::size_t kMaxEnumeratedTimes = 8;

/// Strictly increasing labels t_0 < t_1 < ... < t_n. May be empty when a
/// process has no physical time attached.
class TimeGrid {
 public:
  TimeGrid() = default;
  explicit TimeGrid(std::vector<double> times);

  const std::vector<double>& times() const { return times_; }
  bool empty() const { return times_.empty(); }
  std::size_t size() const { return times_.size(); }

 private:
  std::vector<double> times_;
};

struct OutcomeIntervention {
  std::size_t observable = 0;
  std::size_t outcome = 0;
};
struct DephaseIntervention {
  std::size_t observable = 0;
};
struct IdentityIntervention {};
struct MapIntervention {
  Superoperator map;
};

using Intervention =
    std::variant<OutcomeIntervention, DephaseIntervention, IdentityIntervention, MapIntervention>;

/// Preparation slot plus one intervention per grid time, with the registry
/// of observables that Outcome/Dephase entries refer to.
struct InterventionSequence {
  std::vector<Observable> observables;
  Intervention preparation = IdentityIntervention{};
  std::vector<Intervention> steps;
};

/// Full system-environment dilation: initial joint state and one joint unitary
/// per interval (U_{1,0} first).
class DilatedProcess {
 public:
  DilatedProcess(std::size_t dim_s, std::size_t dim_e, DensityMatrix initial_se,
                 std::vector<ComplexMatrix> unitaries, TimeGrid times = {});

  std::size_t dim_s() const { return dim_s_; }
  std::size_t dim_e() const { return dim_e_; }
  const DensityMatrix& initial_se() const { return initial_se_; }
  const std::vector<ComplexMatrix>& unitaries() const { return unitaries_; }
  const TimeGrid& times() const { return times_; }
  std::size_t steps() const { return unitaries_.size(); }

 private:
  std::size_t dim_s_;
  std::size_t dim_e_;
  DensityMatrix initial_se_;
  std::vector<ComplexMatrix> unitaries_;
  TimeGrid times_;
};

/// Operationally CP-divisible process: CPTP maps Lambda_{k,k-1} interleaved
/// with interventions. `derived` marks families reconstructed from a dilation
/// (they reproduce unmeasured dynamics only).
class MarkovProcess {
 public:
  MarkovProcess(DensityMatrix initial_s, std::vector<Superoperator> maps, TimeGrid times = {},
                bool derived = false);

  std::size_t dim_s() const { return initial_s_.dim(); }
  const DensityMatrix& initial_s() const { return initial_s_; }
  const std::vector<Superoperator>& maps() const { return maps_; }
  const TimeGrid& times() const { return times_; }
  bool derived() const { return derived_; }
  std::size_t steps() const { return maps_.size(); }

  /// Lambda_{to,from} as the chained product; indices are grid indices with
  /// 0 = t_0. Requires from <= to.
  Superoperator map_between(std::size_t to, std::size_t from) const;

 private:
  DensityMatrix initial_s_;
  std::vector<Superoperator> maps_;
  TimeGrid times_;
  bool derived_;
};

/// Dilation whose environment is a classical register: branch b occurs with
/// probability weight_b and drives the system with its own unitaries. Exactly
/// a DilatedProcess with a diagonal environment state and block-diagonal
/// controlled unitaries, without the joint-dimension cap.
class MixedUnitaryProcess {
 public:
  struct Branch {
    double weight = 0.0;
    std::vector<ComplexMatrix> unitaries;
  };

  MixedUnitaryProcess(DensityMatrix initial_s, std::vector<Branch> branches, TimeGrid times = {});

  std::size_t dim_s() const { return initial_s_.dim(); }
  const DensityMatrix& initial_s() const { return initial_s_; }
  const std::vector<Branch>& branches() const { return branches_; }
  const TimeGrid& times() const { return times_; }
  std::size_t steps() const;

  /// Equivalent DilatedProcess with a |branches|-dimensional environment.
  /// Throws DimensionError beyond the joint-dimension cap.
  DilatedProcess to_dilated() const;

 private:
  DensityMatrix initial_s_;
  std::vector<Branch> branches_;
  TimeGrid times_;
};

using Process = std::variant<DilatedProcess, MarkovProcess, MixedUnitaryProcess>;

std::size_t step_count(const Process& process);
std::size_t system_dim(const Process& process);
const TimeGrid& time_grid(const Process& process);
/// Reduced system state at t_0.
ComplexMatrix initial_system_state(const Process& process);
/// The same process restricted to its first `steps` intervals.
Process truncate(const Process& process, std::size_t steps);

/// Superoperator realising one intervention; Identity maps to the identity.
Superoperator intervention_map(const Intervention& intervention,
                               std::span<const Observable> observables, std::size_t dim);

/// Evaluates the process tensor on a sequence of CP interventions with a
/// trace-preserving preparation. Throws SequenceError on a length mismatch
/// and DimensionError on inconsistent dimensions.
SubnormalizedState evaluate(const Process& process, const InterventionSequence& seq);

/// Multilinear extension of `evaluate`: accepts arbitrary linear
/// interventions (used for tomography) and returns the raw operator.
ComplexMatrix evaluate_operator(const Process& process, const InterventionSequence& seq);

/// Second code path for Markov processes: multiplies every superoperator of
/// the sequence into one map, then applies it to the initial state.
ComplexMatrix evaluate_factorized(const MarkovProcess& process, const InterventionSequence& seq);

struct MeasuredOutcome {
  std::size_t step = 0;
  std::size_t outcome = 0;
};

/// p(outcomes | prep) with Identity at unmeasured steps. Steps must be
/// strictly increasing.
double joint_probability(const Process& process, const Observable& obs,
                         const Intervention& preparation,
                         std::span<const MeasuredOutcome> outcomes);

/// Lambda_{k,0}: the reduced map from t_0 to grid time k with no
/// interventions, by tomography on the matrix units.
Superoperator reduced_map(const Process& process, std::size_t k);

/// Rebuilds a Markov family from unmeasured dynamics:
/// Lambda_{k,k-1} = Lambda_{k,0} Lambda_{k-1,0}^{-1}. Requires a product
/// initial state (NotDerivableError otherwise) and invertible Lambda_{k,0}
/// (NotInvertibleError). The result is flagged `derived`.
MarkovProcess markov_from_dilation(const Process& process);

}  // namespace qclassical
