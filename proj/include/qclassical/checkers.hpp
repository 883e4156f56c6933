#pragma once

// Decision procedures for classicality, incoherence, NCGD, invertibility,
// operational Markovianity and the projector identity on single maps. Each
// returns a Verdict that carries a witness when the property fails.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qclassical/channels.hpp"
#include "qclassical/linalg.hpp"
#include "qclassical/process.hpp"

namespace qclassical {

inline constexpr double kDefaultCheckTolerance = 1e-9;

/// The two sides that disagree and their distance (absolute difference,
/// trace distance, max entry or condition number, depending on the check).
struct Witness {
  std::string pattern;
  ComplexMatrix lhs;
  ComplexMatrix rhs;
  double distance = 0.0;
};

struct Verdict {
  std::string check;
  bool holds = true;
  double tolerance = kDefaultCheckTolerance;
  /// Largest discrepancy seen over the whole enumeration.
  double max_violation = 0.0;
  std::optional<Witness> witness;
};

struct SinglePreparation {
  Intervention preparation;
};
/// Preparations whose outputs span the operator space of S.
struct BasisSpanningPreparations {
  std::vector<Intervention> preparations;
};
/// Every preparation that leaves the system block-diagonal in `observable`
/// at t_1 (index into the observable list the check is given; 0 for the
/// single-observable checks).
struct AllDiagonalPreparations {
  std::size_t observable = 0;
};

using PreparationSet =
    std::variant<SinglePreparation, BasisSpanningPreparations, AllDiagonalPreparations>;

/// d^2 replacement channels onto |i><i|, |+_ij><+_ij| and |+i_ij><+i_ij|.
BasisSpanningPreparations spanning_preparations(std::size_t dim);

/// Throws InvalidStateError unless the preparation outputs on the initial
/// state have rank d^2.
void validate_spanning(const Process& process, const BasisSpanningPreparations& set);

/// Consistency condition: for every subset of `steps` (0-based step
/// indices; empty means all) and every step k in it, sum_{r_k} p(...) equals
/// p with Identity at k.
Verdict check_classicality(const Process& process, const Observable& obs,
                           const Intervention& preparation, std::vector<std::size_t> steps = {},
                           double tol = kDefaultCheckTolerance);
Verdict check_classicality(const Process& process, const Observable& obs,
                           const PreparationSet& preparations, std::vector<std::size_t> steps = {},
                           double tol = kDefaultCheckTolerance);

/// ell-incoherence for ell given (1-based time index), otherwise the
/// conjunction over ell = 1..n.
Verdict check_incoherence(const Process& process, const Observable& obs,
                          const PreparationSet& preparations, std::optional<std::size_t> ell = {},
                          double tol = kDefaultCheckTolerance);

/// Delta_l L_{l,k} Delta_k L_{k,j} Delta_j = Delta_l L_{l,j} Delta_j for all
/// grid triples l >= k >= j >= 1.
Verdict check_ncgd(const MarkovProcess& process, const Observable& obs,
                   double tol = kDefaultCheckTolerance);
/// Uses the native family, or the one derived from the unmeasured dynamics.
Verdict check_ncgd(const Process& process, const Observable& obs,
                   double tol = kDefaultCheckTolerance);

/// sum_r P_{r'} L P_r = P_{r'} L for every outcome r' of `obs_out`.
Verdict check_projector_identity(const Superoperator& map, const Observable& obs_in,
                            const Observable& obs_out, double tol = kDefaultCheckTolerance);

/// Every Lambda_{k,0} has condition number at most `max_condition`.
Verdict check_invertibility(const MarkovProcess& process,
                            double max_condition = kMaxConditionNumber);

/// Native Markov processes hold by construction. Otherwise the future after a
/// causal break (discard and re-prepare) is compared across a sampled set of
/// past interventions and preparations.
Verdict check_markovianity(const Process& process, double tol = kDefaultCheckTolerance,
                           std::uint64_t seed = 0);

struct Implication {
  std::string theorem;
  bool premise = false;
  bool conclusion = false;
  bool violated = false;
};

struct PipelineOptions {
  bool classical_implies_incoherent = true;
  bool markov_incoherent_implies_classical = true;
  bool markov_incoherent_implies_ncgd = true;
  bool markov_ncgd_implies_diagonal_incoherent = true;
  double tolerance = kDefaultCheckTolerance;
};

struct PipelineReport {
  std::vector<Verdict> verdicts;
  std::vector<Implication> implications;

  bool violated() const;
  const Verdict* find(const std::string& check) const;
};

/// Runs the checkers and evaluates the theorem implications on one instance.
/// The "for all preparations" quantities use the canonical spanning set.
PipelineReport check_theorem_pipeline(const Process& process, const Observable& obs,
                                      const PreparationSet& preparations,
                                      const PipelineOptions& options = {});

}  // namespace qclassical
