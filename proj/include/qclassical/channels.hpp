#pragma once

// Superoperators, projective observables and the maps built from them.
//
// Vectorisation is column stacking: vec(X)[i + j*d] = X(i, j). Under this
// convention the map X -> A X B has matrix (B^T kron A), so a unitary channel
// is conj(U) kron U and a Kraus map is sum_k conj(K_k) kron K_k.

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "qclassical/linalg.hpp"

namespace qclassical {

/// Minimum Choi eigenvalue accepted as "completely positive".
inline constexpr double kCompletePositivityTolerance = 1e-9;
inline constexpr double kTracePreservationTolerance = 1e-10;
inline constexpr double kProjectorTolerance = 1e-10;
/// Largest condition number for which a superoperator counts as invertible.
inline constexpr double kMaxConditionNumber = 1e8;

ComplexVector vectorize(const ComplexMatrix& x);
ComplexMatrix unvectorize(const ComplexVector& v, std::size_t rows, std::size_t cols);

/// Linear map on operators, stored as a dim_out^2 x dim_in^2 matrix acting on
/// column-stacked operators. Carries CP/TP metadata.
class Superoperator {
 public:
  /// Flags are computed numerically (Choi positivity, trace preservation).
  static Superoperator from_matrix(std::size_t dim_in, std::size_t dim_out, ComplexMatrix matrix);
  /// Trusts the caller's flags; used by constructions that are CP/TP by
  /// definition.
  static Superoperator with_flags(std::size_t dim_in, std::size_t dim_out, ComplexMatrix matrix,
                                  bool completely_positive, bool trace_preserving);
  static Superoperator from_kraus(std::span<const ComplexMatrix> kraus);
  static Superoperator identity(std::size_t dim);
  /// X -> tr(X) * state. CP whenever `state` is positive semidefinite.
  static Superoperator replacement(std::size_t dim_in, const ComplexMatrix& state);

  std::size_t dim_in() const { return dim_in_; }
  std::size_t dim_out() const { return dim_out_; }
  const ComplexMatrix& matrix() const { return matrix_; }
  bool completely_positive() const { return cp_; }
  bool trace_preserving() const { return tp_; }

  ComplexMatrix apply(const ComplexMatrix& x) const;
  /// sum_ij |i><j| kron Lambda(|i><j|), a (dim_in*dim_out)-square matrix.
  ComplexMatrix choi() const;

 private:
  Superoperator(std::size_t dim_in, std::size_t dim_out, ComplexMatrix matrix, bool cp, bool tp)
      : dim_in_(dim_in), dim_out_(dim_out), matrix_(std::move(matrix)), cp_(cp), tp_(tp) {}

  std::size_t dim_in_ = 0;
  std::size_t dim_out_ = 0;
  ComplexMatrix matrix_;
  bool cp_ = false;
  bool tp_ = false;
};

double min_choi_eigenvalue(const Superoperator& map);
bool is_completely_positive(const Superoperator& map, double tol = kCompletePositivityTolerance);
bool is_trace_preserving(const Superoperator& map, double tol = kTracePreservationTolerance);

/// Applies `map` (acting on the leftmost factor of dimension map.dim_in())
/// to an operator on S kron E, leaving E untouched.
ComplexMatrix apply_to_system(const Superoperator& map, const ComplexMatrix& joint,
                              std::size_t dim_env);

struct ObservableOutcome {
  double eigenvalue = 0.0;
  ComplexMatrix projector;
  std::size_t rank = 0;
};

/// Projective decomposition R = sum_r r P_r. Projectors are Hermitian,
/// idempotent, mutually orthogonal and sum to the identity.
class Observable {
 public:
  /// Validates the projector algebra; throws InvalidStateError on failure.
  static Observable from_projectors(std::vector<std::pair<double, ComplexMatrix>> outcomes);
  /// Groups eigenvectors of a Hermitian matrix whose eigenvalues agree within
  /// `tol` into one projector. Outcomes are listed by ascending eigenvalue.
  static Observable from_hermitian(const ComplexMatrix& hermitian, double tol = 1e-9);
  /// Rank-1 projectors onto the columns of `basis` (a unitary); outcome r has
  /// eigenvalue eigenvalues[r].
  static Observable from_basis(const ComplexMatrix& basis, std::span<const double> eigenvalues);
  /// Projectors onto the computational basis with eigenvalues 0, 1, ..., d-1.
  static Observable computational(std::size_t dim);
  /// sigma_z with outcome 0 = up (|0>, +1) and outcome 1 = down (|1>, -1).
  static Observable sigma_z();
  /// sigma_x with outcome 0 = |+> (+1) and outcome 1 = |-> (-1).
  static Observable sigma_x();
  /// P_r kron I for every outcome of `local`; degenerate whenever dim_right > 1.
  static Observable embed_left(const Observable& local, std::size_t dim_right);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return outcomes_.size(); }
  const ObservableOutcome& outcome(std::size_t r) const;
  const std::vector<ObservableOutcome>& outcomes() const { return outcomes_; }
  bool is_degenerate() const;

 private:
  Observable(std::size_t dim, std::vector<ObservableOutcome> outcomes)
      : dim_(dim), outcomes_(std::move(outcomes)) {}

  std::size_t dim_ = 0;
  std::vector<ObservableOutcome> outcomes_;
};

/// Throws NotUnitaryError when u is not unitary within 1e-10.
Superoperator unitary_channel(const ComplexMatrix& u);
/// rho -> P_r rho P_r. CP, trace non-increasing.
Superoperator projector_superop(const Observable& obs, std::size_t outcome);
/// Sum of the projector superoperators of `obs`.
Superoperator dephasing_channel(const Observable& obs);
/// a after b (matrix product a.matrix() * b.matrix()). Flags conjoin.
Superoperator compose(const Superoperator& a, const Superoperator& b);
Superoperator add(const Superoperator& a, const Superoperator& b);
double condition_number(const Superoperator& map);
/// Throws NotInvertibleError when the map is singular, non-square or its
/// condition number exceeds `max_condition`.
Superoperator invert(const Superoperator& map, double max_condition = kMaxConditionNumber);

/// Superoperator re-expressed in the operator basis ordered populations first
/// (|r><r| by ascending eigenvalue, ties in construction order) followed by
/// coherences |r><r'| (r != r') in lexicographic order of that ordering.
struct OrderedBlocks {
  RealMatrix populations;          ///< A: populations -> populations
  ComplexMatrix coherence_to_pop;  ///< B: coherences -> populations
  ComplexMatrix pop_to_coherence;  ///< C: populations -> coherences
  ComplexMatrix coherences;        ///< D: coherences -> coherences
  ComplexMatrix full;              ///< [[A, B], [C, D]]
};

/// Throws DegenerateObservableError for degenerate observables and
/// DimensionError when dimensions disagree.
OrderedBlocks ordered_basis_matrix(const Superoperator& map, const Observable& obs_in,
                                   const Observable& obs_out);

}  // namespace qclassical
