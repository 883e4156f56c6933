#pragma once

// Dense complex linear algebra shared by every other module: tensor
// products, partial traces, distances and validated state types.
//
// Subsystem ordering: the leftmost tensor factor is the system S (or qubit A).

#include <complex>
#include <cstddef>

#include <Eigen/Dense>

namespace qclassical {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr double kHermitianTolerance = 1e-10;
inline constexpr double kTraceTolerance = 1e-10;
inline constexpr double kPositivityTolerance = 1e-10;
inline constexpr double kUnitaryTolerance = 1e-10;
/// Two analytic-path states are "equal" below this trace distance.
inline constexpr double kStateEqualityTolerance = 1e-9;
inline constexpr std::size_t kMaxJointDimension = 64;

enum class Subsystem { A, B };

ComplexMatrix identity(std::size_t dim);
ComplexMatrix pauli_x();
ComplexMatrix pauli_y();
ComplexMatrix pauli_z();
/// Computational basis vector |index> in dimension `dim`.
ComplexVector basis_ket(std::size_t dim, std::size_t index);
/// |psi><psi| without normalisation.
ComplexMatrix outer(const ComplexVector& psi);
/// Matrix unit |row><col| in dimension `dim`.
ComplexMatrix matrix_unit(std::size_t dim, std::size_t row, std::size_t col);

ComplexMatrix tensor_product(const ComplexMatrix& a, const ComplexMatrix& b);

/// Traces out one factor of a (dim_a*dim_b)-dimensional operator and returns
/// the factor named by `keep`. Throws DimensionError on a size mismatch.
ComplexMatrix partial_trace(const ComplexMatrix& m, std::size_t dim_a,
                            std::size_t dim_b, Subsystem keep);

double max_abs_entry(const ComplexMatrix& m);
/// max |M - M^dagger| entrywise.
double hermitian_defect(const ComplexMatrix& m);
bool is_finite(const ComplexMatrix& m);
bool is_square(const ComplexMatrix& m);
bool is_unitary(const ComplexMatrix& u, double tol = kUnitaryTolerance);

/// Eigenvalues (ascending) of the Hermitian part of `m`.
RealVector hermitian_eigenvalues(const ComplexMatrix& m);

/// Trace norm of an arbitrary square operator (sum of singular values).
double trace_norm(const ComplexMatrix& m);

/// Unit-trace positive semidefinite operator.
class DensityMatrix {
 public:
  /// Validates Hermiticity, unit trace and positivity; throws
  /// InvalidStateError otherwise.
  static DensityMatrix from_matrix(ComplexMatrix m);
  static DensityMatrix maximally_mixed(std::size_t dim);
  /// Normalises `psi` and returns |psi><psi|.
  static DensityMatrix pure(const ComplexVector& psi);

  std::size_t dim() const { return static_cast<std::size_t>(matrix_.rows()); }
  const ComplexMatrix& matrix() const { return matrix_; }

 private:
  explicit DensityMatrix(ComplexMatrix m) : matrix_(std::move(m)) {}
  ComplexMatrix matrix_;
};

/// Positive semidefinite operator with trace in [0, 1]; the trace is the
/// probability of the conditioning event.
class SubnormalizedState {
 public:
  static SubnormalizedState from_matrix(ComplexMatrix m);
  /// Skips the positivity test; for outputs of CP evaluation paths that are
  /// positive by construction. Hermiticity and trace range are still checked.
  static SubnormalizedState from_cp_output(ComplexMatrix m);

  std::size_t dim() const { return static_cast<std::size_t>(matrix_.rows()); }
  const ComplexMatrix& matrix() const { return matrix_; }
  double norm() const { return norm_; }

 private:
  SubnormalizedState(ComplexMatrix m, double norm)
      : matrix_(std::move(m)), norm_(norm) {}
  ComplexMatrix matrix_;
  double norm_ = 0.0;
};

/// Half the sum of absolute eigenvalues of a - b.
double trace_distance(const SubnormalizedState& a, const SubnormalizedState& b);
double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b);

}  // namespace qclassical
