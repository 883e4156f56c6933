#include "qclassical/linalg.hpp"

#include <cmath>
#include <string>

#include "qclassical/errors.hpp"

namespace qclassical {

namespace {

Eigen::Index as_index(std::size_t n) { return static_cast<Eigen::Index>(n); }

void check_state_common(const ComplexMatrix& m, const char* what) {
  if (m.rows() < 1 || !is_square(m)) {
    throw InvalidStateError(std::string(what) + ": matrix must be square and non-empty");
  }
  if (!is_finite(m)) {
    throw InvalidStateError(std::string(what) + ": non-finite entry");
  }
  if (hermitian_defect(m) > kHermitianTolerance) {
    throw InvalidStateError(std::string(what) + ": not Hermitian");
  }
}

}  // namespace

ComplexMatrix identity(std::size_t dim) {
  return ComplexMatrix::Identity(as_index(dim), as_index(dim));
}

ComplexMatrix pauli_x() {
  ComplexMatrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}

ComplexMatrix pauli_y() {
  ComplexMatrix m(2, 2);
  m << 0.0, Complex(0.0, -1.0), Complex(0.0, 1.0), 0.0;
  return m;
}

ComplexMatrix pauli_z() {
  ComplexMatrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}

ComplexVector basis_ket(std::size_t dim, std::size_t index) {
  if (index >= dim) {
    throw IndexError("basis index " + std::to_string(index) + " out of range for dimension " +
                     std::to_string(dim));
  }
  ComplexVector v = ComplexVector::Zero(as_index(dim));
  v(as_index(index)) = 1.0;
  return v;
}

ComplexMatrix outer(const ComplexVector& psi) { return psi * psi.adjoint(); }

ComplexMatrix matrix_unit(std::size_t dim, std::size_t row, std::size_t col) {
  if (row >= dim || col >= dim) {
    throw IndexError("matrix unit index out of range");
  }
  ComplexMatrix m = ComplexMatrix::Zero(as_index(dim), as_index(dim));
  m(as_index(row), as_index(col)) = 1.0;
  return m;
}

ComplexMatrix tensor_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  const Eigen::Index rb = b.rows();
  const Eigen::Index cb = b.cols();
  ComplexMatrix out(a.rows() * rb, a.cols() * cb);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * rb, j * cb, rb, cb) = a(i, j) * b;
    }
  }
  return out;
}

ComplexMatrix partial_trace(const ComplexMatrix& m, std::size_t dim_a, std::size_t dim_b,
                            Subsystem keep) {
  const Eigen::Index da = as_index(dim_a);
  const Eigen::Index db = as_index(dim_b);
  if (dim_a == 0 || dim_b == 0 || m.rows() != da * db || m.cols() != da * db) {
    throw DimensionError("partial_trace: matrix is " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()) + ", expected " +
                         std::to_string(dim_a * dim_b) + " square");
  }
  if (keep == Subsystem::A) {
    ComplexMatrix out = ComplexMatrix::Zero(da, da);
    for (Eigen::Index i = 0; i < da; ++i) {
      for (Eigen::Index j = 0; j < da; ++j) {
        out(i, j) = m.block(i * db, j * db, db, db).trace();
      }
    }
    return out;
  }
  ComplexMatrix out = ComplexMatrix::Zero(db, db);
  for (Eigen::Index i = 0; i < da; ++i) {
    out += m.block(i * db, i * db, db, db);
  }
  return out;
}

double max_abs_entry(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

double hermitian_defect(const ComplexMatrix& m) {
  if (!is_square(m)) return INFINITY;
  return max_abs_entry(m - m.adjoint());
}

bool is_finite(const ComplexMatrix& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const Complex z = m.data()[i];
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  }
  return true;
}

bool is_square(const ComplexMatrix& m) { return m.rows() == m.cols(); }

bool is_unitary(const ComplexMatrix& u, double tol) {
  if (u.rows() < 1 || !is_square(u) || !is_finite(u)) return false;
  const ComplexMatrix defect = u.adjoint() * u - ComplexMatrix::Identity(u.rows(), u.cols());
  return max_abs_entry(defect) <= tol;
}

RealVector hermitian_eigenvalues(const ComplexMatrix& m) {
  const ComplexMatrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

double trace_norm(const ComplexMatrix& m) {
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  return svd.singularValues().sum();
}

DensityMatrix DensityMatrix::from_matrix(ComplexMatrix m) {
  check_state_common(m, "DensityMatrix");
  const Complex tr = m.trace();
  if (std::abs(tr - Complex(1.0, 0.0)) > kTraceTolerance) {
    throw InvalidStateError("DensityMatrix: trace " + std::to_string(tr.real()) + " != 1");
  }
  if (hermitian_eigenvalues(m).minCoeff() < -kPositivityTolerance) {
    throw InvalidStateError("DensityMatrix: negative eigenvalue");
  }
  return DensityMatrix(std::move(m));
}

DensityMatrix DensityMatrix::maximally_mixed(std::size_t dim) {
  return DensityMatrix(identity(dim) / static_cast<double>(dim));
}

DensityMatrix DensityMatrix::pure(const ComplexVector& psi) {
  const double n = psi.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw InvalidStateError("DensityMatrix::pure: zero or non-finite vector");
  }
  const ComplexVector unit = psi / n;
  return DensityMatrix(outer(unit));
}

SubnormalizedState SubnormalizedState::from_matrix(ComplexMatrix m) {
  SubnormalizedState s = from_cp_output(std::move(m));
  if (hermitian_eigenvalues(s.matrix_).minCoeff() < -kPositivityTolerance) {
    throw InvalidStateError("SubnormalizedState: negative eigenvalue");
  }
  return s;
}

SubnormalizedState SubnormalizedState::from_cp_output(ComplexMatrix m) {
  check_state_common(m, "SubnormalizedState");
  const double tr = m.trace().real();
  if (tr < -kTraceTolerance || tr > 1.0 + kTraceTolerance) {
    throw InvalidStateError("SubnormalizedState: trace " + std::to_string(tr) +
                            " outside [0, 1]");
  }
  return SubnormalizedState(std::move(m), tr);
}

double trace_distance(const SubnormalizedState& a, const SubnormalizedState& b) {
  return trace_distance(a.matrix(), b.matrix());
}

double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("trace_distance: operands have different dimensions");
  }
  return 0.5 * hermitian_eigenvalues(a - b).cwiseAbs().sum();
}

}  // namespace qclassical
