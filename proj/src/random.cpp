#include "qclassical/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "qclassical/errors.hpp"

namespace qclassical {

namespace {

Eigen::Index idx(std::size_t n) { return static_cast<Eigen::Index>(n); }

ComplexMatrix ginibre(std::size_t rows, std::size_t cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  ComplexMatrix g(idx(rows), idx(cols));
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      g(i, j) = Complex(re, im);
    }
  }
  return g;
}

double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

/// sum_r <psi_r| X |psi_r> |target_r><target_r| with psi_r the columns of
/// `measure_basis`, target_r the columns of `prepare_basis` permuted by `perm`.
Superoperator measure_and_prepare(const ComplexMatrix& measure_basis,
                                  const std::vector<ComplexMatrix>& prepared_states) {
  std::vector<ComplexMatrix> kraus;
  const Eigen::Index d = measure_basis.rows();
  for (Eigen::Index r = 0; r < d; ++r) {
    // rho_r = sum_k lambda_k |phi_k><phi_k|; Kraus sqrt(lambda_k) |phi_k><psi_r|.
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(prepared_states[static_cast<std::size_t>(r)]);
    for (Eigen::Index k = 0; k < d; ++k) {
      const double lambda = std::max(0.0, solver.eigenvalues()(k));
      if (lambda <= 0.0) continue;
      kraus.push_back(std::sqrt(lambda) * solver.eigenvectors().col(k) *
                      measure_basis.col(r).adjoint());
    }
  }
  return Superoperator::from_kraus(kraus);
}

Superoperator phase_permutation_mixture(std::size_t dim, std::size_t terms, Rng& rng) {
  std::vector<double> w(terms);
  for (double& x : w) x = -std::log(std::max(uniform01(rng), 1e-300));
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  std::vector<ComplexMatrix> kraus;
  for (std::size_t i = 0; i < terms; ++i) {
    kraus.push_back(std::sqrt(w[i] / total) * random_phase_permutation(dim, rng));
  }
  return Superoperator::from_kraus(kraus);
}

Superoperator mix(const Superoperator& a, const Superoperator& b, double p) {
  return Superoperator::with_flags(a.dim_in(), a.dim_out(), p * a.matrix() + (1.0 - p) * b.matrix(),
                                   true, true);
}

}  // namespace

ComplexMatrix haar_unitary(std::size_t dim, Rng& rng) {
  const ComplexMatrix g = ginibre(dim, dim, rng);
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(idx(dim), idx(dim));
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < idx(dim); ++i) {
    const Complex diag = r(i, i);
    const double mag = std::abs(diag);
    if (mag > 0.0) q.col(i) *= diag / mag;
  }
  return q;
}

DensityMatrix random_density_matrix(std::size_t dim, Rng& rng) {
  const ComplexMatrix g = ginibre(dim, dim, rng);
  ComplexMatrix rho = g * g.adjoint();
  rho /= rho.trace();
  rho = (0.5 * (rho + rho.adjoint())).eval();
  return DensityMatrix::from_matrix(std::move(rho));
}

DensityMatrix random_pure_state(std::size_t dim, Rng& rng) {
  const ComplexMatrix g = ginibre(dim, 1, rng);
  return DensityMatrix::pure(g.col(0));
}

Superoperator random_cptp(std::size_t dim, Rng& rng) {
  const ComplexMatrix u = haar_unitary(dim * dim, rng);
  std::vector<ComplexMatrix> kraus;
  kraus.reserve(dim);
  // Joint index (s, a) -> s*dim + a with the ancilla on the right, prepared in |0>.
  for (std::size_t a = 0; a < dim; ++a) {
    ComplexMatrix k(idx(dim), idx(dim));
    for (std::size_t s_out = 0; s_out < dim; ++s_out) {
      for (std::size_t s_in = 0; s_in < dim; ++s_in) {
        k(idx(s_out), idx(s_in)) = u(idx(s_out * dim + a), idx(s_in * dim));
      }
    }
    kraus.push_back(std::move(k));
  }
  Superoperator map = Superoperator::from_kraus(kraus);
  return Superoperator::with_flags(dim, dim, map.matrix(), true, true);
}

ComplexMatrix random_phase_permutation(std::size_t dim, Rng& rng) {
  std::vector<std::size_t> perm(dim);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  ComplexMatrix m = ComplexMatrix::Zero(idx(dim), idx(dim));
  for (std::size_t c = 0; c < dim; ++c) {
    const double phase = 2.0 * std::numbers::pi * uniform01(rng);
    m(idx(perm[c]), idx(c)) = std::polar(1.0, phase);
  }
  return m;
}

RealMatrix random_stochastic_matrix(std::size_t dim, Rng& rng) {
  RealMatrix m(idx(dim), idx(dim));
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      m(r, c) = -std::log(std::max(uniform01(rng), 1e-300));
    }
    m.col(c) /= m.col(c).sum();
  }
  return m;
}

Superoperator rotate_map(const Superoperator& map, const ComplexMatrix& basis) {
  const Superoperator to = unitary_channel(basis);
  const Superoperator from = unitary_channel(basis.adjoint());
  const Superoperator out = compose(to, compose(map, from));
  return Superoperator::with_flags(map.dim_in(), map.dim_out(), out.matrix(),
                                   map.completely_positive(), map.trace_preserving());
}

Superoperator random_block_triangular_map(std::size_t dim, const ComplexMatrix& basis, Rng& rng,
                                          bool invertible) {
  const ComplexMatrix id = identity(dim);
  for (int attempt = 0; attempt < 100; ++attempt) {
    // Measure in the basis, prepare arbitrary (possibly coherent) states.
    std::vector<ComplexMatrix> prepared;
    for (std::size_t r = 0; r < dim; ++r) prepared.push_back(random_density_matrix(dim, rng).matrix());
    const Superoperator classical = measure_and_prepare(id, prepared);
    const Superoperator unitaries = phase_permutation_mixture(dim, 1 + dim, rng);
    const double p = 0.8 * uniform01(rng);
    const Superoperator local = mix(classical, unitaries, p);
    if (invertible && condition_number(local) > 1e6) continue;
    return rotate_map(local, basis);
  }
  throw Error("random_block_triangular_map: could not draw a well-conditioned map");
}

Superoperator random_noncreating_map(std::size_t dim, const ComplexMatrix& basis, Rng& rng) {
  const ComplexMatrix id = identity(dim);
  const ComplexMatrix measure_basis = haar_unitary(dim, rng);
  std::vector<ComplexMatrix> prepared;
  const ComplexMatrix perm = random_phase_permutation(dim, rng);
  for (std::size_t r = 0; r < dim; ++r) {
    const ComplexVector target = perm.col(idx(r));
    prepared.push_back(outer(target));
  }
  const Superoperator detector = measure_and_prepare(measure_basis, prepared);
  const Superoperator unitaries = phase_permutation_mixture(dim, 1 + dim, rng);
  const double p = 0.2 + 0.6 * uniform01(rng);
  (void)id;
  return rotate_map(mix(detector, unitaries, p), basis);
}

DilatedProcess random_dilated_process(std::size_t dim_s, std::size_t dim_e, std::size_t steps,
                                      Rng& rng) {
  const DensityMatrix rho_s = random_density_matrix(dim_s, rng);
  const DensityMatrix rho_e = random_density_matrix(dim_e, rng);
  std::vector<ComplexMatrix> unitaries;
  for (std::size_t k = 0; k < steps; ++k) unitaries.push_back(haar_unitary(dim_s * dim_e, rng));
  ComplexMatrix joint = tensor_product(rho_s.matrix(), rho_e.matrix());
  joint = (0.5 * (joint + joint.adjoint())).eval();
  return DilatedProcess(dim_s, dim_e, DensityMatrix::from_matrix(std::move(joint)),
                        std::move(unitaries));
}

DilatedProcess random_controlled_permutation_process(std::size_t dim_s, std::size_t dim_e,
                                                     std::size_t steps, const ComplexMatrix& basis,
                                                     Rng& rng) {
  const DensityMatrix rho_s = random_density_matrix(dim_s, rng);
  const DensityMatrix rho_e = random_density_matrix(dim_e, rng);
  std::vector<ComplexMatrix> unitaries;
  for (std::size_t k = 0; k < steps; ++k) {
    ComplexMatrix u = ComplexMatrix::Zero(idx(dim_s * dim_e), idx(dim_s * dim_e));
    for (std::size_t e = 0; e < dim_e; ++e) {
      const ComplexMatrix local = basis * random_phase_permutation(dim_s, rng) * basis.adjoint();
      u += tensor_product(local, matrix_unit(dim_e, e, e));
    }
    unitaries.push_back(std::move(u));
  }
  ComplexMatrix joint = tensor_product(rho_s.matrix(), rho_e.matrix());
  joint = (0.5 * (joint + joint.adjoint())).eval();
  return DilatedProcess(dim_s, dim_e, DensityMatrix::from_matrix(std::move(joint)),
                        std::move(unitaries));
}

}  // namespace qclassical
