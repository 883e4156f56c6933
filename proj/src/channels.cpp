#include "qclassical/channels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "qclassical/errors.hpp"

namespace qclassical {

namespace {

Eigen::Index idx(std::size_t n) { return static_cast<Eigen::Index>(n); }

std::size_t numeric_rank(const ComplexMatrix& projector) {
  // Trace of an idempotent Hermitian matrix is its rank.
  return static_cast<std::size_t>(std::llround(projector.trace().real()));
}

}  // namespace

ComplexVector vectorize(const ComplexMatrix& x) {
  ComplexVector v(x.size());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      v(i + j * x.rows()) = x(i, j);
    }
  }
  return v;
}

ComplexMatrix unvectorize(const ComplexVector& v, std::size_t rows, std::size_t cols) {
  if (static_cast<std::size_t>(v.size()) != rows * cols) {
    throw DimensionError("unvectorize: length mismatch");
  }
  ComplexMatrix x(idx(rows), idx(cols));
  for (Eigen::Index j = 0; j < idx(cols); ++j) {
    for (Eigen::Index i = 0; i < idx(rows); ++i) {
      x(i, j) = v(i + j * idx(rows));
    }
  }
  return x;
}

Superoperator Superoperator::from_matrix(std::size_t dim_in, std::size_t dim_out,
                                         ComplexMatrix matrix) {
  Superoperator s = with_flags(dim_in, dim_out, std::move(matrix), false, false);
  s.cp_ = is_completely_positive(s);
  s.tp_ = is_trace_preserving(s);
  return s;
}

Superoperator Superoperator::with_flags(std::size_t dim_in, std::size_t dim_out,
                                        ComplexMatrix matrix, bool completely_positive,
                                        bool trace_preserving) {
  if (dim_in == 0 || dim_out == 0) {
    throw DimensionError("Superoperator: zero dimension");
  }
  if (matrix.rows() != idx(dim_out * dim_out) || matrix.cols() != idx(dim_in * dim_in)) {
    throw DimensionError("Superoperator: matrix is " + std::to_string(matrix.rows()) + "x" +
                         std::to_string(matrix.cols()) + ", expected " +
                         std::to_string(dim_out * dim_out) + "x" +
                         std::to_string(dim_in * dim_in));
  }
  if (!is_finite(matrix)) {
    throw DimensionError("Superoperator: non-finite entry");
  }
  return Superoperator(dim_in, dim_out, std::move(matrix), completely_positive, trace_preserving);
}

Superoperator Superoperator::from_kraus(std::span<const ComplexMatrix> kraus) {
  if (kraus.empty()) {
    throw DimensionError("from_kraus: empty Kraus list");
  }
  const Eigen::Index din = kraus.front().cols();
  const Eigen::Index dout = kraus.front().rows();
  ComplexMatrix m = ComplexMatrix::Zero(dout * dout, din * din);
  for (const ComplexMatrix& k : kraus) {
    if (k.rows() != dout || k.cols() != din) {
      throw DimensionError("from_kraus: inconsistent Kraus operator shapes");
    }
    m += tensor_product(k.conjugate(), k);
  }
  Superoperator s = with_flags(static_cast<std::size_t>(din), static_cast<std::size_t>(dout),
                               std::move(m), true, false);
  s.tp_ = is_trace_preserving(s);
  return s;
}

Superoperator Superoperator::identity(std::size_t dim) {
  return with_flags(dim, dim, qclassical::identity(dim * dim), true, true);
}

Superoperator Superoperator::replacement(std::size_t dim_in, const ComplexMatrix& state) {
  if (!is_square(state) || state.rows() < 1) {
    throw DimensionError("replacement: state must be square");
  }
  const ComplexVector target = vectorize(state);
  const ComplexVector trace_functional = vectorize(qclassical::identity(dim_in));
  ComplexMatrix m = target * trace_functional.transpose();
  return from_matrix(dim_in, static_cast<std::size_t>(state.rows()), std::move(m));
}

ComplexMatrix Superoperator::apply(const ComplexMatrix& x) const {
  if (x.rows() != idx(dim_in_) || x.cols() != idx(dim_in_)) {
    throw DimensionError("Superoperator::apply: operand is " + std::to_string(x.rows()) + "x" +
                         std::to_string(x.cols()) + ", map expects " + std::to_string(dim_in_));
  }
  return unvectorize(matrix_ * vectorize(x), dim_out_, dim_out_);
}

ComplexMatrix Superoperator::choi() const {
  const Eigen::Index din = idx(dim_in_);
  const Eigen::Index dout = idx(dim_out_);
  ComplexMatrix j = ComplexMatrix::Zero(din * dout, din * dout);
  for (Eigen::Index a = 0; a < din; ++a) {
    for (Eigen::Index b = 0; b < din; ++b) {
      // Column of the map matrix for input |a><b| is a + b*din.
      const ComplexMatrix image = unvectorize(matrix_.col(a + b * din), dim_out_, dim_out_);
      j.block(a * dout, b * dout, dout, dout) = image;
    }
  }
  return j;
}

double min_choi_eigenvalue(const Superoperator& map) {
  return hermitian_eigenvalues(map.choi()).minCoeff();
}

bool is_completely_positive(const Superoperator& map, double tol) {
  const ComplexMatrix j = map.choi();
  if (hermitian_defect(j) > 1e-9) return false;
  return hermitian_eigenvalues(j).minCoeff() >= -tol;
}

bool is_trace_preserving(const Superoperator& map, double tol) {
  const Eigen::Index din = idx(map.dim_in());
  const Eigen::Index dout = idx(map.dim_out());
  const ComplexMatrix& m = map.matrix();
  for (Eigen::Index col = 0; col < din * din; ++col) {
    Complex tr = 0.0;
    for (Eigen::Index k = 0; k < dout; ++k) tr += m(k + k * dout, col);
    const Eigen::Index a = col % din;
    const Eigen::Index b = col / din;
    const double expected = (a == b) ? 1.0 : 0.0;
    if (std::abs(tr - expected) > tol) return false;
  }
  return true;
}

ComplexMatrix apply_to_system(const Superoperator& map, const ComplexMatrix& joint,
                              std::size_t dim_env) {
  const Eigen::Index din = idx(map.dim_in());
  const Eigen::Index dout = idx(map.dim_out());
  const Eigen::Index de = idx(dim_env);
  if (joint.rows() != din * de || joint.cols() != din * de) {
    throw DimensionError("apply_to_system: joint operator has wrong dimension");
  }
  if (de == 1) return map.apply(joint);
  const ComplexMatrix& m = map.matrix();
  ComplexMatrix out = ComplexMatrix::Zero(dout * de, dout * de);
  // out[(a,e),(a',e')] = sum_{s,s'} M(a + a' dout, s + s' din) joint[(s,e),(s',e')]
  for (Eigen::Index s = 0; s < din; ++s) {
    for (Eigen::Index sp = 0; sp < din; ++sp) {
      const auto in_block = joint.block(s * de, sp * de, de, de);
      if (in_block.cwiseAbs().maxCoeff() == 0.0) continue;
      const Eigen::Index col = s + sp * din;
      for (Eigen::Index a = 0; a < dout; ++a) {
        for (Eigen::Index ap = 0; ap < dout; ++ap) {
          const Complex c = m(a + ap * dout, col);
          if (c == Complex(0.0, 0.0)) continue;
          out.block(a * de, ap * de, de, de) += c * in_block;
        }
      }
    }
  }
  return out;
}

Observable Observable::from_projectors(std::vector<std::pair<double, ComplexMatrix>> outcomes) {
  if (outcomes.empty()) {
    throw InvalidStateError("Observable: no outcomes");
  }
  const Eigen::Index d = outcomes.front().second.rows();
  if (d < 1) throw InvalidStateError("Observable: empty projector");
  std::vector<ObservableOutcome> list;
  ComplexMatrix total = ComplexMatrix::Zero(d, d);
  for (auto& [value, p] : outcomes) {
    if (p.rows() != d || p.cols() != d) {
      throw DimensionError("Observable: projectors have inconsistent dimensions");
    }
    if (!std::isfinite(value) || !is_finite(p)) {
      throw InvalidStateError("Observable: non-finite entry");
    }
    if (hermitian_defect(p) > kProjectorTolerance) {
      throw InvalidStateError("Observable: projector not Hermitian");
    }
    if (max_abs_entry(p * p - p) > kProjectorTolerance) {
      throw InvalidStateError("Observable: projector not idempotent");
    }
    const std::size_t rank = numeric_rank(p);
    if (rank < 1) throw InvalidStateError("Observable: zero projector");
    for (const ObservableOutcome& other : list) {
      if (max_abs_entry(other.projector * p) > kProjectorTolerance) {
        throw InvalidStateError("Observable: projectors not mutually orthogonal");
      }
    }
    total += p;
    list.push_back({value, std::move(p), rank});
  }
  if (max_abs_entry(total - ComplexMatrix::Identity(d, d)) > kProjectorTolerance) {
    throw InvalidStateError("Observable: projectors do not sum to the identity");
  }
  return Observable(static_cast<std::size_t>(d), std::move(list));
}

Observable Observable::from_hermitian(const ComplexMatrix& hermitian, double tol) {
  if (!is_square(hermitian) || hermitian_defect(hermitian) > kHermitianTolerance) {
    throw InvalidStateError("Observable::from_hermitian: matrix not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(0.5 * (hermitian + hermitian.adjoint()));
  const RealVector& values = solver.eigenvalues();
  const ComplexMatrix& vectors = solver.eigenvectors();
  std::vector<std::pair<double, ComplexMatrix>> outcomes;
  Eigen::Index start = 0;
  while (start < values.size()) {
    Eigen::Index end = start + 1;
    while (end < values.size() && values(end) - values(start) <= tol) ++end;
    const auto block = vectors.middleCols(start, end - start);
    ComplexMatrix p = block * block.adjoint();
    p = 0.5 * (p + p.adjoint()).eval();
    outcomes.emplace_back(values.segment(start, end - start).mean(), std::move(p));
    start = end;
  }
  return from_projectors(std::move(outcomes));
}

Observable Observable::from_basis(const ComplexMatrix& basis, std::span<const double> eigenvalues) {
  if (!is_unitary(basis, 1e-9)) {
    throw NotUnitaryError("Observable::from_basis: basis matrix is not unitary");
  }
  if (static_cast<Eigen::Index>(eigenvalues.size()) != basis.cols()) {
    throw DimensionError("Observable::from_basis: eigenvalue count mismatch");
  }
  std::vector<std::pair<double, ComplexMatrix>> outcomes;
  for (Eigen::Index c = 0; c < basis.cols(); ++c) {
    const ComplexVector v = basis.col(c);
    outcomes.emplace_back(eigenvalues[static_cast<std::size_t>(c)], outer(v));
  }
  return from_projectors(std::move(outcomes));
}

Observable Observable::computational(std::size_t dim) {
  std::vector<double> values(dim);
  std::iota(values.begin(), values.end(), 0.0);
  return from_basis(qclassical::identity(dim), values);
}

Observable Observable::sigma_z() {
  const double values[] = {1.0, -1.0};
  return from_basis(qclassical::identity(2), values);
}

Observable Observable::sigma_x() {
  ComplexMatrix basis(2, 2);
  const double h = 1.0 / std::sqrt(2.0);
  basis << h, h, h, -h;
  const double values[] = {1.0, -1.0};
  return from_basis(basis, values);
}

Observable Observable::embed_left(const Observable& local, std::size_t dim_right) {
  std::vector<std::pair<double, ComplexMatrix>> outcomes;
  for (const ObservableOutcome& o : local.outcomes()) {
    outcomes.emplace_back(o.eigenvalue, tensor_product(o.projector, qclassical::identity(dim_right)));
  }
  return from_projectors(std::move(outcomes));
}

const ObservableOutcome& Observable::outcome(std::size_t r) const {
  if (r >= outcomes_.size()) {
    throw IndexError("outcome index " + std::to_string(r) + " out of range (" +
                     std::to_string(outcomes_.size()) + " outcomes)");
  }
  return outcomes_[r];
}

bool Observable::is_degenerate() const {
  return std::any_of(outcomes_.begin(), outcomes_.end(),
                     [](const ObservableOutcome& o) { return o.rank > 1; });
}

Superoperator unitary_channel(const ComplexMatrix& u) {
  if (!is_unitary(u)) {
    throw NotUnitaryError("unitary_channel: matrix is not unitary within 1e-10");
  }
  const auto d = static_cast<std::size_t>(u.rows());
  return Superoperator::with_flags(d, d, tensor_product(u.conjugate(), u), true, true);
}

Superoperator projector_superop(const Observable& obs, std::size_t outcome) {
  const ComplexMatrix& p = obs.outcome(outcome).projector;
  const bool tp = obs.size() == 1;
  return Superoperator::with_flags(obs.dim(), obs.dim(), tensor_product(p.conjugate(), p), true,
                                   tp);
}

Superoperator dephasing_channel(const Observable& obs) {
  const Eigen::Index d2 = idx(obs.dim() * obs.dim());
  ComplexMatrix m = ComplexMatrix::Zero(d2, d2);
  for (std::size_t r = 0; r < obs.size(); ++r) {
    m += projector_superop(obs, r).matrix();
  }
  return Superoperator::with_flags(obs.dim(), obs.dim(), std::move(m), true, true);
}

Superoperator compose(const Superoperator& a, const Superoperator& b) {
  if (b.dim_out() != a.dim_in()) {
    throw DimensionError("compose: inner dimensions " + std::to_string(b.dim_out()) + " and " +
                         std::to_string(a.dim_in()) + " differ");
  }
  return Superoperator::with_flags(b.dim_in(), a.dim_out(), a.matrix() * b.matrix(),
                                   a.completely_positive() && b.completely_positive(),
                                   a.trace_preserving() && b.trace_preserving());
}

Superoperator add(const Superoperator& a, const Superoperator& b) {
  if (a.dim_in() != b.dim_in() || a.dim_out() != b.dim_out()) {
    throw DimensionError("add: superoperators have different shapes");
  }
  return Superoperator::with_flags(a.dim_in(), a.dim_out(), a.matrix() + b.matrix(),
                                   a.completely_positive() && b.completely_positive(), false);
}

double condition_number(const Superoperator& map) {
  Eigen::JacobiSVD<ComplexMatrix> svd(map.matrix());
  const RealVector& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  if (!(smin > 0.0)) return INFINITY;
  return s(0) / smin;
}

Superoperator invert(const Superoperator& map, double max_condition) {
  if (map.dim_in() != map.dim_out()) {
    throw NotInvertibleError("invert: map changes dimension");
  }
  Eigen::JacobiSVD<ComplexMatrix> svd(map.matrix(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  const RealVector& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  if (!(smin > 0.0) || s(0) / smin > max_condition) {
    throw NotInvertibleError("invert: condition number " +
                             (smin > 0.0 ? std::to_string(s(0) / smin) : std::string("inf")) +
                             " exceeds " + std::to_string(max_condition));
  }
  ComplexMatrix inverse =
      svd.matrixV() * s.cwiseInverse().cast<Complex>().asDiagonal() * svd.matrixU().adjoint();
  Superoperator out = Superoperator::from_matrix(map.dim_in(), map.dim_out(), std::move(inverse));
  return out;
}

OrderedBlocks ordered_basis_matrix(const Superoperator& map, const Observable& obs_in,
                                   const Observable& obs_out) {
  if (obs_in.is_degenerate() || obs_out.is_degenerate()) {
    throw DegenerateObservableError(
        "ordered_basis_matrix: block form is defined for rank-1 observables only");
  }
  if (obs_in.dim() != map.dim_in() || obs_out.dim() != map.dim_out()) {
    throw DimensionError("ordered_basis_matrix: observable dimensions do not match the map");
  }
  auto sorted_vectors = [](const Observable& obs) {
    std::vector<std::size_t> order(obs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return obs.outcome(a).eigenvalue < obs.outcome(b).eigenvalue;
    });
    std::vector<ComplexVector> vectors;
    for (std::size_t r : order) {
      // Rank-1 projector: any non-zero column, normalised, spans it.
      const ComplexMatrix& p = obs.outcome(r).projector;
      Eigen::Index best = 0;
      p.colwise().norm().maxCoeff(&best);
      ComplexVector v = p.col(best);
      vectors.push_back(v / v.norm());
    }
    return vectors;
  };
  // Basis operators |r><r'| listed populations first, then coherences.
  auto basis_pairs = [](std::size_t d) {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t r = 0; r < d; ++r) pairs.emplace_back(r, r);
    for (std::size_t r = 0; r < d; ++r) {
      for (std::size_t rp = 0; rp < d; ++rp) {
        if (r != rp) pairs.emplace_back(r, rp);
      }
    }
    return pairs;
  };

  const auto in_vectors = sorted_vectors(obs_in);
  const auto out_vectors = sorted_vectors(obs_out);
  const auto in_pairs = basis_pairs(obs_in.dim());
  const auto out_pairs = basis_pairs(obs_out.dim());

  const Eigen::Index nin = idx(in_pairs.size());
  const Eigen::Index nout = idx(out_pairs.size());
  ComplexMatrix full(nout, nin);
  for (Eigen::Index c = 0; c < nin; ++c) {
    const auto [r, rp] = in_pairs[static_cast<std::size_t>(c)];
    const ComplexMatrix input = in_vectors[r] * in_vectors[rp].adjoint();
    const ComplexMatrix image = map.apply(input);
    for (Eigen::Index row = 0; row < nout; ++row) {
      const auto [s, sp] = out_pairs[static_cast<std::size_t>(row)];
      // Hilbert-Schmidt coefficient of |s><s'| in the image.
      full(row, c) = out_vectors[s].dot(image * out_vectors[sp]);
    }
  }

  const Eigen::Index pin = idx(obs_in.dim());
  const Eigen::Index pout = idx(obs_out.dim());
  OrderedBlocks blocks;
  blocks.populations = full.topLeftCorner(pout, pin).real();
  blocks.coherence_to_pop = full.topRightCorner(pout, nin - pin);
  blocks.pop_to_coherence = full.bottomLeftCorner(nout - pout, pin);
  blocks.coherences = full.bottomRightCorner(nout - pout, nin - pin);
  blocks.full = std::move(full);
  return blocks;
}

}  // namespace qclassical
