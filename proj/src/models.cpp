#include "qclassical/models.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "qclassical/errors.hpp"

namespace qclassical {

namespace {

/// Distance below which t is treated as sitting on t = 2s.
bool at_singular_time(double t, double s) {
  return std::abs(t - 2.0 * s) <= 1e-12 * std::max(1.0, std::abs(t));
}

/// The closed form with sign(t - 2s) replaced by `sign`.
double closed_form(double rate, double x0, double s, double t, double sign) {
  const double a = rate * (t - 2.0 * s);
  const double b = rate * t;
  return 0.5 * x0 * (std::cosh(a) + std::cosh(b)) - 0.5 * x0 * (std::sinh(b) + std::sinh(a) / sign);
}

ComplexMatrix z_rotation(double angle) {
  ComplexMatrix u = ComplexMatrix::Zero(2, 2);
  u(0, 0) = std::polar(1.0, -0.5 * angle);
  u(1, 1) = std::polar(1.0, 0.5 * angle);
  return u;
}

ComplexMatrix x_state(double x0) { return 0.5 * (identity(2) + x0 * pauli_x()); }

double sigma_x_expectation(const ComplexMatrix& rho) { return (pauli_x() * rho).trace().real(); }

double real_gcd(double a, double b, double tol) {
  while (b > tol) {
    double r = std::fmod(a, b);
    if (r > b - tol) r = 0.0;
    a = b;
    b = r;
  }
  return a;
}

}  // namespace

void validate(const DephasingModelParams& p) {
  if (!(p.g > 0.0) || !(p.gamma > 0.0)) throw ModelParameterError("g and gamma must be positive");
  if (!(std::abs(p.x0) <= 1.0)) throw ModelParameterError("|x0| must not exceed 1");
  if (!(p.s >= 0.0) || !(p.t >= p.s)) throw ModelParameterError("times must satisfy 0 <= s <= t");
}

double commensurate_step(const std::vector<double>& times) {
  double scale = 0.0;
  for (double t : times) {
    if (!std::isfinite(t)) throw ModelParameterError("non-finite time");
    scale = std::max(scale, std::abs(t));
  }
  if (scale == 0.0) return 1.0;
  const double tol = 1e-9 * scale;
  double step = 0.0;
  for (double t : times) {
    const double a = std::abs(t);
    if (a <= tol) continue;
    step = step == 0.0 ? a : real_gcd(std::max(step, a), std::min(step, a), tol);
  }
  for (double t : times) {
    const double ratio = std::abs(t) / step;
    if (ratio > 1e6 || std::abs(ratio - std::round(ratio)) > 1e-6) {
      throw ModelParameterError("times are not commensurate");
    }
  }
  return step;
}

QuadratureRule lorentzian_rule(double g, double gamma, double step, std::size_t node_count) {
  if (node_count < 64) throw ModelParameterError("quadrature needs at least 64 nodes");
  if (!(g > 0.0) || !(gamma > 0.0) || !(step > 0.0)) {
    throw ModelParameterError("quadrature parameters must be positive");
  }
  const double period = 2.0 * std::numbers::pi / (g * step);
  const double a = gamma * g * step;
  const double rho = std::exp(-a);
  const double one_minus_rho = -std::expm1(-a);
  const double one_minus_rho2 = -std::expm1(-2.0 * a);
  QuadratureRule rule;
  rule.nodes.resize(node_count);
  rule.weights.resize(node_count);
  double total = 0.0;
  for (std::size_t j = 0; j < node_count; ++j) {
    const double x = period * static_cast<double>(j) / static_cast<double>(node_count);
    const double half = std::sin(std::numbers::pi * static_cast<double>(j) /
                                 static_cast<double>(node_count));
    const double w =
        one_minus_rho2 / (one_minus_rho * one_minus_rho + 4.0 * rho * half * half);
    rule.nodes[j] = x;
    rule.weights[j] = w;
    total += w;
  }
  for (double& w : rule.weights) w /= total;
  return rule;
}

DensityMatrix dephasing_reduced_state(const DephasingModelParams& params, const DensityMatrix& rho0) {
  if (rho0.dim() != 2) throw DimensionError("dephasing model acts on a qubit");
  const double decay = std::exp(-params.rate() * params.t);
  const ComplexMatrix z = pauli_z();
  ComplexMatrix rho = 0.5 * (1.0 + decay) * rho0.matrix() + 0.5 * (1.0 - decay) * z * rho0.matrix() * z;
  return DensityMatrix::from_matrix(std::move(rho));
}

double dephased_trajectory_exact(const DephasingModelParams& params) {
  validate(params);
  if (at_singular_time(params.t, params.s)) {
    throw SingularTimeError("closed form is undefined at t = 2s");
  }
  const double sign = params.t > 2.0 * params.s ? 1.0 : -1.0;
  return closed_form(params.rate(), params.x0, params.s, params.t, sign);
}

OneSidedLimits dephased_trajectory_limits(const DephasingModelParams& params) {
  const double t = 2.0 * params.s;
  return {closed_form(params.rate(), params.x0, params.s, t, -1.0),
          closed_form(params.rate(), params.x0, params.s, t, 1.0)};
}

double ncgd_prediction(const DephasingModelParams& params) {
  const double rate = params.rate();
  auto semigroup = [&](double tau) {
    const double decay = std::exp(-rate * tau);
    ComplexMatrix m = ComplexMatrix::Identity(4, 4);
    m(1, 1) = decay;
    m(2, 2) = decay;
    return Superoperator::with_flags(2, 2, m, true, true);
  };
  const double s = std::clamp(params.s, 0.0, params.t);
  const Superoperator path =
      compose(semigroup(params.t - s), compose(dephasing_channel(Observable::sigma_x()), semigroup(s)));
  return sigma_x_expectation(path.apply(x_state(params.x0)));
}

DensityMatrix quadrature_oracle(const DephasingModelParams& params, const DensityMatrix& rho0,
                                bool intervene, const QuadratureScheme& scheme) {
  validate(params);
  if (rho0.dim() != 2) throw DimensionError("dephasing model acts on a qubit");
  const double step = commensurate_step({params.s, params.t});
  const QuadratureRule rule = lorentzian_rule(params.g, params.gamma, step, scheme.node_count);
  const Superoperator delta = dephasing_channel(Observable::sigma_x());
  ComplexMatrix total = ComplexMatrix::Zero(2, 2);
  for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
    const double q = rule.nodes[j];
    const ComplexMatrix first = z_rotation(params.g * q * params.s);
    const ComplexMatrix second = z_rotation(params.g * q * (params.t - params.s));
    ComplexMatrix mid = first * rho0.matrix() * first.adjoint();
    if (intervene) mid = delta.apply(mid);
    total += rule.weights[j] * (second * mid * second.adjoint());
  }
  total = (0.5 * (total + total.adjoint())).eval();
  return DensityMatrix::from_matrix(std::move(total));
}

ComplexMatrix dephasing_liouvillian(double rate) {
  const ComplexMatrix z = pauli_z();
  return 0.5 * rate * (tensor_product(z.transpose(), z) - ComplexMatrix::Identity(4, 4));
}

ComplexMatrix integrate_master_equation(const ComplexMatrix& liouvillian, const ComplexMatrix& rho0,
                                        double t, std::size_t steps) {
  if (steps == 0) throw ModelParameterError("integration needs at least one step");
  const double h = t / static_cast<double>(steps);
  ComplexVector v = vectorize(rho0);
  for (std::size_t i = 0; i < steps; ++i) {
    const ComplexVector k1 = liouvillian * v;
    const ComplexVector k2 = liouvillian * (v + 0.5 * h * k1);
    const ComplexVector k3 = liouvillian * (v + 0.5 * h * k2);
    const ComplexVector k4 = liouvillian * (v + h * k3);
    v += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return unvectorize(v, static_cast<std::size_t>(rho0.rows()), static_cast<std::size_t>(rho0.cols()));
}

std::vector<TrajectoryRow> trajectory_rows(double rate, double s, double x0, double t_max,
                                           double dt) {
  if (!(dt > 0.0) || !(t_max >= 0.0)) throw ModelParameterError("need dt > 0 and t_max >= 0");
  DephasingModelParams p{rate, 1.0, x0, s, s};
  validate(p);
  const auto count = static_cast<std::size_t>(std::floor(t_max / dt + 1e-9));
  std::vector<TrajectoryRow> rows;
  rows.reserve(count + 1);
  for (std::size_t i = 0; i <= count; ++i) {
    p.t = static_cast<double>(i) * dt;
    TrajectoryRow row{p.t, 0.0, 0.0};
    if (p.t < s) {
      row.x_exact = x0 * std::exp(-rate * p.t);
      row.x_ncgd = row.x_exact;
      rows.push_back(row);
      continue;
    }
    row.x_ncgd = ncgd_prediction(p);
    if (at_singular_time(p.t, s)) {
      row.x_exact = dephased_trajectory_limits(p).right;
    } else {
      row.x_exact = dephased_trajectory_exact(p);
    }
    rows.push_back(row);
  }
  return rows;
}

void write_trajectory_csv(std::ostream& out, const std::vector<TrajectoryRow>& rows) {
  out << "t,x_exact,x_ncgd\n";
  char buffer[96];
  for (const TrajectoryRow& r : rows) {
    std::snprintf(buffer, sizeof buffer, "%.17g,%.17g,%.17g\n", r.t, r.x_exact, r.x_ncgd);
    out << buffer;
  }
}

MixedUnitaryProcess dephasing_model_process(double g, double gamma, double x0,
                                            const std::vector<double>& times,
                                            std::size_t node_count) {
  if (times.size() < 2) throw ModelParameterError("time grid needs at least two labels");
  const TimeGrid grid(times);
  std::vector<double> intervals;
  for (std::size_t k = 1; k < times.size(); ++k) intervals.push_back(times[k] - times[k - 1]);
  const double step = commensurate_step(intervals);
  const QuadratureRule rule = lorentzian_rule(g, gamma, step, node_count);
  std::vector<MixedUnitaryProcess::Branch> branches;
  branches.reserve(rule.nodes.size());
  for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
    MixedUnitaryProcess::Branch b{rule.weights[j], {}};
    for (double tau : intervals) b.unitaries.push_back(z_rotation(g * rule.nodes[j] * tau));
    branches.push_back(std::move(b));
  }
  return MixedUnitaryProcess(DensityMatrix::from_matrix(x_state(x0)), std::move(branches), grid);
}

ComplexMatrix rotation_y_half_pi() {
  const double c = std::cos(std::numbers::pi / 4.0);
  return c * identity(2) - Complex(0.0, 1.0) * std::sin(std::numbers::pi / 4.0) * pauli_y();
}

SinglePreparation counterexample3_psi0() {
  const ComplexVector plus = (basis_ket(2, 0) + basis_ket(2, 1)) / std::sqrt(2.0);
  const ComplexVector psi = tensor_product(plus, basis_ket(2, 0));
  return {MapIntervention{Superoperator::replacement(4, outer(psi))}};
}

ModelInstance build_counterexample(int which) {
  const Superoperator rotation = unitary_channel(rotation_y_half_pi());
  const DensityMatrix up = DensityMatrix::pure(basis_ket(2, 0));
  switch (which) {
    case 1: {
      MarkovProcess p(up, {rotation, rotation, rotation}, TimeGrid({0, 1, 2, 3}));
      return {"counterexample-1", std::move(p), Observable::sigma_z(),
              SinglePreparation{MapIntervention{Superoperator::replacement(2, 0.5 * identity(2))}},
              {{"classical", false}, {"incoherent", true}}};
    }
    case 2: {
      const Superoperator erase = Superoperator::replacement(2, 0.5 * identity(2));
      MarkovProcess p(up, {erase, rotation, rotation}, TimeGrid({0, 1, 2, 3}));
      return {"counterexample-2", std::move(p), Observable::sigma_z(), spanning_preparations(2),
              {{"classical", false}, {"incoherent", true}, {"invertible", false}, {"markov", true}}};
    }
    case 3: {
      ComplexMatrix swap = ComplexMatrix::Zero(4, 4);
      swap(0, 0) = swap(1, 2) = swap(2, 1) = swap(3, 3) = 1.0;
      const DensityMatrix start = DensityMatrix::pure(tensor_product(basis_ket(2, 0), basis_ket(2, 0)));
      MarkovProcess p(start, {Superoperator::identity(4), unitary_channel(swap)}, TimeGrid({0, 1, 2}));
      return {"counterexample-3", std::move(p), Observable::embed_left(Observable::sigma_z(), 2),
              spanning_preparations(4),
              {{"classical", true}, {"incoherent", false}, {"invertible", true}, {"markov", true}}};
    }
    default:
      throw IndexError("counterexample index must be 1, 2 or 3");
  }
}

ModelInstance build_dephasing_model(std::size_t node_count) {
  MixedUnitaryProcess p = dephasing_model_process(1.0, 1.0, 1.0, {0, 1, 2, 3}, node_count);
  return {"lorentzian-dephasing", std::move(p), Observable::sigma_x(), spanning_preparations(2),
          {{"ncgd", true}, {"incoherent", false}}};
}

ModelInstance build_model(const std::string& name) {
  if (name == "counterexample-1") return build_counterexample(1);
  if (name == "counterexample-2") return build_counterexample(2);
  if (name == "counterexample-3") return build_counterexample(3);
  if (name == "lorentzian-dephasing") return build_dephasing_model();
  throw IndexError("unknown model '" + name + "'");
}

}  // namespace qclassical
