#pragma once

// Worked models: the spin dephased by a Lorentzian continuum (closed forms,
// an independent quadrature oracle and a master-equation integrator) and the
// three small counterexamples separating classicality from incoherence.

#include <cstddef>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "qclassical/channels.hpp"
#include "qclassical/checkers.hpp"
#include "qclassical/linalg.hpp"
#include "qclassical/process.hpp"

namespace qclassical {

/// H_SE = (g/2) sigma_z kron q with a Lorentzian of width gamma in q;
/// dephasing rate Gamma = g * gamma.
struct DephasingModelParams {
  double g = 1.0;
  double gamma = 1.0;
  double x0 = 1.0;
  double s = 0.0;
  double t = 0.0;

  double rate() const { return g * gamma; }
};

/// Throws ModelParameterError unless g, gamma > 0, |x0| <= 1 and 0 <= s <= t.
void validate(const DephasingModelParams& params);

/// Periodic trapezoid rule for the Lorentzian average of functions of q that
/// are periodic with period 2 pi / (g * step).
struct QuadratureScheme {
  std::size_t node_count = 2000;
};

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;  ///< sum to 1
};

/// Largest step of which every entry of `times` is an integer multiple.
/// Throws ModelParameterError when the times are not commensurate.
double commensurate_step(const std::vector<double>& times);

/// Wrapped-Lorentzian weights on N equispaced nodes over one period.
QuadratureRule lorentzian_rule(double g, double gamma, double step, std::size_t node_count);

/// rho(t) = (1 + e^{-Gamma t})/2 rho0 + (1 - e^{-Gamma t})/2 sigma_z rho0 sigma_z.
DensityMatrix dephasing_reduced_state(const DephasingModelParams& params, const DensityMatrix& rho0);

/// <sigma_x>(t) after a sigma_x dephasing at s, from the closed form with
/// sign(t - 2s). Throws SingularTimeError at t = 2s and ModelParameterError
/// unless 0 <= s <= t.
double dephased_trajectory_exact(const DephasingModelParams& params);

/// Values of the two sign branches of the closed form evaluated at t = 2s.
struct OneSidedLimits {
  double left = 0.0;   ///< sign(t - 2s) -> -1
  double right = 0.0;  ///< sign(t - 2s) -> +1
};
OneSidedLimits dephased_trajectory_limits(const DephasingModelParams& params);

/// x0 e^{-Gamma t}: the semigroup with a sigma_x dephasing at s, which the
/// dephasing leaves unchanged.
double ncgd_prediction(const DephasingModelParams& params);

/// sum_j w_j u_j(t-s) D[u_j(s) rho0 u_j(s)^dagger] u_j(t-s)^dagger with
/// u_q(tau) = exp(-i g q tau sigma_z / 2); without `intervene` D is omitted.
DensityMatrix quadrature_oracle(const DephasingModelParams& params, const DensityMatrix& rho0,
                                bool intervene, const QuadratureScheme& scheme = {});

/// L = (Gamma/2)(sigma_z^T kron sigma_z - I) in column-stacked form.
ComplexMatrix dephasing_liouvillian(double rate);
/// Classical RK4 integration of d vec(rho)/dt = L vec(rho).
ComplexMatrix integrate_master_equation(const ComplexMatrix& liouvillian, const ComplexMatrix& rho0,
                                        double t, std::size_t steps);

struct TrajectoryRow {
  double t = 0.0;
  double x_exact = 0.0;
  double x_ncgd = 0.0;
};

/// Rows on t = 0, dt, ..., t_max. Before s no dephasing has happened
/// (x0 e^{-Gamma t}); at t = 2s the common one-sided limit is used.
std::vector<TrajectoryRow> trajectory_rows(double rate, double s, double x0, double t_max,
                                           double dt);
/// Header `t,x_exact,x_ncgd`, %.17g.
void write_trajectory_csv(std::ostream& out, const std::vector<TrajectoryRow>& rows);

/// The dephasing model on a time grid as a mixed-unitary process over the
/// quadrature nodes, started from (I + x0 sigma_x)/2.
MixedUnitaryProcess dephasing_model_process(double g, double gamma, double x0,
                                            const std::vector<double>& times,
                                            std::size_t node_count = 64);

struct ModelInstance {
  std::string name;
  Process process;
  Observable observable;
  PreparationSet preparations;
  std::map<std::string, bool> expected;
};

/// which = 1, 2 or 3; IndexError otherwise.
ModelInstance build_counterexample(int which);
/// Dephasing model, Gamma = 1, grid {0, 1, 2, 3}, sigma_x observable.
ModelInstance build_dephasing_model(std::size_t node_count = 64);
/// Builtin model by name: counterexample-1/2/3 or lorentzian-dephasing.
ModelInstance build_model(const std::string& name);

/// pi/2 rotation about y: exp(-i pi/4 sigma_y).
ComplexMatrix rotation_y_half_pi();
/// Replacement preparation of ((|0>+|1>)/sqrt 2) kron |0> for counterexample 3.
SinglePreparation counterexample3_psi0();

}  // namespace qclassical
