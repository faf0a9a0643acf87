#pragma once

#include "mfcl/model.hpp"

namespace mfcl {

// Maximum of the agent Hamiltonian over effort at sensitivity z.
// value is the state-free part sup_a [z a - cost(a)]; the state terms enter
// linearly in z and are added by g_star.
struct EffortMax {
  double effort = 0.0;
  double value = 0.0;
};

// Output drift: a + alpha x + beta1 mean_x + beta2 mean_effort - gamma var_x.
double drift_b(double x, double mean_x, double mean_effort, double var_x,
               double a, const MeanFieldModel& m);

// Effort cost c |a|^n / n.
double cost(double a, const MeanFieldModel& m);

// Closed form: effort = (|z|/c)^{1/(n-1)},
// value = |z|^{n/(n-1)} / c^{1/(n-1)} * (1 - 1/n).
EffortMax optimal_effort(double z, const MeanFieldModel& m);

// Bisection on the first-order condition z = c a^{n-1}, z >= 0. Agrees with
// optimal_effort to 1e-10; kept as an independent oracle path.
double optimal_effort_root(double z, const MeanFieldModel& m);

// Maximized agent Hamiltonian:
// optimal_effort(z).value + z (alpha x + beta1 mean_x + beta2 mean_effort - gamma var_x).
double g_star(double z, double x, double mean_x, double mean_effort,
              double var_x, const MeanFieldModel& m);

// Reduced scalar Hamiltonian of the principal at time u in [0, T]:
// (1+beta2) (|z|/c)^{1/(n-1)} e^{kappa (T-u)} - |z|^{n/(n-1)} / (c^{1/(n-1)} n).
double principal_H(double u, double z, const MeanFieldModel& m);

// principal_H plus the variance-penalty terms
// - (lambda_xi + lambda_xxi) sigma^2 z^2 + 2 lambda_xxi sigma^2 z e^{alpha (T-u)}.
// Reduces to principal_H when all penalties vanish.
double risk_averse_h(double u, double z, const MeanFieldModel& m,
                     const Penalties& p);

struct SensitivityMax {
  double z_star = 0.0;
  double value = 0.0;
};

// Maximizes risk_averse_h(u, .) over z >= 0: the bracket right end doubles
// from 1 until the function decreases there (60 doublings cap, then error),
// golden-section to width 1e-12, then a short Newton polish on the analytic
// first-order condition (exact in one step when n = 2, where h'' is the
// constant -1/c - 2 (lambda_xi + lambda_xxi) sigma^2).
SensitivityMax maximize_h(double u, const MeanFieldModel& m,
                          const Penalties& p);

}  // namespace mfcl
