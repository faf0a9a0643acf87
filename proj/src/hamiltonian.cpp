#include "mfcl/hamiltonian.hpp"

#include <cmath>
#include <stdexcept>

#include "mfcl/numerics.hpp"

namespace mfcl {

double drift_b(double x, double mean_x, double mean_effort, double var_x,
               double a, const MeanFieldModel& m) {
  return a + m.alpha * x + m.beta1 * mean_x + m.beta2 * mean_effort -
         m.gamma * var_x;
}

double cost(double a, const MeanFieldModel& m) {
  return m.c * std::pow(std::fabs(a), m.n) / m.n;
}

EffortMax optimal_effort(double z, const MeanFieldModel& m) {
  EffortMax r;
  double az = std::fabs(z);
  r.effort = std::pow(az / m.c, 1.0 / (m.n - 1.0));
  r.value = std::pow(az, m.n / (m.n - 1.0)) /
            std::pow(m.c, 1.0 / (m.n - 1.0)) * (1.0 - 1.0 / m.n);
  return r;
}

double optimal_effort_root(double z, const MeanFieldModel& m) {
  if (z <= 0.0) return 0.0;
  // c a^{n-1} is increasing from 0, so the root is bracketed by [0, hi] once
  // c hi^{n-1} exceeds z.
  double hi = 1.0;
  while (m.c * std::pow(hi, m.n - 1.0) < z) hi *= 2.0;
  double lo = 0.0;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    if (m.c * std::pow(mid, m.n - 1.0) < z)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double g_star(double z, double x, double mean_x, double mean_effort,
              double var_x, const MeanFieldModel& m) {
  return optimal_effort(z, m).value +
         z * (m.alpha * x + m.beta1 * mean_x + m.beta2 * mean_effort -
              m.gamma * var_x);
}

double principal_H(double u, double z, const MeanFieldModel& m) {
  double az = std::fabs(z);
  double inv = 1.0 / (m.n - 1.0);
  return (1.0 + m.beta2) * std::pow(az / m.c, inv) *
             std::exp(kappa(m) * (m.T - u)) -
         std::pow(az, m.n * inv) / (std::pow(m.c, inv) * m.n);
}

double risk_averse_h(double u, double z, const MeanFieldModel& m,
                     const Penalties& p) {
  return principal_H(u, z, m) -
         (p.lambda_xi + p.lambda_xxi) * m.sigma * m.sigma * z * z +
         2.0 * p.lambda_xxi * m.sigma * m.sigma * z *
             std::exp(m.alpha * (m.T - u));
}

SensitivityMax maximize_h(double u, const MeanFieldModel& m,
                          const Penalties& p) {
  auto h = [&](double z) { return risk_averse_h(u, z, m, p); };
  // h is coercive (power n/(n-1) > 1), so doubling must eventually cross the
  // maximum; the cap guards against malformed inputs.
  double z_max = 1.0;
  int doublings = 0;
  while (h(z_max) >= h(0.5 * z_max)) {
    if (++doublings > 60)
      throw std::runtime_error("maximize_h: bracket expansion failed");
    z_max *= 2.0;
  }
  double z = golden_section_max(h, 0.0, z_max, 1e-12);
  // Newton polish on the analytic h'. Derivative-free search alone localizes
  // the argmax only to about sqrt(eps |h| / |h''|), which is 1e-8..1e-7 at
  // typical scales; the golden-section point is already in the concave basin,
  // so a few guarded steps reach float precision. For n = 2 the first step
  // lands exactly on the quadratic's stationary point.
  double tau = m.T - u;
  double s2 = m.sigma * m.sigma;
  double drive = (1.0 + m.beta2) * std::exp(kappa(m) * tau);
  double q = 1.0 / (m.n - 1.0);
  double np = m.n * q;
  double cq = std::pow(m.c, q);
  double lam = p.lambda_xi + p.lambda_xxi;
  double pen1 = 2.0 * p.lambda_xxi * s2 * std::exp(m.alpha * tau);
  for (int it = 0; it < 3; ++it) {
    if (!(z > 0.0)) break;
    double d1 = q / cq *
                    (drive * std::pow(z, q - 1.0) - std::pow(z, np - 1.0)) -
                2.0 * lam * s2 * z + pen1;
    double d2 = q / cq *
                    ((q - 1.0) * drive * std::pow(z, q - 2.0) -
                     (np - 1.0) * std::pow(z, np - 2.0)) -
                2.0 * lam * s2;
    if (!std::isfinite(d1) || !(d2 < 0.0)) break;
    double next = z - d1 / d2;
    if (!std::isfinite(next) || !(next > 0.0)) break;
    z = next;
  }
  return SensitivityMax{z, h(z)};
}

}  // namespace mfcl
