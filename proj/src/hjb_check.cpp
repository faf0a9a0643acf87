#include "mfcl/hjb_check.hpp"

#include <cmath>

#include "mfcl/closed_form.hpp"
#include "mfcl/hamiltonian.hpp"
#include "mfcl/mfg_sim.hpp"
#include "mfcl/numerics.hpp"

namespace mfcl {

namespace {

constexpr double kStep = 1e-5;

// Central difference with one Richardson step at fixed base step kStep,
// matching the declared partial scheme exactly.
template <class F>
double partial(F&& f, double x) {
  double d1 = (f(x + kStep) - f(x - kStep)) / (2.0 * kStep);
  double d2 = (f(x + 0.5 * kStep) - f(x - 0.5 * kStep)) / kStep;
  return (4.0 * d2 - d1) / 3.0;
}

double z_star_closed(double t, const MeanFieldModel& m) {
  return (1.0 + m.beta2) * std::exp(kappa(m) * (m.T - t));
}

}  // namespace

double MomentFunctional::dt(double t, double m1, double m2, double v1) const {
  return partial([&](double s) { return eval(s, m1, m2, v1); }, t);
}
double MomentFunctional::dm1(double t, double m1, double m2, double v1) const {
  return partial([&](double s) { return eval(t, s, m2, v1); }, m1);
}
double MomentFunctional::dm2(double t, double m1, double m2, double v1) const {
  return partial([&](double s) { return eval(t, m1, s, v1); }, m2);
}
double MomentFunctional::dv1(double t, double m1, double m2, double v1) const {
  return partial([&](double s) { return eval(t, m1, m2, s); }, v1);
}

MomentFunctional value_functional(const MeanFieldModel& m) {
  MomentFunctional f;
  f.eval = [m](double t, double m1, double m2, double v1) {
    return principal_value(t, m1, m2, v1, m);
  };
  return f;
}

LiftedDerivatives lifted_derivatives(const MomentFunctional& v, double t,
                                     double m1, double m2, double v1) {
  LiftedDerivatives d;
  d.m1 = m1;
  d.v1 = v1;
  d.dm1 = v.dm1(t, m1, m2, v1);
  d.dm2 = v.dm2(t, m1, m2, v1);
  d.dv1 = v.dv1(t, m1, m2, v1);
  return d;
}

double generator_apply(const LiftedDerivatives& d, double,
                       const std::array<double, 2>& x, double z,
                       const MeanFieldModel& m) {
  double a = optimal_effort(z, m).effort;
  // Every agent applies the same z, so the population mean effort is a*(z).
  double c1 = drift_b(x[0], d.m1, a, d.v1, a, m);
  double c2 = cost(a, m);
  auto dr = d.dRho(x);
  // Tr[diag(2 dV1, 0) SS^T] = 2 dV1 sigma^2.
  return dr[0] * c1 + dr[1] * c2 + d.dv1 * m.sigma * m.sigma;
}

double expected_generator(const LiftedDerivatives& d, double z,
                          const MeanFieldModel& m) {
  double a = optimal_effort(z, m).effort;
  return d.dm1 * ((1.0 + m.beta2) * a + kappa(m) * d.m1 - m.gamma * d.v1) +
         d.dm2 * cost(a, m) +
         d.dv1 * (2.0 * m.alpha * d.v1 + m.sigma * m.sigma);
}

double expected_generator_feedback(const MomentFunctional& v, double t,
                                   double m1, double m2, double v1, double z0,
                                   double z1, const MeanFieldModel& m) {
  LiftedDerivatives d = lifted_derivatives(v, t, m1, m2, v1);
  double abar, cbar, cov;
  if (v1 <= 0.0 || z1 == 0.0) {
    double a = optimal_effort(z0 + z1 * m1, m).effort;
    abar = a;
    cbar = cost(a, m);
    cov = 0.0;
  } else {
    double sd = std::sqrt(v1);
    auto gauss_mean = [&](const std::function<double(double)>& h) {
      return adaptive_simpson(
          [&](double x) {
            double u = (x - m1) / sd;
            return h(x) * std::exp(-0.5 * u * u) /
                   (sd * std::sqrt(2.0 * M_PI));
          },
          m1 - 10.0 * sd, m1 + 10.0 * sd, 1e-10);
    };
    abar = gauss_mean(
        [&](double x) { return optimal_effort(z0 + z1 * x, m).effort; });
    cbar = gauss_mean(
        [&](double x) { return cost(optimal_effort(z0 + z1 * x, m).effort, m); });
    cov = gauss_mean([&](double x) {
      return (x - m1) * optimal_effort(z0 + z1 * x, m).effort;
    });
  }
  return d.dm1 * ((1.0 + m.beta2) * abar + kappa(m) * m1 - m.gamma * v1) +
         2.0 * d.dv1 * (cov + m.alpha * v1) + d.dm2 * cbar +
         d.dv1 * m.sigma * m.sigma;
}

HjbReport hjb_residual(const MomentFunctional& v, const MeanFieldModel& m,
                       const std::vector<double>& t_grid,
                       const std::vector<double>& m1_grid,
                       const std::vector<double>& v1_grid) {
  validate(m);
  HjbReport report;
  report.rows.reserve(t_grid.size() * m1_grid.size() * v1_grid.size());
  for (double t : t_grid) {
    double zs = z_star_closed(t, m);
    double z_hi = std::max(4.0 * zs, 4.0);
    for (double m1 : m1_grid) {
      for (double v1 : v1_grid) {
        LiftedDerivatives d = lifted_derivatives(v, t, m1, m.R0, v1);
        double dt_v = v.dt(t, m1, m.R0, v1);
        auto phi = [&](double z) { return expected_generator(d, z, m); };
        double z_arg = golden_section_max(phi, 0.0, z_hi, 1e-9);
        HjbPoint p;
        p.t = t;
        p.m1 = m1;
        p.v1 = v1;
        p.argsup_z = z_arg;
        p.residual = std::fabs(dt_v + phi(z_arg));
        report.rows.push_back(p);
        report.max_residual = std::max(report.max_residual, p.residual);
        report.max_argsup_gap =
            std::max(report.max_argsup_gap, std::fabs(z_arg - zs));
      }
    }
  }
  return report;
}

HjbReport hjb_residual(const MeanFieldModel& m,
                       const std::vector<double>& t_grid,
                       const std::vector<double>& m1_grid,
                       const std::vector<double>& v1_grid) {
  return hjb_residual(value_functional(m), m, t_grid, m1_grid, v1_grid);
}

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i)
    v[i] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
  return v;
}

}  // namespace

VerificationReport verification_report(const MeanFieldModel& m) {
  return verification_report(m, value_functional(m));
}

VerificationReport verification_report(const MeanFieldModel& m,
                                       const MomentFunctional& v) {
  validate(m);
  VerificationReport r;
  r.residual_threshold = m.gamma == 0.0 ? 1e-5 : 1e-4;
  r.residuals = hjb_residual(v, m, linspace(0.0, m.T, 11),
                             linspace(-2.0, 2.0, 9), linspace(0.0, 2.0, 5));
  r.residual_ok = r.residuals.max_residual <= r.residual_threshold;
  r.attainment_ok = r.residuals.max_argsup_gap <= 1e-6;

  // The optimal sensitivity is a deterministic curve; admissibility needs it
  // finite and nonnegative over the horizon.
  PolicyPair policy = optimal_policy(m);
  r.deterministic_admissible = true;
  for (double z : policy.z_star.values)
    if (!std::isfinite(z) || z < 0.0) r.deterministic_admissible = false;

  MomentCurves moments = moment_curves(m, policy);
  SimConfig sim;
  sim.particles = 20000;
  sim.grid = TimeGrid(m.T, m.T == 0.0 ? 0 : 400);
  sim.seed = 20240817;
  ParticleEnsemble ensemble = simulate_equilibrium(m, policy, moments, sim);
  std::vector<double> xi =
      simulate_continuation_utility(ensemble, m, policy, moments);
  Estimate est = principal_objective(ensemble, xi, m, nullptr);
  r.mc_value = est.value;
  r.mc_se = est.standard_error;
  r.closed_value = principal_value(0.0, m.m0, m.R0, m.v0, m);
  r.mc_ok = std::fabs(r.mc_value - r.closed_value) <= 4.0 * r.mc_se;

  if (!r.residual_ok)
    r.failed_check = "hjb_residual";
  else if (!r.attainment_ok)
    r.failed_check = "optimizer_attainment";
  else if (!r.deterministic_admissible)
    r.failed_check = "deterministic_admissibility";
  else if (!r.mc_ok)
    r.failed_check = "monte_carlo_value";
  r.passed = r.failed_check.empty();
  return r;
}

}  // namespace mfcl
