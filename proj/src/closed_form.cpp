#include "mfcl/closed_form.hpp"

#include <cmath>

#include "mfcl/numerics.hpp"

namespace mfcl {

namespace {

// int_0^t e^{kappa (t-u)} e^{mu u} du, stable through mu = kappa.
double conv_exp(double k, double mu, double t) {
  double d = mu - k;
  if (d * t == 0.0) return t * std::exp(k * t);
  return std::exp(k * t) * std::expm1(d * t) / d;
}

// int_0^t e^{kappa (t-u)} u du; series below |kappa t| = 1e-4 where the
// direct expm1 difference cancels.
double conv_time(double k, double t) {
  double x = k * t;
  if (std::fabs(x) < 1e-4)
    return 0.5 * t * t * (1.0 + x / 3.0 + x * x / 12.0 + x * x * x / 60.0);
  return (std::expm1(x) - x) / (k * k);
}

constexpr double kAlphaTol = 1e-12;

// gamma-weighted variance convolution -int_0^t e^{kappa (t-u)} V(u) du
// (without the leading -gamma), where V is the output variance flow started
// at v_init.
double variance_convolution(double k, double t, double v_init,
                            const MeanFieldModel& m) {
  double s2 = m.sigma * m.sigma;
  if (m.alpha > kAlphaTol) {
    double h = s2 / (2.0 * m.alpha);
    return (v_init + h) * conv_exp(k, 2.0 * m.alpha, t) - h * iexp(k, t);
  }
  return v_init * iexp(k, t) + s2 * conv_time(k, t);
}

bool is_zero(const Penalties& p) {
  return p.lambda_x == 0.0 && p.lambda_xi == 0.0 && p.lambda_xxi == 0.0;
}

}  // namespace

TimeGrid default_grid(const MeanFieldModel& m) { return TimeGrid(m.T, 1000); }

double z_star_at(double t, const MeanFieldModel& m) {
  return (1.0 + m.beta2) * std::exp(kappa(m) * (m.T - t));
}

double a_star_at(double t, const MeanFieldModel& m) {
  return std::pow(z_star_at(t, m) / m.c, 1.0 / (m.n - 1.0));
}

PolicyPair optimal_policy(const MeanFieldModel& m) {
  return optimal_policy(m, default_grid(m));
}

PolicyPair optimal_policy(const MeanFieldModel& m, const TimeGrid& grid) {
  validate(m);
  PolicyPair p;
  p.z_star = DeterministicCurve::from_function(
      grid, [&](double t) { return z_star_at(t, m); });
  p.a_star = DeterministicCurve::from_function(
      grid, [&](double t) { return a_star_at(t, m); });
  return p;
}

MomentLambdas moment_lambdas(const MeanFieldModel& m) {
  if (branch_of(m) != Branch::generic)
    throw validation_error(
        "moment lambdas need kappa > 0, alpha > 0 and alpha != beta1");
  double k = kappa(m);
  double s2 = m.sigma * m.sigma;
  double a2k = 2.0 * m.alpha - k;  // equals alpha - beta1
  double amp = (1.0 + m.beta2) * a_star_at(0.0, m) * (m.n - 1.0) / (k * m.n);
  MomentLambdas l;
  l.l1 = m.m0 + amp + m.gamma * s2 / (k * a2k) + m.gamma * m.v0 / a2k;
  l.l2 = -amp;
  l.l3 = -m.gamma * s2 / (2.0 * m.alpha * a2k) - m.gamma * m.v0 / a2k;
  l.l4 = -m.gamma * s2 / (2.0 * m.alpha * k);
  return l;
}

double mean_at(double t, const MeanFieldModel& m) {
  double k = kappa(m);
  return m.m0 * std::exp(k * t) +
         (1.0 + m.beta2) * a_star_at(0.0, m) *
             conv_exp(k, -k / (m.n - 1.0), t) -
         m.gamma * variance_convolution(k, t, m.v0, m);
}

double variance_at(double t, const MeanFieldModel& m) {
  double two_a = 2.0 * m.alpha;
  return m.v0 * std::exp(two_a * t) + m.sigma * m.sigma * iexp(two_a, t);
}

double second_moment_at(double t, const MeanFieldModel& m) {
  double f = mean_at(t, m);
  return variance_at(t, m) + f * f;
}

MomentCurves moment_curves(const MeanFieldModel& m, const PolicyPair& policy) {
  validate(m);
  const TimeGrid& grid = policy.z_star.grid;
  MomentCurves out;
  if (grid.steps == 0) {
    out.f = DeterministicCurve(grid, {m.m0});
    out.g = DeterministicCurve(grid, {m.m0 * m.m0 + m.v0});
    return out;
  }
  bool optimal = true;
  for (int i = 0; i <= grid.steps && optimal; ++i) {
    double z = z_star_at(grid.point(i), m);
    if (std::fabs(policy.z_star.values[i] - z) > 1e-12 * (1.0 + std::fabs(z)))
      optimal = false;
  }
  if (optimal && branch_of(m) == Branch::generic) {
    MomentLambdas l = moment_lambdas(m);
    double k = kappa(m);
    out.f = DeterministicCurve::from_function(grid, [&](double t) {
      return l.l1 * std::exp(k * t) + l.l2 * std::exp(-k * t / (m.n - 1.0)) +
             l.l3 * std::exp(2.0 * m.alpha * t) + l.l4;
    });
    std::vector<double> g(grid.num_points());
    for (int i = 0; i <= grid.steps; ++i) {
      double fi = out.f.values[i];
      g[i] = variance_at(grid.point(i), m) + fi * fi;
    }
    out.g = DeterministicCurve(grid, std::move(g));
    return out;
  }
  auto effort = [&](double t) {
    return optimal ? a_star_at(t, m) : policy.a_star(t);
  };
  auto rhs = [&](double t, const std::vector<double>& y) {
    double fp = (1.0 + m.beta2) * effort(t) + kappa(m) * y[0] -
                m.gamma * (y[1] - y[0] * y[0]);
    double gp = 2.0 * m.alpha * y[1] + 2.0 * y[0] * (fp - m.alpha * y[0]) +
                m.sigma * m.sigma;
    return std::vector<double>{fp, gp};
  };
  auto path = rk4_solve(rhs, {m.m0, m.m0 * m.m0 + m.v0}, 0.0, grid.dt(),
                        grid.steps);
  std::vector<double> f(grid.num_points()), g(grid.num_points());
  for (int i = 0; i <= grid.steps; ++i) {
    f[i] = path[i][0];
    g[i] = path[i][1];
  }
  out.f = DeterministicCurve(grid, std::move(f));
  out.g = DeterministicCurve(grid, std::move(g));
  return out;
}

ContractSpec contract_spec(const MeanFieldModel& m) {
  validate(m);
  ContractSpec out;
  out.z_star = DeterministicCurve::from_function(
      default_grid(m), [&](double t) { return z_star_at(t, m); });
  double k = kappa(m);
  double np = m.n / (m.n - 1.0);
  out.displayed.mean = m.R0 + std::pow(1.0 + m.beta2, np) / (m.n * m.c) *
                                  std::expm1(np * k * m.T);
  out.displayed.variance = m.sigma * m.sigma * (1.0 + m.beta2) *
                           (1.0 + m.beta2) * std::expm1(2.0 * k * m.T);
  if (m.T == 0.0) {
    out.law = {m.R0, 0.0};
    out.delta = m.R0;
    return out;
  }
  out.law.mean =
      m.R0 + adaptive_simpson(
                 [&](double u) { return cost(a_star_at(u, m), m); }, 0.0, m.T);
  out.law.variance =
      m.sigma * m.sigma *
      adaptive_simpson(
          [&](double u) {
            double z = z_star_at(u, m);
            return z * z;
          },
          0.0, m.T);
  // Mean of the variable contract part
  // beta1 (1+beta2) int e^{kappa (T-t)} f(t) dt + (1+beta2)(f(T) - e^{kappa T} m0).
  double variable =
      m.beta1 * (1.0 + m.beta2) *
          adaptive_simpson(
              [&](double t) {
                return std::exp(k * (m.T - t)) * mean_at(t, m);
              },
              0.0, m.T) +
      (1.0 + m.beta2) * (mean_at(m.T, m) - std::exp(k * m.T) * m.m0);
  out.delta = out.law.mean - variable;
  return out;
}

double delta_closed_form(const MeanFieldModel& m) {
  validate(m);
  if (m.alpha <= kAlphaTol || std::fabs(m.alpha - m.beta1) <= kAlphaTol)
    throw validation_error(
        "closed-form delta needs alpha > 0 and alpha != beta1");
  double k = kappa(m);
  double q = 1.0 / (m.n - 1.0);
  double np = m.n * q;
  double ab = m.alpha - m.beta1;
  double b2 = 1.0 + m.beta2;
  // Effort cost along the optimal policy integrates in closed form.
  double cost_int = std::pow(b2, np) * (m.n - 1.0) /
                    (m.n * m.n * k * std::pow(m.c, q)) *
                    std::expm1(np * k * m.T);
  // Mean of the variable contract part, written on the exponential basis of
  // f: beta1 (1+beta2) int_0^T e^{kappa (T-t)} f dt + (1+beta2)(f(T) -
  // e^{kappa T} m0). Independent of the quadrature path in contract_spec.
  MomentLambdas l = moment_lambdas(m);
  double ft = l.l1 * std::exp(k * m.T) + l.l2 * std::exp(-k * q * m.T) +
              l.l3 * std::exp(2.0 * m.alpha * m.T) + l.l4;
  double conv = l.l1 * m.T - l.l2 * std::expm1(-np * k * m.T) / (np * k) +
                l.l3 * std::expm1(ab * m.T) / ab -
                l.l4 * std::expm1(-k * m.T) / k;
  double variable = b2 * (ft - std::exp(k * m.T) * m.m0) +
                    m.beta1 * b2 * std::exp(k * m.T) * conv;
  return m.R0 + cost_int - variable;
}

double principal_value(double t, double m1, double m2, double var1,
                       const MeanFieldModel& m) {
  double k = kappa(m);
  double tau = m.T - t;
  double np = m.n / (m.n - 1.0);
  double head = (1.0 - 1.0 / m.n) * std::pow(1.0 + m.beta2, np) /
                    std::pow(m.c, 1.0 / (m.n - 1.0)) * iexp(k * np, tau) +
                m1 * std::exp(k * tau) - m2;
  if (m.gamma == 0.0) return head;
  return head - m.gamma * variance_convolution(k, tau, var1, m);
}

double risk_averse_z_star_at(double t, const MeanFieldModel& m,
                             const Penalties& p) {
  if (m.n != 2.0)
    throw validation_error("penalized closed form needs n = 2");
  double s2 = m.sigma * m.sigma;
  double denom = 1.0 + 2.0 * (p.lambda_xi + p.lambda_xxi) * m.c * s2;
  return ((1.0 + m.beta2) * std::exp(kappa(m) * (m.T - t)) +
          2.0 * m.c * p.lambda_xxi * s2 * std::exp(m.alpha * (m.T - t))) /
         denom;
}

std::pair<PolicyPair, ContractSpec> risk_averse_solution(
    const MeanFieldModel& m, const Penalties& p) {
  validate(m);
  validate(p);
  if (is_zero(p)) return {optimal_policy(m), contract_spec(m)};
  TimeGrid grid = default_grid(m);
  double q = 1.0 / (m.n - 1.0);
  auto z_at = [&](double t) { return maximize_h(t, m, p).z_star; };
  PolicyPair policy;
  policy.z_star = DeterministicCurve::from_function(grid, z_at);
  policy.a_star = DeterministicCurve::from_function(
      grid, [&](double t) { return std::pow(z_at(t) / m.c, q); });
  ContractSpec spec;
  spec.z_star = policy.z_star;
  if (m.T == 0.0) {
    spec.law = {m.R0, 0.0};
    spec.displayed = spec.law;
    spec.delta = m.R0;
    return {policy, spec};
  }
  spec.law.mean =
      m.R0 +
      adaptive_simpson(
          [&](double t) { return cost(std::pow(z_at(t) / m.c, q), m); }, 0.0,
          m.T);
  spec.law.variance = m.sigma * m.sigma *
                      adaptive_simpson(
                          [&](double t) {
                            double z = z_at(t);
                            return z * z;
                          },
                          0.0, m.T);
  spec.displayed = spec.law;
  // Mean of the variable part int z dX - alpha int z X dt under the
  // equilibrium induced by this policy: int z (f' - alpha f) dt with
  // f' - alpha f = (1+beta2) a + beta1 f - gamma V.
  MomentCurves mc = moment_curves(m, policy);
  double variable = adaptive_simpson(
      [&](double t) {
        double a = policy.a_star(t);
        return policy.z_star(t) *
               ((1.0 + m.beta2) * a + m.beta1 * mc.f(t) -
                m.gamma * mc.variance(t));
      },
      0.0, m.T);
  spec.delta = spec.law.mean - variable;
  return {policy, spec};
}

}  // namespace mfcl
