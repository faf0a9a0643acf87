#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "mfcl/closed_form.hpp"
#include "mfcl/numerics.hpp"

using namespace mfcl;

namespace {

MeanFieldModel make_model(double alpha, double beta1, double beta2,
                          double gamma, double c = 1.0, double n = 2.0,
                          double m0 = 0.0, double v0 = 0.0) {
  MeanFieldModel m;
  m.alpha = alpha;
  m.beta1 = beta1;
  m.beta2 = beta2;
  m.gamma = gamma;
  m.c = c;
  m.n = n;
  m.m0 = m0;
  m.v0 = v0;
  return m;
}

// The five regimes the moment formulas branch over.
std::vector<MeanFieldModel> branch_models() {
  return {
      make_model(0.25, 0.1, 0.5, 0.2, 1.0, 2.0, 0.3, 0.5),    // generic
      make_model(0.0, 0.3, 0.2, 0.1, 1.0, 2.0, -0.5, 0.25),   // alpha = 0
      make_model(0.0, 0.0, 0.4, 0.15, 1.0, 2.0, 1.0, 0.1),    // kappa = 0
      make_model(0.2, 0.2, 0.0, 0.1, 1.0, 2.0, 0.5, 0.3),     // alpha = beta1
      make_model(0.15, 0.05, 0.25, 0.3, 2.0, 3.0, -1.0, 0.5)  // generic, n=3
  };
}

// Independent RK4 integration of the moment ODE pair, sampled on `grid`.
MomentCurves rk4_moments(const MeanFieldModel& m, const TimeGrid& grid,
                         int refine = 4) {
  auto rhs = [&](double t, const std::vector<double>& y) {
    double f = y[0], g = y[1];
    double fp = (1.0 + m.beta2) * a_star_at(t, m) + kappa(m) * f -
                m.gamma * (g - f * f);
    double gp = 2.0 * m.alpha * g + 2.0 * f * (fp - m.alpha * f) +
                m.sigma * m.sigma;
    return std::vector<double>{fp, gp};
  };
  int steps = grid.steps * refine;
  auto path = rk4_solve(rhs, {m.m0, m.m0 * m.m0 + m.v0}, 0.0,
                        grid.T / steps, steps);
  std::vector<double> f(grid.num_points()), g(grid.num_points());
  for (int k = 0; k <= grid.steps; ++k) {
    f[k] = path[k * refine][0];
    g[k] = path[k * refine][1];
  }
  return MomentCurves{DeterministicCurve(grid, f), DeterministicCurve(grid, g)};
}

}  // namespace

TEST_CASE("policy curves satisfy the closed forms") {
  MeanFieldModel m = make_model(0.0, 0.0, 0.0, 0.0, 2.0, 3.0);
  PolicyPair p = optimal_policy(m);
  CHECK(p.z_star.values.back() == 1.0);  // z*(T) = 1 + beta2 exactly
  for (double v : p.z_star.values) CHECK(v == doctest::Approx(1.0));
  for (double v : p.a_star.values)
    CHECK(v == doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));

  m = make_model(0.25, 0.1, 0.5, 0.0, 2.0, 3.0);
  p = optimal_policy(m);
  CHECK(p.z_star.values.back() == 1.5);
  CHECK(a_star_at(0.0, m) ==
        doctest::Approx(std::sqrt(0.75 * std::exp(0.35))).epsilon(1e-13));
  // Numeric maximization of the reduced Hamiltonian at u = 0 lands on the
  // same sensitivity (value-comparison argmax floor applies).
  double z_gold = golden_section_max(
      [&](double z) { return principal_H(0.0, z, m); }, 0.0, 20.0);
  CHECK(std::fabs(z_gold - z_star_at(0.0, m)) <= 1e-6);

  // a = (z/c)^{1/(n-1)} pointwise.
  for (int k = 0; k <= p.z_star.grid.steps; k += 37) {
    double a = std::pow(p.z_star.values[k] / m.c, 1.0 / (m.n - 1.0));
    CHECK(std::fabs(p.a_star.values[k] - a) <= 1e-12);
  }
}

TEST_CASE("moment curves in the decoupled flat case grow linearly") {
  MeanFieldModel m = make_model(0.0, 0.0, 0.0, 0.0);
  MomentCurves mc = moment_curves(m, optimal_policy(m));
  for (int k = 0; k <= mc.f.grid.steps; k += 13) {
    double t = mc.f.grid.point(k);
    CHECK(std::fabs(mc.f.values[k] - t) <= 1e-9);
  }
}

TEST_CASE("moment curves start at the initial law and stay consistent") {
  for (const MeanFieldModel& m : branch_models()) {
    MomentCurves mc = moment_curves(m, optimal_policy(m));
    CHECK(mc.f.values[0] == doctest::Approx(m.m0).epsilon(1e-12));
    CHECK(mc.g.values[0] ==
          doctest::Approx(m.m0 * m.m0 + m.v0).epsilon(1e-12));
    for (int k = 0; k <= mc.f.grid.steps; k += 11)
      CHECK(mc.g.values[k] - mc.f.values[k] * mc.f.values[k] >= -1e-9);
  }
}

TEST_CASE("closed-form moments match an independent RK4 integration") {
  for (const MeanFieldModel& m : branch_models()) {
    PolicyPair p = optimal_policy(m);
    MomentCurves mc = moment_curves(m, p);
    MomentCurves rk = rk4_moments(m, p.z_star.grid);
    CHECK(mc.f.sup_distance(rk.f) <= 1e-6);
    CHECK(mc.g.sup_distance(rk.g) <= 1e-6);
  }
}

TEST_CASE("self-coupled mean with own-state feedback only") {
  // alpha = 0.25, beta1 = beta2 = gamma = 0, m0 = 1:
  // f(1) = e^{1/4} + int_0^1 e^{(1-u)/4} e^{(1-u)/4} du = e^{1/4} + 2(e^{1/2}-1).
  MeanFieldModel m = make_model(0.25, 0.0, 0.0, 0.0, 1.0, 2.0, 1.0, 0.0);
  double expect = std::exp(0.25) + 2.0 * std::expm1(0.5);
  CHECK(mean_at(1.0, m) == doctest::Approx(expect).epsilon(1e-12));
  MomentCurves mc = moment_curves(m, optimal_policy(m));
  CHECK(mc.f.values.back() == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("grid moments satisfy the ODE pair by central differences") {
  MeanFieldModel m = branch_models()[0];
  PolicyPair p = optimal_policy(m);
  MomentCurves mc = moment_curves(m, p);
  const TimeGrid& grid = mc.f.grid;
  double dt = grid.dt();
  for (int k = 1; k < grid.steps; ++k) {
    double t = grid.point(k);
    double f = mc.f.values[k], g = mc.g.values[k];
    double fp_expect = (1.0 + m.beta2) * p.a_star.values[k] + kappa(m) * f -
                       m.gamma * (g - f * f);
    double fp = (mc.f.values[k + 1] - mc.f.values[k - 1]) / (2.0 * dt);
    CHECK(std::fabs(fp - fp_expect) <= 1e-4);
    double gp_expect = 2.0 * m.alpha * g +
                       2.0 * f * (fp_expect - m.alpha * f) +
                       m.sigma * m.sigma;
    double gp = (mc.g.values[k + 1] - mc.g.values[k - 1]) / (2.0 * dt);
    CHECK(std::fabs(gp - gp_expect) <= 1e-4);
    (void)t;
  }
}

TEST_CASE("four-exponential mean coefficients reproduce the mean") {
  for (const MeanFieldModel& m :
       {branch_models()[0], branch_models()[4]}) {
    MomentLambdas l = moment_lambdas(m);
    double k = kappa(m);
    for (double t : {0.0, 0.17, 0.5, 0.83, 1.0}) {
      double f = l.l1 * std::exp(k * t) +
                 l.l2 * std::exp(-k * t / (m.n - 1.0)) +
                 l.l3 * std::exp(2.0 * m.alpha * t) + l.l4;
      CHECK(f == doctest::Approx(mean_at(t, m)).epsilon(1e-10));
    }
  }
}

TEST_CASE("contract law at the flat baseline") {
  MeanFieldModel m = make_model(0.0, 0.0, 0.0, 0.0);
  ContractSpec cs = contract_spec(m);
  CHECK(cs.law.mean == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(cs.law.variance == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(cs.delta == doctest::Approx(-0.5).epsilon(1e-9));
}

TEST_CASE("empty horizon degenerates to the reservation utility") {
  MeanFieldModel m = make_model(0.25, 0.1, 0.5, 0.2);
  m.T = 0.0;
  m.R0 = 0.7;
  ContractSpec cs = contract_spec(m);
  CHECK(cs.law.mean == 0.7);
  CHECK(cs.law.variance == 0.0);
  CHECK(cs.delta == 0.7);
  CHECK(principal_value(0.0, 1.0, 0.7, 0.3, m) ==
        doctest::Approx(0.3).epsilon(1e-14));
}

TEST_CASE("contract variance closed form") {
  // sigma^2 (1+beta2)^2 int_0^T e^{2 kappa (T-t)} dt with kappa=0.35,
  // beta2=0.5: 2.25 (e^{0.7}-1)/0.7.
  MeanFieldModel m = make_model(0.25, 0.1, 0.5, 0.0);
  ContractSpec cs = contract_spec(m);
  CHECK(cs.law.variance ==
        doctest::Approx(2.25 * std::expm1(0.7) / 0.7).epsilon(1e-10));
  // gamma does not move the law, only delta.
  MeanFieldModel mg = make_model(0.25, 0.1, 0.5, 0.2);
  ContractSpec csg = contract_spec(mg);
  CHECK(csg.law.mean == doctest::Approx(cs.law.mean).epsilon(1e-12));
  CHECK(csg.law.variance == doctest::Approx(cs.law.variance).epsilon(1e-12));
}

TEST_CASE("reporting-only law variant keeps the printed constants") {
  MeanFieldModel m = make_model(0.25, 0.1, 0.5, 0.0);
  m.R0 = 0.4;
  ContractSpec cs = contract_spec(m);
  double p = m.n / (m.n - 1.0);
  CHECK(cs.displayed.mean ==
        doctest::Approx(m.R0 + std::pow(1.5, p) / (m.n * m.c) *
                                   std::expm1(p * 0.35)).epsilon(1e-12));
  CHECK(cs.displayed.variance ==
        doctest::Approx(2.25 * std::expm1(0.7)).epsilon(1e-12));
  // The variant drops the time-integration factors, so it disagrees with the
  // canonical law whenever kappa > 0.
  CHECK(cs.displayed.variance != doctest::Approx(cs.law.variance));
}

TEST_CASE("salary constant matches its closed form off the degenerate branches") {
  for (const MeanFieldModel& m :
       {branch_models()[0], branch_models()[4]}) {
    ContractSpec cs = contract_spec(m);
    CHECK(std::fabs(cs.delta - delta_closed_form(m)) <= 1e-6);
  }
}

TEST_CASE("value function terminal condition and flat-rate example") {
  MeanFieldModel m = make_model(0.25, 0.0, 0.0, 0.0, 1.0, 2.0, 1.0, 0.0);
  for (double m1 : {-1.0, 0.0, 2.0})
    for (double m2 : {-0.5, 0.0, 1.5})
      CHECK(principal_value(m.T, m1, m2, 0.7, m) ==
            doctest::Approx(m1 - m2).epsilon(1e-12));
  double v = principal_value(0.0, 1.0, 0.0, 0.0, m);
  CHECK(v == doctest::Approx(std::expm1(0.5) + std::exp(0.25)).epsilon(1e-12));
  // gamma = 0 makes the value independent of the variance coordinate.
  CHECK(principal_value(0.0, 1.0, 0.0, 5.0, m) ==
        doctest::Approx(v).epsilon(1e-14));
}

TEST_CASE("variance penalty lowers the value") {
  MeanFieldModel m0 = make_model(0.25, 0.1, 0.5, 0.0, 1.0, 2.0, 0.0, 0.5);
  MeanFieldModel mg = make_model(0.25, 0.1, 0.5, 0.2, 1.0, 2.0, 0.0, 0.5);
  double v0 = principal_value(0.0, 0.0, 0.0, 0.5, m0);
  double vg = principal_value(0.0, 0.0, 0.0, 0.5, mg);
  CHECK(vg < v0);
  double d = central_diff(
      [&](double g) {
        MeanFieldModel mm = mg;
        mm.gamma = g;
        return principal_value(0.0, 0.0, 0.0, 0.5, mm);
      },
      0.2);
  CHECK(d < 0.0);
}

TEST_CASE("value agrees with direct quadrature of its construction") {
  for (const MeanFieldModel& m :
       {branch_models()[0], branch_models()[4]}) {
    double k = kappa(m);
    double head = adaptive_simpson(
        [&](double u) { return principal_H(u, z_star_at(u, m), m); }, 0.0,
        m.T, 1e-12);
    double tail = adaptive_simpson(
        [&](double s) {
          double var = m.v0 * std::exp(2.0 * m.alpha * s) +
                       m.sigma * m.sigma * iexp(2.0 * m.alpha, s);
          return std::exp(k * (m.T - s)) * var;
        },
        0.0, m.T, 1e-12);
    double expect = head + m.m0 * std::exp(k * m.T) - m.R0 - m.gamma * tail;
    CHECK(std::fabs(principal_value(0.0, m.m0, m.R0, m.v0, m) - expect) <=
          1e-8);
  }
}

TEST_CASE("value is continuous across the formula branches") {
  auto value_at = [](double alpha, double beta1) {
    MeanFieldModel m = make_model(alpha, beta1, 0.3, 0.25, 1.0, 2.0, 0.4, 0.6);
    return principal_value(0.0, m.m0, m.R0, m.v0, m);
  };
  CHECK(std::fabs(value_at(0.2, 0.2) - value_at(0.2 + 1e-8, 0.2)) <= 1e-5);
  CHECK(std::fabs(value_at(0.2, 0.2) - value_at(0.2 - 1e-8, 0.2)) <= 1e-5);
  CHECK(std::fabs(value_at(0.0, 0.3) - value_at(1e-9, 0.3)) <= 1e-5);
  CHECK(std::fabs(value_at(0.0, 0.0) - value_at(1e-9, 1e-9)) <= 1e-5);
}

TEST_CASE("penalized solution reduces and matches its quadratic closed form") {
  MeanFieldModel m = make_model(0.25, 0.1, 0.5, 0.0);
  Penalties zero{0.0, 0.0, 0.0};
  auto sol = risk_averse_solution(m, zero);
  PolicyPair plain = optimal_policy(m);
  CHECK(sol.first.z_star.sup_distance(plain.z_star) == 0.0);
  CHECK(sol.second.law.mean == contract_spec(m).law.mean);

  MeanFieldModel q = make_model(0.0, 0.0, 0.0, 0.0);
  auto flat = risk_averse_solution(q, Penalties{0.0, 0.5, 0.0});
  for (double v : flat.first.a_star.values) CHECK(std::fabs(v - 0.5) <= 1e-8);

  Penalties p{0.2, 0.2, 0.2};
  auto pen = risk_averse_solution(m, p);
  const TimeGrid& grid = pen.first.z_star.grid;
  for (int k = 0; k <= grid.steps; k += 10) {
    double t = grid.point(k);
    CHECK(std::fabs(pen.first.z_star.values[k] -
                    risk_averse_z_star_at(t, m, p)) <= 1e-8);
  }
  // Printed law: mean = R0 + c/2 int a^2, variance = c^2 sigma^2 int a^2.
  double ia2 = adaptive_simpson(
      [&](double t) {
        double a = risk_averse_z_star_at(t, m, p) / m.c;
        return a * a;
      },
      0.0, m.T, 1e-12);
  CHECK(std::fabs(pen.second.law.mean - (m.R0 + 0.5 * m.c * ia2)) <= 1e-8);
  CHECK(std::fabs(pen.second.law.variance -
                  m.c * m.c * m.sigma * m.sigma * ia2) <= 1e-8);
}

TEST_CASE("penalized effort falls as the contract penalties rise") {
  MeanFieldModel m = make_model(0.25, 0.1, 0.5, 0.0);
  Penalties base{0.2, 0.2, 0.2};
  auto sol0 = risk_averse_solution(m, base);
  Penalties up_xi = base;
  up_xi.lambda_xi += 0.1;
  auto sol1 = risk_averse_solution(m, up_xi);
  Penalties up_xxi = base;
  up_xxi.lambda_xxi += 0.1;
  auto sol2 = risk_averse_solution(m, up_xxi);
  for (size_t k = 0; k < sol0.first.a_star.values.size(); k += 25) {
    CHECK(sol1.first.a_star.values[k] <= sol0.first.a_star.values[k] + 1e-12);
    CHECK(sol2.first.a_star.values[k] <= sol0.first.a_star.values[k] + 1e-12);
  }
}

TEST_CASE("movement directions at the coupled reference point") {
  MeanFieldModel base = make_model(0.25, 0.1, 0.5, 0.2);
  auto quantity = [](int q, const MeanFieldModel& m) {
    if (q == 0) return contract_spec(m).law.mean;
    if (q == 1) return contract_spec(m).law.variance;
    if (q == 2) return a_star_at(0.0, m);
    return principal_value(0.0, m.m0, m.R0, m.v0, m);
  };
  auto probe = [&](int q, int param, double v) {
    MeanFieldModel m = base;
    (param == 0 ? m.c
     : param == 1 ? m.alpha
     : param == 2 ? m.beta1
     : param == 3 ? m.beta2
                  : m.gamma) = v;
    return quantity(q, m);
  };
  // rows: contract mean, contract variance, initial effort, value
  // cols: c, alpha, beta1, beta2, gamma
  const char expected[4][5] = {{'-', '+', '+', '+', '0'},
                               {'0', '+', '+', '+', '0'},
                               {'-', '+', '+', '+', '0'},
                               {'-', '+', '+', '+', '-'}};
  const double at[5] = {1.0, 0.25, 0.1, 0.5, 0.2};
  for (int q = 0; q < 4; ++q) {
    for (int param = 0; param < 5; ++param) {
      double h = 1e-5;
      double d =
          (probe(q, param, at[param] + h) - probe(q, param, at[param] - h)) /
          (2.0 * h);
      char sign = std::fabs(d) <= 1e-7 ? '0' : (d > 0.0 ? '+' : '-');
      CHECK(sign == expected[q][param]);
    }
  }
}
