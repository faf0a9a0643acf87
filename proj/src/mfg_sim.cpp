#include "mfcl/mfg_sim.hpp"

#include <cmath>
#include <cstdio>

#include "mfcl/hamiltonian.hpp"
#include "mfcl/rng.hpp"

namespace mfcl {

namespace {

// Step id reserved for the initial-state draw; grid steps never reach it.
constexpr uint64_t kInitKey = ~0ull;
constexpr int kPathCache = 100;

double sqrt_nonneg(double v) { return v > 0.0 ? std::sqrt(v) : 0.0; }

double initial_state(const MeanFieldModel& m, const SimConfig& sim, int i) {
  if (m.v0 == 0.0) return m.m0;
  return m.m0 +
         std::sqrt(m.v0) * rng::normal(sim.seed, (uint64_t)i, kInitKey, 0);
}

struct PassConfig {
  bool with_y = false;
  bool running_mean = false;               // particle mode
  bool running_variance = false;           // particle mode
  const DeterministicCurve* frozen_variance = nullptr;  // Picard iterate
};

// One forward sweep of all particles. Exact Gaussian transitions when the
// drift is affine with deterministic source (analytic mode, gamma = 0),
// Euler-Maruyama otherwise. Fills terminal slices, realized moment curves
// and the whole-path cache of `out`.
void run_pass(const MeanFieldModel& m, const PolicyPair& policy,
              const MomentCurves& moments, const SimConfig& sim,
              const PassConfig& pc, ParticleEnsemble& out) {
  const TimeGrid& g = sim.grid;
  const int S = g.steps;
  const int M = sim.particles;
  const int K = std::min(M, kPathCache);
  const double dt = g.dt();
  const double sig = m.sigma;
  const bool exact = sim.mode == MeanFieldMode::analytic && m.gamma == 0.0 &&
                     !pc.running_mean && !pc.running_variance &&
                     pc.frozen_variance == nullptr;

  std::vector<double> sum(S + 1, 0.0), sum2(S + 1, 0.0);
  std::vector<double> x_term(M), y_term;
  if (pc.with_y) y_term.assign(M, m.R0);
  std::vector<std::vector<double>> x_cache(K), y_cache(pc.with_y ? K : 0);
  for (auto& p : x_cache) p.resize(S + 1);
  for (auto& p : y_cache) p.resize(S + 1);

  // Per-step deterministic coefficients shared by every particle.
  std::vector<double> cost_dt(S), z_sig(S);
  for (int k = 0; k < S; ++k) {
    double t = g.point(k);
    cost_dt[k] = cost(policy.a_star(t + 0.5 * dt), m) * dt;
    z_sig[k] = policy.z_star(t) * sig;
  }

  if (exact) {
    double e_ad = std::exp(m.alpha * dt);
    double var_i =
        m.alpha == 0.0 ? dt : std::expm1(2.0 * m.alpha * dt) / (2.0 * m.alpha);
    double s_i = std::sqrt(var_i);
    double cov = m.alpha == 0.0 ? dt : std::expm1(m.alpha * dt) / m.alpha;
    double w1 = cov / s_i;
    double w2 = sqrt_nonneg(dt - cov * cov / var_i);
    // Source integral per step by 3-point Gauss-Legendre.
    const double gn[3] = {0.5 - 0.3872983346207417, 0.5,
                          0.5 + 0.3872983346207417};
    const double gw[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
    std::vector<double> det(S);
    for (int k = 0; k < S; ++k) {
      double t = g.point(k);
      double d = 0.0;
      for (int j = 0; j < 3; ++j) {
        double u = t + dt * gn[j];
        double src =
            (1.0 + m.beta2) * policy.a_star(u) + m.beta1 * moments.f(u);
        d += gw[j] * src * std::exp(m.alpha * dt * (1.0 - gn[j]));
      }
      det[k] = d * dt;
    }
    for (int i = 0; i < M; ++i) {
      double x = initial_state(m, sim, i);
      double y = m.R0;
      sum[0] += x;
      sum2[0] += x * x;
      if (i < K) x_cache[i][0] = x;
      if (pc.with_y && i < K) y_cache[i][0] = y;
      for (int k = 0; k < S; ++k) {
        double g1 = rng::normal(sim.seed, (uint64_t)i, (uint64_t)k, 0);
        if (pc.with_y) {
          double g2 = rng::normal(sim.seed, (uint64_t)i, (uint64_t)k, 1);
          y += cost_dt[k] + z_sig[k] * (w1 * g1 + w2 * g2);
        }
        x = e_ad * x + det[k] + sig * s_i * g1;
        sum[k + 1] += x;
        sum2[k + 1] += x * x;
        if (i < K) x_cache[i][k + 1] = x;
        if (pc.with_y && i < K) y_cache[i][k + 1] = y;
      }
      x_term[i] = x;
      if (pc.with_y) y_term[i] = y;
    }
  } else {
    // Step-major Euler so the running empirical moments are available to
    // every particle's drift at the current time.
    std::vector<double> fk(S + 1), vk(S + 1), ak(S + 1);
    for (int k = 0; k <= S; ++k) {
      double t = g.point(k);
      ak[k] = policy.a_star(t);
      if (!pc.running_mean) fk[k] = moments.f(t);
      if (pc.frozen_variance != nullptr)
        vk[k] = (*pc.frozen_variance)(t);
      else if (!pc.running_variance)
        vk[k] = moments.variance(t);
    }
    std::vector<double> x(M), y;
    if (pc.with_y) y.assign(M, m.R0);
    for (int i = 0; i < M; ++i) {
      x[i] = initial_state(m, sim, i);
      sum[0] += x[i];
      sum2[0] += x[i] * x[i];
      if (i < K) x_cache[i][0] = x[i];
      if (pc.with_y && i < K) y_cache[i][0] = m.R0;
    }
    double sdt = std::sqrt(dt);
    for (int k = 0; k < S; ++k) {
      double mean_k = pc.running_mean ? sum[k] / M : fk[k];
      double var_k = pc.running_variance
                         ? sum2[k] / M - (sum[k] / M) * (sum[k] / M)
                         : vk[k];
      for (int i = 0; i < M; ++i) {
        double gi = rng::normal(sim.seed, (uint64_t)i, (uint64_t)k, 0);
        if (pc.with_y) {
          y[i] += cost_dt[k] + z_sig[k] * sdt * gi;
          if (i < K) y_cache[i][k + 1] = y[i];
        }
        double b = drift_b(x[i], mean_k, ak[k], var_k, ak[k], m);
        x[i] += b * dt + sig * sdt * gi;
        sum[k + 1] += x[i];
        sum2[k + 1] += x[i] * x[i];
        if (i < K) x_cache[i][k + 1] = x[i];
      }
    }
    x_term = std::move(x);
    if (pc.with_y) y_term = std::move(y);
  }

  std::vector<double> mean(S + 1), m2(S + 1);
  for (int k = 0; k <= S; ++k) {
    mean[k] = sum[k] / M;
    m2[k] = sum2[k] / M;
  }
  out.model = m;
  out.sim = sim;
  out.exact_stepping = exact;
  out.has_increments = true;
  out.x_terminal = std::move(x_term);
  if (pc.with_y) out.y_terminal = std::move(y_term);
  out.realized_mean = DeterministicCurve(g, std::move(mean));
  out.realized_second_moment = DeterministicCurve(g, std::move(m2));
  out.effort = policy.a_star;
  out.path_cache_count = K;
  out.x_path_cache = std::move(x_cache);
  if (pc.with_y) out.y_path_cache = std::move(y_cache);
}

bool all_zero(const Penalties& p) {
  return p.lambda_x == 0.0 && p.lambda_xi == 0.0 && p.lambda_xxi == 0.0;
}

}  // namespace

const SimConfig& validate(const SimConfig& s) {
  if (s.particles < 2) throw validation_error("particles must be at least 2");
  if (!(s.fixed_point_tol >= 0.0))
    throw validation_error("fixed_point_tol must be nonnegative");
  if (s.fixed_point_max_iter < 1)
    throw validation_error("fixed_point_max_iter must be positive");
  return s;
}

ParticleEnsemble simulate_equilibrium(const MeanFieldModel& m,
                                      const PolicyPair& policy,
                                      const MomentCurves& moments,
                                      const SimConfig& sim) {
  validate(m);
  validate(sim);
  PassConfig pc;
  pc.running_mean = pc.running_variance = sim.mode == MeanFieldMode::particle;
  ParticleEnsemble out;
  run_pass(m, policy, moments, sim, pc, out);
  return out;
}

std::vector<double> simulate_continuation_utility(ParticleEnsemble& ensemble,
                                                  const MeanFieldModel& m,
                                                  const PolicyPair& policy,
                                                  const MomentCurves& moments) {
  if (!ensemble.has_increments)
    throw validation_error(
        "ensemble has no stored increments to integrate against");
  PassConfig pc;
  pc.with_y = true;
  pc.running_mean = pc.running_variance =
      ensemble.sim.mode == MeanFieldMode::particle;
  run_pass(m, policy, moments, ensemble.sim, pc, ensemble);
  return ensemble.y_terminal;
}

MomentCurves fixed_point_meanfield(const MeanFieldModel& m,
                                   const PolicyPair& policy,
                                   const SimConfig& sim, FixedPointInfo* info) {
  validate(m);
  validate(sim);
  if (sim.mode != MeanFieldMode::particle)
    throw validation_error("fixed-point iteration needs particle mode");
  const TimeGrid& g = sim.grid;
  DeterministicCurve frozen = DeterministicCurve::from_function(
      g, [&](double) { return m.v0; });
  DeterministicCurve prev_mean, prev_var;
  double residual = 0.0;
  for (int pass = 1; pass <= sim.fixed_point_max_iter; ++pass) {
    PassConfig pc;
    pc.running_mean = true;
    pc.frozen_variance = &frozen;
    ParticleEnsemble e;
    run_pass(m, policy, MomentCurves{}, sim, pc, e);
    std::vector<double> var(g.num_points());
    for (int k = 0; k <= g.steps; ++k) {
      double mu = e.realized_mean.values[k];
      var[k] = e.realized_second_moment.values[k] - mu * mu;
    }
    DeterministicCurve var_curve(g, std::move(var));
    if (pass >= 2) {
      residual = std::max(e.realized_mean.sup_distance(prev_mean),
                          var_curve.sup_distance(prev_var));
      if (residual <= sim.fixed_point_tol) {
        if (info != nullptr) {
          info->iterations = pass - 1;
          info->residual = residual;
        }
        MomentCurves out;
        out.f = e.realized_mean;
        out.g = e.realized_second_moment;
        return out;
      }
    }
    for (int k = 0; k <= g.steps; ++k)
      frozen.values[k] = 0.5 * frozen.values[k] + 0.5 * var_curve.values[k];
    prev_mean = e.realized_mean;
    prev_var = var_curve;
  }
  char msg[128];
  std::snprintf(msg, sizeof msg,
                "fixed-point iteration did not converge; last residual %.17g",
                residual);
  throw convergence_error(msg, residual);
}

Estimate agent_utility(const MeanFieldModel& m,
                       const DeterministicCurve& effort,
                       const MomentCurves& moments,
                       const ContractSpec& contract, const SimConfig& sim) {
  validate(m);
  validate(sim);
  const TimeGrid& g = sim.grid;
  const int S = g.steps;
  const int M = sim.particles;
  const double dt = g.dt();
  const double q = 1.0 / (m.n - 1.0);

  // Deterministic effort cost, Simpson per grid cell (the integrand is
  // smooth inside each cell of the piecewise-linear curve).
  double cost_int = 0.0;
  for (int k = 0; k < S; ++k) {
    double t = g.point(k);
    cost_int += dt / 6.0 *
                (cost(effort(t), m) + 4.0 * cost(effort(t + 0.5 * dt), m) +
                 cost(effort(t + dt), m));
  }

  // Exact Gaussian stepping: the frozen mean field keeps the deviating
  // drift affine with deterministic source
  // effort(t) + beta1 f(t) + beta2 qbar(t) - gamma V(t).
  double e_ad = std::exp(m.alpha * dt);
  double var_i = S == 0 ? 0.0
                 : m.alpha == 0.0
                     ? dt
                     : std::expm1(2.0 * m.alpha * dt) / (2.0 * m.alpha);
  double s_i = std::sqrt(var_i);
  const double gn[3] = {0.5 - 0.3872983346207417, 0.5,
                        0.5 + 0.3872983346207417};
  const double gw[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
  std::vector<double> det(S), z_mid(S), trapz_w(S + 1);
  for (int k = 0; k < S; ++k) {
    double t = g.point(k);
    double d = 0.0;
    for (int j = 0; j < 3; ++j) {
      double u = t + dt * gn[j];
      double qbar = std::pow(contract.z_star(u) / m.c, q);
      double src = effort(u) + m.beta1 * moments.f(u) + m.beta2 * qbar -
                   m.gamma * moments.variance(u);
      d += gw[j] * src * std::exp(m.alpha * dt * (1.0 - gn[j]));
    }
    det[k] = d * dt;
    z_mid[k] = contract.z_star(t + 0.5 * dt);
  }
  for (int k = 0; k <= S; ++k) {
    double t = g.point(k);
    trapz_w[k] =
        contract.z_star(t) * dt * ((k == 0 || k == S) ? 0.5 : 1.0);
  }

  double acc = 0.0, acc2 = 0.0;
  for (int i = 0; i < M; ++i) {
    double x = initial_state(m, sim, i);
    double xi = contract.delta;
    double zx = trapz_w[0] * x;
    for (int k = 0; k < S; ++k) {
      double g1 = rng::normal(sim.seed, (uint64_t)i, (uint64_t)k, 0);
      double xn = e_ad * x + det[k] + m.sigma * s_i * g1;
      xi += z_mid[k] * (xn - x);
      x = xn;
      zx += trapz_w[k + 1] * x;
    }
    // xi = delta + int z dX - alpha int z X dt, the pathwise variable part.
    xi -= m.alpha * zx;
    double u = xi - cost_int;
    acc += u;
    acc2 += u * u;
  }
  double mean = acc / M;
  double var = (acc2 - M * mean * mean) / (M - 1);
  return Estimate{mean, std::sqrt(var / M)};
}

Estimate principal_objective(const ParticleEnsemble& ensemble,
                             const std::vector<double>& xi,
                             const MeanFieldModel&,
                             const Penalties* penalties) {
  if (xi.size() != ensemble.x_terminal.size())
    throw validation_error("contract samples do not match the ensemble");
  const int M = (int)xi.size();
  if (M < 2) throw validation_error("need at least two samples");
  double xbar = 0.0, xibar = 0.0, dbar = 0.0;
  for (int i = 0; i < M; ++i) {
    xbar += ensemble.x_terminal[i];
    xibar += xi[i];
    dbar += ensemble.x_terminal[i] - xi[i];
  }
  xbar /= M;
  xibar /= M;
  dbar /= M;
  if (penalties == nullptr || all_zero(*penalties)) {
    double s = 0.0;
    for (int i = 0; i < M; ++i) {
      double d = ensemble.x_terminal[i] - xi[i] - dbar;
      s += d * d;
    }
    return Estimate{dbar, std::sqrt(s / (M - 1) / M)};
  }
  const Penalties& p = *penalties;
  double vx = 0.0, vxi = 0.0, vd = 0.0;
  for (int i = 0; i < M; ++i) {
    double ex = ensemble.x_terminal[i] - xbar;
    double exi = xi[i] - xibar;
    double ed = ensemble.x_terminal[i] - xi[i] - dbar;
    vx += ex * ex;
    vxi += exi * exi;
    vd += ed * ed;
  }
  vx /= M - 1;
  vxi /= M - 1;
  vd /= M - 1;
  double value =
      dbar - p.lambda_x * vx - p.lambda_xi * vxi - p.lambda_xxi * vd;
  // Delta-method standard error from per-sample influence values.
  double iacc = 0.0, iacc2 = 0.0;
  for (int i = 0; i < M; ++i) {
    double ex = ensemble.x_terminal[i] - xbar;
    double exi = xi[i] - xibar;
    double ed = ensemble.x_terminal[i] - xi[i] - dbar;
    double infl = (ensemble.x_terminal[i] - xi[i]) - p.lambda_x * ex * ex -
                  p.lambda_xi * exi * exi - p.lambda_xxi * ed * ed;
    iacc += infl;
    iacc2 += infl * infl;
  }
  double imean = iacc / M;
  double ivar = (iacc2 - M * imean * imean) / (M - 1);
  return Estimate{value, std::sqrt(ivar / M)};
}

}  // namespace mfcl
