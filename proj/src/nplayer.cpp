#include "mfcl/nplayer.hpp"

#include <cmath>

#include "mfcl/numerics.hpp"
#include "mfcl/rng.hpp"

namespace mfcl {

namespace {

constexpr uint64_t kInitStep = ~0ull;   // step id of the initial-state draw
constexpr uint64_t kAvgPlayer = ~0ull;  // player id of the average's noise
// Key tags for the mean-field reference samples, disjoint from game indices.
constexpr uint64_t kMfPool = 1ull << 40;
constexpr uint64_t kMfFloorA = 2ull << 40;
constexpr uint64_t kMfFloorB = 3ull << 40;

const MeanFieldModel& check_nplayer(const MeanFieldModel& m) {
  validate(m);
  if (m.beta2 != 0.0)
    throw validation_error("beta2 must be 0 in the N-player model");
  if (m.gamma != 0.0)
    throw validation_error("gamma must be 0 in the N-player model");
  return m;
}

const MeanFieldModel& check_quadratic(const MeanFieldModel& m) {
  if (m.n != 2.0)
    throw validation_error("n must be 2 in the N-player model");
  return m;
}

// One game of the exact two-level scheme (average exactly, deviations
// exactly given the average), or joint Euler when euler = true. Writes
// N x (steps+1) node values into xg, player-major.
void simulate_one_game(const MeanFieldModel& m, const TimeGrid& g,
                       uint64_t seed, uint64_t game, int N, bool euler,
                       double* xg) {
  const int S = g.steps;
  const double dt = g.dt();
  const double k_ = kappa(m);
  const double sqv0 = std::sqrt(m.v0);

  std::vector<double> psi(N);
  double mbar = 0.0;
  for (int i = 0; i < N; ++i) {
    psi[i] = m.m0;
    if (m.v0 > 0.0)
      psi[i] += sqv0 * rng::normal(seed, game, (uint64_t)i, kInitStep);
    mbar += psi[i];
    xg[(size_t)i * (S + 1)] = psi[i];
  }
  mbar /= N;

  std::vector<double> gbuf(N);
  if (euler) {
    std::vector<double> x = psi;
    double sdt = std::sqrt(dt);
    for (int k = 0; k < S; ++k) {
      double t = g.point(k);
      double a_t = std::exp(k_ * (m.T - t)) / m.c;
      double sum = 0.0;
      for (int i = 0; i < N; ++i) sum += x[i];
      for (int i = 0; i < N; ++i) {
        double gi = rng::normal(seed, game, (uint64_t)i, (uint64_t)k);
        x[i] += (a_t + m.alpha * x[i] + m.beta1 * sum / N) * dt +
                m.sigma * sdt * gi;
        xg[(size_t)i * (S + 1) + k + 1] = x[i];
      }
    }
    return;
  }

  std::vector<double> dev(N);
  for (int i = 0; i < N; ++i) dev[i] = psi[i] - mbar;
  double e_kd = std::exp(k_ * dt);
  double e_ad = std::exp(m.alpha * dt);
  double s_k = std::sqrt(iexp(2.0 * k_, dt));
  double s_a = std::sqrt(iexp(2.0 * m.alpha, dt));
  double avg_noise = m.sigma / std::sqrt((double)N) * s_k;
  for (int k = 0; k < S; ++k) {
    double t = g.point(k);
    // int_0^dt e^{kappa (dt-u)} e^{kappa (T-t-u)}/c du in closed form.
    double det = std::exp(k_ * (m.T - t + dt)) * iexp(-2.0 * k_, dt) / m.c;
    double eps = rng::normal(seed, game, kAvgPlayer, (uint64_t)k);
    mbar = e_kd * mbar + det + avg_noise * eps;
    double gsum = 0.0;
    for (int i = 0; i < N; ++i) {
      gbuf[i] = rng::normal(seed, game, (uint64_t)i, (uint64_t)k);
      gsum += gbuf[i];
    }
    double gmean = gsum / N;
    for (int i = 0; i < N; ++i) {
      dev[i] = e_ad * dev[i] + m.sigma * s_a * (gbuf[i] - gmean);
      xg[(size_t)i * (S + 1) + k + 1] = mbar + dev[i];
    }
  }
}

// Contracts of one game from its node values; out must hold N doubles.
void game_contracts(const double* xg, int N, const TimeGrid& g,
                    const MeanFieldModel& m, double* out) {
  const int S = g.steps;
  const double dt = g.dt();
  const double k_ = kappa(m);
  double fixed = m.R0 - iexp(2.0 * k_, m.T) / (2.0 * m.c);
  std::vector<double> mean_k(S + 1, 0.0), w(S + 1);
  for (int k = 0; k <= S; ++k) {
    for (int i = 0; i < N; ++i) mean_k[k] += xg[(size_t)i * (S + 1) + k];
    mean_k[k] /= N;
    w[k] = std::exp(k_ * (m.T - g.point(k)));
  }
  for (int i = 0; i < N; ++i) {
    const double* xi = xg + (size_t)i * (S + 1);
    double drift_sum = 0.0, ito_sum = 0.0;
    for (int k = 0; k <= S; ++k) {
      double tw = dt * ((k == 0 || k == S) ? 0.5 : 1.0);
      drift_sum += tw * w[k] * (m.alpha * xi[k] + m.beta1 * mean_k[k]);
    }
    for (int k = 0; k < S; ++k) ito_sum += w[k] * (xi[k + 1] - xi[k]);
    out[i] = fixed - drift_sum + ito_sum;
  }
}

}  // namespace

const NPlayerConfig& validate(const NPlayerConfig& c) {
  if (c.N < 1) throw validation_error("N must be at least 1");
  if (c.games < 1) throw validation_error("games must be at least 1");
  return c;
}

std::vector<std::vector<double>> interaction_matrix(int N,
                                                    const MeanFieldModel& m) {
  check_nplayer(m);
  if (N < 1) throw validation_error("N must be at least 1");
  std::vector<std::vector<double>> b(N, std::vector<double>(N, m.beta1 / N));
  for (int i = 0; i < N; ++i) b[i][i] += m.alpha;
  return b;
}

NPlayerPolicy nplayer_policy(const MeanFieldModel& m) {
  return nplayer_policy(m, default_grid(m));
}

NPlayerPolicy nplayer_policy(const MeanFieldModel& m, const TimeGrid& grid) {
  check_quadratic(check_nplayer(m));
  double k_ = kappa(m);
  NPlayerPolicy p;
  p.z_diag = DeterministicCurve::from_function(
      grid, [&](double t) { return std::exp(k_ * (m.T - t)); });
  p.a = DeterministicCurve::from_function(
      grid, [&](double t) { return std::exp(k_ * (m.T - t)) / m.c; });
  return p;
}

NPlayerPaths simulate_nplayer(const MeanFieldModel& m, const NPlayerConfig& c,
                              bool euler) {
  check_quadratic(check_nplayer(m));
  validate(c);
  NPlayerPaths paths;
  paths.N = c.N;
  paths.games = c.games;
  paths.grid = c.grid;
  paths.has_increments = true;
  paths.x.resize((size_t)c.games * c.N * (c.grid.steps + 1));
  for (int g = 0; g < c.games; ++g)
    simulate_one_game(m, c.grid, c.seed, (uint64_t)g, c.N, euler,
                      paths.x.data() + (size_t)g * c.N * (c.grid.steps + 1));
  return paths;
}

std::vector<std::vector<double>> nplayer_contract(const NPlayerPaths& paths,
                                                  const MeanFieldModel& m) {
  check_quadratic(check_nplayer(m));
  if (!paths.has_increments || paths.x.empty())
    throw validation_error("paths have no stored increments");
  std::vector<std::vector<double>> out(paths.games,
                                       std::vector<double>(paths.N));
  for (int g = 0; g < paths.games; ++g)
    game_contracts(
        paths.x.data() + (size_t)g * paths.N * (paths.grid.steps + 1),
        paths.N, paths.grid, m, out[g].data());
  return out;
}

double nplayer_value(double t, const std::vector<double>& x,
                     const std::vector<double>& y, const MeanFieldModel& m) {
  check_quadratic(check_nplayer(m));
  if (x.empty() || x.size() != y.size())
    throw validation_error("state vectors must be nonempty and equal length");
  double xbar = 0.0, ybar = 0.0;
  for (double v : x) xbar += v;
  for (double v : y) ybar += v;
  xbar /= (double)x.size();
  ybar /= (double)y.size();
  double k_ = kappa(m);
  double tau = m.T - t;
  return std::exp(k_ * tau) * xbar + iexp(2.0 * k_, tau) / (2.0 * m.c) - ybar;
}

double nplayer_pde_residual(double t, const std::vector<double>& x,
                            const std::vector<double>& y,
                            const MeanFieldModel& m) {
  const int N = (int)x.size();
  double dt_v = central_diff(
      [&](double s) { return nplayer_value(s, x, y, m); }, t);
  double xsum = 0.0;
  for (double v : x) xsum += v;
  double drift_term = 0.0, diff_term = 0.0, sup_term = 0.0;
  for (int i = 0; i < N; ++i) {
    std::vector<double> xp = x;
    double dxi = central_diff(
        [&](double v) {
          xp[i] = v;
          return nplayer_value(t, xp, y, m);
        },
        x[i]);
    double dxixi = second_diff(
        [&](double v) {
          xp[i] = v;
          return nplayer_value(t, xp, y, m);
        },
        x[i]);
    std::vector<double> yp = y;
    double dyi = central_diff(
        [&](double v) {
          yp[i] = v;
          return nplayer_value(t, x, yp, m);
        },
        y[i]);
    drift_term += (m.alpha * x[i] + m.beta1 * xsum / N) * dxi;
    diff_term += 0.5 * m.sigma * m.sigma * dxixi;
    // sup over effort a of (dxi a + dyi cost(a)): the agent cost enters
    // through the y-coordinate, dyi < 0, maximum at a = -dxi/(c dyi).
    sup_term += -dxi * dxi / (2.0 * m.c * dyi);
  }
  return -dt_v - drift_term - diff_term - sup_term;
}

std::vector<ConvergenceRow> convergence_experiment(const MeanFieldModel& m,
                                                   const std::vector<int>& Ns,
                                                   const NPlayerConfig& c) {
  check_quadratic(check_nplayer(m));
  validate(c);
  GaussianLaw law = contract_spec(m).law;
  double sd = std::sqrt(law.variance);
  std::vector<ConvergenceRow> rows;
  rows.reserve(Ns.size());
  for (size_t r = 0; r < Ns.size(); ++r) {
    int N = Ns[r];
    if (N < 1) throw validation_error("N must be at least 1");
    const int S = c.grid.steps;
    std::vector<double> xg((size_t)N * (S + 1)), contracts(N);
    std::vector<double> pooled(c.games);
    for (int g = 0; g < c.games; ++g) {
      simulate_one_game(m, c.grid, c.seed, (uint64_t)g, N, false, xg.data());
      game_contracts(xg.data(), N, c.grid, m, contracts.data());
      pooled[g] = contracts[0];
    }
    auto mf_sample = [&](uint64_t tag) {
      std::vector<double> s(c.games);
      for (int i = 0; i < c.games; ++i)
        s[i] = law.mean + sd * rng::normal(c.seed, tag + r, (uint64_t)i, 0);
      return s;
    };
    ConvergenceRow row;
    row.N = N;
    row.samples = c.games;
    row.w1 = wasserstein1(pooled, mf_sample(kMfPool));
    row.w1_noise_floor = wasserstein1(mf_sample(kMfFloorA),
                                      mf_sample(kMfFloorB));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace mfcl
