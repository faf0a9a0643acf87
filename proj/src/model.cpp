#include "mfcl/model.hpp"

#include <cmath>

namespace mfcl {

namespace {
constexpr double kBranchTol = 1e-12;

void require(bool ok, const char* msg) {
  if (!ok) throw validation_error(msg);
}
}  // namespace

const MeanFieldModel& validate(const MeanFieldModel& m) {
  require(std::isfinite(m.alpha) && m.alpha >= 0.0 && m.alpha < 0.5,
          "alpha must lie in [0, 0.5)");
  require(std::isfinite(m.beta1) && m.beta1 >= 0.0, "beta1 must be nonnegative");
  require(std::isfinite(m.beta2) && m.beta2 >= 0.0, "beta2 must be nonnegative");
  require(std::isfinite(m.gamma) && m.gamma >= 0.0, "gamma must be nonnegative");
  require(std::isfinite(m.sigma) && m.sigma > 0.0, "sigma must be positive");
  require(std::isfinite(m.c) && m.c > 0.0, "c must be positive");
  require(std::isfinite(m.n) && m.n > 1.0, "n must exceed 1");
  // T = 0 is the degenerate empty horizon; every closed form collapses cleanly.
  require(std::isfinite(m.T) && m.T >= 0.0, "T must be nonnegative");
  require(std::isfinite(m.R0), "R0 must be finite");
  require(std::isfinite(m.m0), "m0 must be finite");
  require(std::isfinite(m.v0) && m.v0 >= 0.0, "v0 must be nonnegative");
  return m;
}

const Penalties& validate(const Penalties& p) {
  require(std::isfinite(p.lambda_x) && p.lambda_x >= 0.0,
          "lambda_x must be nonnegative");
  require(std::isfinite(p.lambda_xi) && p.lambda_xi >= 0.0,
          "lambda_xi must be nonnegative");
  require(std::isfinite(p.lambda_xxi) && p.lambda_xxi >= 0.0,
          "lambda_xxi must be nonnegative");
  return p;
}

double kappa(const MeanFieldModel& m) { return m.alpha + m.beta1; }

Branch branch_of(const MeanFieldModel& m) {
  if (kappa(m) <= kBranchTol) return Branch::kappa_zero;
  if (m.alpha <= kBranchTol) return Branch::alpha_zero;
  if (std::fabs(m.alpha - m.beta1) <= kBranchTol) return Branch::alpha_equals_beta1;
  return Branch::generic;
}

const char* branch_name(Branch b) {
  switch (b) {
    case Branch::kappa_zero: return "kappa_zero";
    case Branch::alpha_zero: return "alpha_zero";
    case Branch::alpha_equals_beta1: return "alpha_equals_beta1";
    default: return "generic";
  }
}

TimeGrid::TimeGrid(double horizon, int n_steps) : T(horizon), steps(n_steps) {
  if (!(std::isfinite(T) && T >= 0.0)) throw validation_error("T must be nonnegative");
  if (T == 0.0) {
    steps = 0;
    return;
  }
  if (steps < 1) throw validation_error("grid steps must be positive");
}

DeterministicCurve::DeterministicCurve(const TimeGrid& g, std::vector<double> v)
    : grid(g), values(std::move(v)) {
  if ((int)values.size() != grid.num_points())
    throw validation_error("curve values must match the grid size");
}

double DeterministicCurve::operator()(double t) const {
  if (grid.steps == 0) return values[0];
  if (t <= 0.0) return values.front();
  if (t >= grid.T) return values.back();
  double s = t / grid.dt();
  int k = (int)s;
  if (k >= grid.steps) k = grid.steps - 1;
  double w = s - k;
  return (1.0 - w) * values[k] + w * values[k + 1];
}

double DeterministicCurve::sup_distance(const DeterministicCurve& other) const {
  if (values.size() != other.values.size())
    throw validation_error("curves must share a grid");
  double d = 0.0;
  for (size_t i = 0; i < values.size(); ++i)
    d = std::max(d, std::fabs(values[i] - other.values[i]));
  return d;
}

}  // namespace mfcl
