#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mfcl {

// Thrown on malformed inputs (parameter domains, config schema). CLI maps it to exit 2.
struct validation_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when an iterative scheme exhausts its budget. CLI maps it to exit 3.
struct convergence_error : std::runtime_error {
  convergence_error(const std::string& msg, double res)
      : std::runtime_error(msg), residual(res) {}
  double residual;
};

// Parameters of the linear-interaction model with power cost c(a) = c |a|^n / n.
// Drift of the output: a + alpha x + beta1 E[x] + beta2 E[effort] - gamma Var[x].
struct MeanFieldModel {
  double alpha = 0.0;
  double beta1 = 0.0;
  double beta2 = 0.0;
  double gamma = 0.0;
  double sigma = 1.0;
  double c = 1.0;
  double n = 2.0;
  double T = 1.0;
  double R0 = 0.0;  // agent reservation value
  double m0 = 0.0;  // initial mean of the output
  double v0 = 0.0;  // initial variance of the output
};

// Variance penalties in the risk-averse principal objective.
struct Penalties {
  double lambda_x = 0.0;    // on Var[X_T]
  double lambda_xi = 0.0;   // on Var[xi]
  double lambda_xxi = 0.0;  // on Var[X_T - xi]
};

// Returns its argument if every constraint holds, otherwise throws a
// validation_error naming the violated constraint. Idempotent.
const MeanFieldModel& validate(const MeanFieldModel& m);
const Penalties& validate(const Penalties& p);

// Aggregate mean-reversion rate alpha + beta1.
double kappa(const MeanFieldModel& m);

// Degenerate-parameter branches, detected with absolute threshold 1e-12.
enum class Branch { kappa_zero, alpha_zero, alpha_equals_beta1, generic };
Branch branch_of(const MeanFieldModel& m);
const char* branch_name(Branch b);

// Uniform grid on [0, T]. steps = 0 collapses to the single point {0} (used by
// the T = 0 degenerate horizon).
struct TimeGrid {
  TimeGrid() = default;
  TimeGrid(double horizon, int n_steps);
  double T = 1.0;
  int steps = 1000;
  double dt() const { return steps == 0 ? 0.0 : T / steps; }
  int num_points() const { return steps + 1; }
  double point(int k) const { return steps == 0 ? 0.0 : T * k / steps; }
};

// Samples of a deterministic time function on a grid, linear between nodes.
struct DeterministicCurve {
  TimeGrid grid;
  std::vector<double> values;

  DeterministicCurve() = default;
  DeterministicCurve(const TimeGrid& g, std::vector<double> v);
  template <class F>
  static DeterministicCurve from_function(const TimeGrid& g, F&& f) {
    std::vector<double> v(g.num_points());
    for (int k = 0; k < g.num_points(); ++k) v[k] = f(g.point(k));
    return DeterministicCurve(g, std::move(v));
  }
  double operator()(double t) const;
  double sup_distance(const DeterministicCurve& other) const;
};

struct GaussianLaw {
  double mean = 0.0;
  double variance = 0.0;  // >= 0
};

}  // namespace mfcl
