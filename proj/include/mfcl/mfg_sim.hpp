#pragma once

#include <cstdint>
#include <vector>

#include "mfcl/closed_form.hpp"
#include "mfcl/model.hpp"

namespace mfcl {

// analytic: drift reads the closed-form moment curves.
// particle: drift reads the running empirical mean and variance.
enum class MeanFieldMode { analytic, particle };

struct SimConfig {
  int particles = 100000;  // M >= 2
  TimeGrid grid;
  uint64_t seed = 42;
  MeanFieldMode mode = MeanFieldMode::analytic;
  double fixed_point_tol = 1e-3;
  int fixed_point_max_iter = 50;
};
const SimConfig& validate(const SimConfig& s);

// Monte Carlo estimate with its standard error.
struct Estimate {
  double value = 0.0;
  double standard_error = 0.0;
};

// Simulated particle system. Whole-path arrays for every particle would be
// M x (steps+1) doubles, so only terminal slices, realized moment curves and
// a small whole-path cache are stored; the counter RNG keyed by
// (seed, particle, step) makes every increment regenerable, recorded by
// has_increments.
struct ParticleEnsemble {
  MeanFieldModel model;
  SimConfig sim;
  bool exact_stepping = false;
  bool has_increments = false;
  std::vector<double> x_terminal;
  std::vector<double> y_terminal;  // filled by simulate_continuation_utility
  DeterministicCurve realized_mean;
  DeterministicCurve realized_second_moment;
  DeterministicCurve effort;  // effort curve the particles applied
  // First path_cache_count whole paths, for pathwise checks.
  int path_cache_count = 0;
  std::vector<std::vector<double>> x_path_cache;
  std::vector<std::vector<double>> y_path_cache;
};

// Forward simulation of the output under the given policy. Exact
// Gaussian transitions (affine drift integrated per step) when gamma = 0 in
// analytic mode, Euler-Maruyama otherwise. In particle mode the drift reads
// the running empirical mean/variance instead of the moment curves.
ParticleEnsemble simulate_equilibrium(const MeanFieldModel& m,
                                      const PolicyPair& policy,
                                      const MomentCurves& moments,
                                      const SimConfig& sim);

// Second pass over the same increments accumulating the continuation
// utility Y (Y_0 = R0, dY = cost(a*(t)) dt + z*(t) sigma dW under the
// optimal measure); fills y_terminal and the y path cache and returns the
// contract samples xi = Y_T. Requires has_increments.
std::vector<double> simulate_continuation_utility(ParticleEnsemble& ensemble,
                                                  const MeanFieldModel& m,
                                                  const PolicyPair& policy,
                                                  const MomentCurves& moments);

struct FixedPointInfo {
  int iterations = 0;    // Picard updates after the initial pass
  double residual = 0.0; // last sup-norm change between passes
};

// Damped Picard iteration for the equilibrium moments in particle mode with
// common random numbers across passes: the mean couples self-consistently
// through the running empirical mean within each pass, while the
// gamma-variance drift term is frozen at the previous iterate and blended
// with weight 0.5. Stops when the sup-norm change of the realized mean and
// variance curves between successive passes is at most sim.fixed_point_tol;
// throws convergence_error with the last residual after
// sim.fixed_point_max_iter passes.
MomentCurves fixed_point_meanfield(const MeanFieldModel& m,
                                   const PolicyPair& policy,
                                   const SimConfig& sim,
                                   FixedPointInfo* info = nullptr);

// Utility of a representative agent deviating to the deterministic effort
// curve while the population stays at equilibrium: the state is simulated
// under the deviating drift (exact Gaussian steps; the frozen mean-field
// keeps it affine), the contract is evaluated pathwise from its salary and
// sensitivity, and the estimate is E[xi - int cost(effort)].
Estimate agent_utility(const MeanFieldModel& m,
                       const DeterministicCurve& effort,
                       const MomentCurves& moments,
                       const ContractSpec& contract, const SimConfig& sim);

// Sample mean of X_T - xi minus variance penalties when supplied. The
// standard error comes from the per-sample influence values, which reduces
// to sd(X_T - xi)/sqrt(M) without penalties.
Estimate principal_objective(const ParticleEnsemble& ensemble,
                             const std::vector<double>& xi,
                             const MeanFieldModel& m,
                             const Penalties* penalties = nullptr);

}  // namespace mfcl
