#pragma once

#include <utility>

#include "mfcl/hamiltonian.hpp"
#include "mfcl/model.hpp"

namespace mfcl {

// Sampling grid used when the caller does not supply one: 1000 uniform steps
// (0 steps for the degenerate T = 0 horizon).
TimeGrid default_grid(const MeanFieldModel& m);

// Optimal deterministic policy curves.
struct PolicyPair {
  DeterministicCurve z_star;
  DeterministicCurve a_star;
};

// Pointwise closed forms: z*(t) = (1+beta2) e^{kappa (T-t)} and
// a*(t) = (z*(t)/c)^{1/(n-1)}.
double z_star_at(double t, const MeanFieldModel& m);
double a_star_at(double t, const MeanFieldModel& m);

PolicyPair optimal_policy(const MeanFieldModel& m);
PolicyPair optimal_policy(const MeanFieldModel& m, const TimeGrid& grid);

// First two moments of the output under the optimally controlled dynamics.
struct MomentCurves {
  DeterministicCurve f;  // mean
  DeterministicCurve g;  // second moment
  double variance(double t) const {
    double ft = f(t);
    return g(t) - ft * ft;
  }
};

// Coefficients of the closed form
// f(t) = l1 e^{kappa t} + l2 e^{-kappa t/(n-1)} + l3 e^{2 alpha t} + l4,
// defined off the degenerate branches (kappa > 0, alpha > 0, alpha != beta1).
struct MomentLambdas {
  double l1 = 0.0, l2 = 0.0, l3 = 0.0, l4 = 0.0;
};
MomentLambdas moment_lambdas(const MeanFieldModel& m);

// f and g on the policy grid. With the optimal policy in the nondegenerate
// branch this is the lambda closed form; otherwise RK4 on the ODE pair
//   f' = (1+beta2) a(t) + kappa f - gamma (g - f^2),
//   g' = 2 alpha g + 2 f (f' - alpha f) + sigma^2.
MomentCurves moment_curves(const MeanFieldModel& m, const PolicyPair& policy);

// Pointwise analytic evaluators valid in every branch; quadrature integrands
// and simulation drift sources use these rather than sampled curves.
double mean_at(double t, const MeanFieldModel& m);
double variance_at(double t, const MeanFieldModel& m);
double second_moment_at(double t, const MeanFieldModel& m);

// Fixed salary plus the Gaussian law of the optimal contract.
struct ContractSpec {
  double delta = 0.0;
  // Canonical law from the integral representation:
  // mean = R0 + int_0^T cost(a*) dt, variance = sigma^2 int_0^T z*^2 dt.
  GaussianLaw law;
  // Variant constants carried in reporting output; they drop the time
  // integration factors (n-1)/(kappa n) c^{-1/(n-1)} and 1/(2 kappa) and
  // disagree with the Monte Carlo law, so they are never used downstream.
  GaussianLaw displayed;
  DeterministicCurve z_star;
};
ContractSpec contract_spec(const MeanFieldModel& m);

// Closed-form salary constant, valid when alpha > 0 and alpha != beta1.
// Cross-check for contract_spec().delta.
double delta_closed_form(const MeanFieldModel& m);

// Value function of the principal on moment coordinates: m1 and m2 are the
// means of the output and of the agent continuation utility, var1 the output
// variance. Equals m1 - m2 at t = T.
double principal_value(double t, double m1, double m2, double var1,
                       const MeanFieldModel& m);

// Variance-penalized counterpart: z* from maximize_h on each grid node.
// All-zero penalties short-circuit to (optimal_policy, contract_spec).
std::pair<PolicyPair, ContractSpec> risk_averse_solution(
    const MeanFieldModel& m, const Penalties& p);

// Quadratic-cost (n = 2) closed form of the penalized sensitivity
// z*(t) = [(1+beta2) e^{kappa (T-t)} + 2 c lambda_xxi sigma^2 e^{alpha (T-t)}]
//         / (1 + 2 (lambda_xi + lambda_xxi) c sigma^2).
double risk_averse_z_star_at(double t, const MeanFieldModel& m,
                             const Penalties& p);

}  // namespace mfcl
