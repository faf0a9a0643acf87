#pragma once

#include <cstdint>
#include <vector>

#include "mfcl/closed_form.hpp"
#include "mfcl/model.hpp"

namespace mfcl {

struct NPlayerConfig {
  int N = 2;         // player count >= 1
  int games = 1000;  // independent replications >= 1
  uint64_t seed = 42;
  TimeGrid grid{1.0, 100};
};
const NPlayerConfig& validate(const NPlayerConfig& c);

// Simulated games. x is games x N x (steps+1), flattened; node values are
// enough to reconstruct every increment, recorded by has_increments.
struct NPlayerPaths {
  int N = 0;
  int games = 0;
  TimeGrid grid;
  bool has_increments = false;
  std::vector<double> x;
  std::vector<std::vector<double>> contracts;  // filled by nplayer_contract
  double x_at(int game, int player, int k) const {
    return x[((size_t)game * N + player) * (grid.steps + 1) + k];
  }
};

// Drift interaction matrix alpha I + (beta1/N) 1 (row sums kappa). The
// N-player model assumes beta2 = 0, gamma = 0 and rejects anything else.
std::vector<std::vector<double>> interaction_matrix(int N,
                                                    const MeanFieldModel& m);

// Equilibrium sensitivity (diagonal entry) and effort, identical across
// players and equal to the mean-field pair for beta2 = 0, n = 2:
// z_diag(t) = e^{kappa (T-t)}, a(t) = z_diag(t)/c. Quadratic cost only.
struct NPlayerPolicy {
  DeterministicCurve z_diag;
  DeterministicCurve a;
};
NPlayerPolicy nplayer_policy(const MeanFieldModel& m);
NPlayerPolicy nplayer_policy(const MeanFieldModel& m, const TimeGrid& grid);

// Simulates the N-player system under the equilibrium efforts. Exact
// two-level scheme: the average S/N is an OU process with source
// e^{kappa(T-t)}/c and rate kappa stepped exactly, the deviations from the
// average decay at rate alpha and are stepped exactly given the average
// (their noise is independent of the average's). euler = true runs a joint
// Euler-Maruyama discretization instead, as a cross-check that agrees in law
// to O(dt).
NPlayerPaths simulate_nplayer(const MeanFieldModel& m, const NPlayerConfig& c,
                              bool euler = false);

// Per-player terminal contracts from stored paths:
// xi^i = R0 - int e^{2 kappa (T-t)}/(2c) dt (exact)
//        - int e^{kappa (T-t)} (alpha x^i + beta1 mean(x)) dt (trapezoid)
//        + int e^{kappa (T-t)} dx^i (left-point pathwise sum).
// Returns contracts[game][player].
std::vector<std::vector<double>> nplayer_contract(const NPlayerPaths& paths,
                                                  const MeanFieldModel& m);

// Principal value of the N-player game on state (x, y):
// e^{kappa (T-t)} mean(x) + (e^{2 kappa (T-t)} - 1)/(4 kappa c) - mean(y),
// middle term continuous through kappa = 0 where it becomes (T-t)/(2c).
double nplayer_value(double t, const std::vector<double>& x,
                     const std::vector<double>& y, const MeanFieldModel& m);

// Residual of the dynamic-programming equation at (t, x, y) with every
// derivative of nplayer_value taken by central differences and the effort
// suprema in closed form per player. Zero (to difference accuracy) iff the
// substituted value solves the PDE.
double nplayer_pde_residual(double t, const std::vector<double>& x,
                            const std::vector<double>& y,
                            const MeanFieldModel& m);

struct ConvergenceRow {
  int N = 0;
  int samples = 0;
  double w1 = 0.0;              // pooled player-1 contracts vs mean-field draw
  double w1_noise_floor = 0.0;  // two independent mean-field draws
};

// For each N: simulate `c.games` independent games (streaming, paths
// discarded), pool the player-1 contracts, and measure the sorted-sample
// W1 distance to an equal-size sample from the mean-field contract law;
// the noise floor column re-measures W1 between two fresh mean-field
// samples of the same size.
std::vector<ConvergenceRow> convergence_experiment(const MeanFieldModel& m,
                                                   const std::vector<int>& Ns,
                                                   const NPlayerConfig& c);

}  // namespace mfcl
