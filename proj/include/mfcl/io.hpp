#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mfcl/mfg_sim.hpp"
#include "mfcl/model.hpp"

namespace mfcl {

// Parsed experiment file. JSON with strict keys: unknown keys anywhere are
// rejected. Blocks: model (required), penalties (optional), sim (optional,
// defaults below), nplayer (optional, needed by the nplayer command),
// output_dir (required unless overridden on the command line).
struct ExperimentConfig {
  MeanFieldModel model;
  bool has_penalties = false;
  Penalties penalties;
  SimConfig sim;  // grid rebuilt from model.T and sim_steps
  int sim_steps = 1000;
  bool has_nplayer = false;
  std::vector<int> nplayer_Ns;
  int nplayer_games = 10000;
  uint64_t nplayer_seed = 42;
  int nplayer_steps = 100;
  std::string output_dir;
};

ExperimentConfig load_config(const std::string& path);

// Command-line overrides: seed replaces every block's seed, out_dir replaces
// output_dir when nonempty.
void apply_overrides(ExperimentConfig& cfg, bool has_seed, uint64_t seed,
                     const std::string& out_dir);

// 17-significant-digit decimal form, round-trip exact.
std::string fmt17(double x);

// Commands. Each writes its files into cfg.output_dir plus a run_meta.json
// (timestamp/host, excluded from reproducibility comparisons) and returns
// the process exit code: 0 success, 4 failed verification (hjb only).
// Validation problems throw validation_error (exit 2 in main), iteration
// budget exhaustion throws convergence_error (exit 3).
int cmd_solve(const ExperimentConfig& cfg);
int cmd_simulate(const ExperimentConfig& cfg);
int cmd_nplayer(const ExperimentConfig& cfg);
int cmd_sensitivity(const ExperimentConfig& cfg);
int cmd_hjb(const ExperimentConfig& cfg, double perturb);

}  // namespace mfcl
