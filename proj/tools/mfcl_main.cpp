// Command-line front end: solve, simulate, nplayer, sensitivity, hjb.
// Exit codes: 0 success, 2 invalid input, 3 fixed-point divergence,
// 4 verification failure.
#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "mfcl/io.hpp"
#include "mfcl/model.hpp"

int main(int argc, char** argv) {
  CLI::App app{"mean-field contract engine"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  uint64_t seed = 0;
  bool has_seed = false;
  double perturb = 0.0;

  const char* names[] = {"solve", "simulate", "nplayer", "sensitivity",
                         "hjb"};
  const char* descs[] = {
      "closed-form policy, moments, contract, and value",
      "Monte Carlo equilibrium and contract-law diagnostics",
      "finite-population convergence experiment",
      "parameter sensitivity signs",
      "verification of the value functional"};
  CLI::App* subs[5];
  for (int i = 0; i < 5; ++i) {
    CLI::App* sub = app.add_subcommand(names[i], descs[i]);
    sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--seed", seed, "override RNG seed")
        ->each([&](const std::string&) { has_seed = true; });
    sub->add_option("--out", out_dir, "override output directory");
    if (std::string(names[i]) == "hjb")
      sub->add_option("--perturb", perturb,
                      "add perturb*t to the value functional");
    subs[i] = sub;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    mfcl::ExperimentConfig cfg = mfcl::load_config(config_path);
    mfcl::apply_overrides(cfg, has_seed, seed, out_dir);
    if (subs[0]->parsed()) return mfcl::cmd_solve(cfg);
    if (subs[1]->parsed()) return mfcl::cmd_simulate(cfg);
    if (subs[2]->parsed()) return mfcl::cmd_nplayer(cfg);
    if (subs[3]->parsed()) return mfcl::cmd_sensitivity(cfg);
    return mfcl::cmd_hjb(cfg, perturb);
  } catch (const mfcl::convergence_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const mfcl::validation_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
