#include "mfcl/io.hpp"

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

#include "mfcl/closed_form.hpp"
#include "mfcl/hjb_check.hpp"
#include "mfcl/nplayer.hpp"
#include "mfcl/numerics.hpp"

namespace mfcl {

namespace {

using nlohmann::json;

void check_keys(const json& block, const char* name,
                const std::set<std::string>& allowed) {
  for (auto it = block.begin(); it != block.end(); ++it)
    if (allowed.find(it.key()) == allowed.end())
      throw validation_error("unknown key '" + it.key() + "' in " + name);
}

double jnum(const json& b, const char* key, double dflt) {
  if (!b.contains(key)) return dflt;
  if (!b[key].is_number())
    throw validation_error(std::string(key) + " must be a number");
  return b[key].get<double>();
}

int64_t jint(const json& b, const char* key, int64_t dflt) {
  if (!b.contains(key)) return dflt;
  if (!b[key].is_number_integer())
    throw validation_error(std::string(key) + " must be an integer");
  return b[key].get<int64_t>();
}

void write_file(const std::string& dir, const std::string& name,
                const std::string& content) {
  std::filesystem::create_directories(dir);
  std::string path = dir + "/" + name;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
  if (!out) throw std::runtime_error("cannot write " + path);
}

void write_run_meta(const std::string& dir, const char* command) {
  char stamp[64] = "unknown";
  std::time_t now = std::time(nullptr);
  std::tm tm_utc;
  if (gmtime_r(&now, &tm_utc) != nullptr)
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  char host[256] = "unknown";
  gethostname(host, sizeof host - 1);
  std::string j = "{\n  \"command\": \"";
  j += command;
  j += "\",\n  \"timestamp_utc\": \"";
  j += stamp;
  j += "\",\n  \"host\": \"";
  j += host;
  j += "\"\n}\n";
  write_file(dir, "run_meta.json", j);
}

std::string estimate_json(const Estimate& e) {
  return "{\"value\": " + fmt17(e.value) +
         ", \"standard_error\": " + fmt17(e.standard_error) + "}";
}

TimeGrid sim_grid(const ExperimentConfig& cfg) {
  return TimeGrid(cfg.model.T, cfg.model.T == 0.0 ? 0 : cfg.sim_steps);
}

}  // namespace

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open config: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw validation_error(std::string("config parse error: ") + e.what());
  }
  if (!j.is_object()) throw validation_error("config root must be an object");
  check_keys(j, "config",
             {"model", "penalties", "sim", "nplayer", "output_dir"});
  if (!j.contains("model"))
    throw validation_error("config needs a model block");

  ExperimentConfig cfg;
  const json& jm = j["model"];
  if (!jm.is_object()) throw validation_error("model must be an object");
  check_keys(jm, "model block",
             {"alpha", "beta1", "beta2", "gamma", "sigma", "c", "n", "T",
              "R0", "m0", "v0"});
  MeanFieldModel& m = cfg.model;
  m.alpha = jnum(jm, "alpha", m.alpha);
  m.beta1 = jnum(jm, "beta1", m.beta1);
  m.beta2 = jnum(jm, "beta2", m.beta2);
  m.gamma = jnum(jm, "gamma", m.gamma);
  m.sigma = jnum(jm, "sigma", m.sigma);
  m.c = jnum(jm, "c", m.c);
  m.n = jnum(jm, "n", m.n);
  m.T = jnum(jm, "T", m.T);
  m.R0 = jnum(jm, "R0", m.R0);
  m.m0 = jnum(jm, "m0", m.m0);
  m.v0 = jnum(jm, "v0", m.v0);
  validate(m);

  if (j.contains("penalties")) {
    const json& jp = j["penalties"];
    if (!jp.is_object()) throw validation_error("penalties must be an object");
    check_keys(jp, "penalties block", {"lambda_x", "lambda_xi", "lambda_xxi"});
    cfg.has_penalties = true;
    cfg.penalties.lambda_x = jnum(jp, "lambda_x", 0.0);
    cfg.penalties.lambda_xi = jnum(jp, "lambda_xi", 0.0);
    cfg.penalties.lambda_xxi = jnum(jp, "lambda_xxi", 0.0);
    validate(cfg.penalties);
  }

  if (j.contains("sim")) {
    const json& js = j["sim"];
    if (!js.is_object()) throw validation_error("sim must be an object");
    check_keys(js, "sim block",
               {"particles", "steps", "seed", "mode", "fixed_point_tol",
                "fixed_point_max_iter"});
    cfg.sim.particles = (int)jint(js, "particles", cfg.sim.particles);
    cfg.sim_steps = (int)jint(js, "steps", cfg.sim_steps);
    cfg.sim.seed = (uint64_t)jint(js, "seed", (int64_t)cfg.sim.seed);
    cfg.sim.fixed_point_tol =
        jnum(js, "fixed_point_tol", cfg.sim.fixed_point_tol);
    cfg.sim.fixed_point_max_iter =
        (int)jint(js, "fixed_point_max_iter", cfg.sim.fixed_point_max_iter);
    if (js.contains("mode")) {
      if (!js["mode"].is_string())
        throw validation_error("mode must be a string");
      std::string mode = js["mode"].get<std::string>();
      if (mode == "analytic")
        cfg.sim.mode = MeanFieldMode::analytic;
      else if (mode == "particle")
        cfg.sim.mode = MeanFieldMode::particle;
      else
        throw validation_error("mode must be 'analytic' or 'particle'");
    }
    if (cfg.sim_steps < 0) throw validation_error("steps must be nonnegative");
  }

  if (j.contains("nplayer")) {
    const json& jn = j["nplayer"];
    if (!jn.is_object()) throw validation_error("nplayer must be an object");
    check_keys(jn, "nplayer block", {"N", "Ns", "games", "seed", "steps"});
    cfg.has_nplayer = true;
    if (jn.contains("Ns")) {
      if (!jn["Ns"].is_array()) throw validation_error("Ns must be an array");
      for (const auto& v : jn["Ns"]) {
        if (!v.is_number_integer())
          throw validation_error("Ns entries must be integers");
        cfg.nplayer_Ns.push_back(v.get<int>());
      }
    }
    if (jn.contains("N")) cfg.nplayer_Ns.push_back((int)jint(jn, "N", 0));
    cfg.nplayer_games = (int)jint(jn, "games", cfg.nplayer_games);
    cfg.nplayer_seed = (uint64_t)jint(jn, "seed", (int64_t)cfg.nplayer_seed);
    cfg.nplayer_steps = (int)jint(jn, "steps", cfg.nplayer_steps);
  }

  if (j.contains("output_dir")) {
    if (!j["output_dir"].is_string())
      throw validation_error("output_dir must be a string");
    cfg.output_dir = j["output_dir"].get<std::string>();
  }
  cfg.sim.grid = sim_grid(cfg);
  validate(cfg.sim);
  return cfg;
}

void apply_overrides(ExperimentConfig& cfg, bool has_seed, uint64_t seed,
                     const std::string& out_dir) {
  if (has_seed) {
    cfg.sim.seed = seed;
    cfg.nplayer_seed = seed;
  }
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  if (cfg.output_dir.empty())
    throw validation_error("output_dir required (config or --out)");
}

int cmd_solve(const ExperimentConfig& cfg) {
  const MeanFieldModel& m = cfg.model;
  TimeGrid grid = sim_grid(cfg);
  PolicyPair policy = optimal_policy(m, grid);
  MomentCurves moments = moment_curves(m, policy);
  ContractSpec contract = contract_spec(m);

  std::string csv = "t,z_star,a_star\n";
  for (int k = 0; k <= grid.steps; ++k)
    csv += fmt17(grid.point(k)) + "," + fmt17(policy.z_star.values[k]) + "," +
           fmt17(policy.a_star.values[k]) + "\n";
  write_file(cfg.output_dir, "policy.csv", csv);

  csv = "t,f,g,variance\n";
  for (int k = 0; k <= grid.steps; ++k) {
    double f = moments.f.values[k];
    double g = moments.g.values[k];
    csv += fmt17(grid.point(k)) + "," + fmt17(f) + "," + fmt17(g) + "," +
           fmt17(g - f * f) + "\n";
  }
  write_file(cfg.output_dir, "moments.csv", csv);

  std::string cj = "{\n";
  cj += "  \"delta\": " + fmt17(contract.delta) + ",\n";
  cj += "  \"mean\": " + fmt17(contract.law.mean) + ",\n";
  cj += "  \"variance\": " + fmt17(contract.law.variance) + ",\n";
  cj += "  \"displayed_law\": {\"mean\": " + fmt17(contract.displayed.mean) +
        ", \"variance\": " + fmt17(contract.displayed.variance) + "}\n";
  cj += "}\n";
  write_file(cfg.output_dir, "contract.json", cj);

  double value = principal_value(0.0, m.m0, m.R0, m.v0, m);
  std::string vj = "{\n";
  vj += "  \"t\": 0,\n";
  vj += "  \"m1\": " + fmt17(m.m0) + ",\n";
  vj += "  \"m2\": " + fmt17(m.R0) + ",\n";
  vj += "  \"v1\": " + fmt17(m.v0) + ",\n";
  vj += "  \"value\": " + fmt17(value) + "\n";
  vj += "}\n";
  write_file(cfg.output_dir, "value.json", vj);
  write_run_meta(cfg.output_dir, "solve");
  return 0;
}

int cmd_simulate(const ExperimentConfig& cfg) {
  const MeanFieldModel& m = cfg.model;
  TimeGrid grid = sim_grid(cfg);
  SimConfig sim = cfg.sim;
  sim.grid = grid;
  PolicyPair policy = optimal_policy(m, grid);
  MomentCurves moments = moment_curves(m, policy);
  ContractSpec contract = contract_spec(m);

  bool particle = sim.mode == MeanFieldMode::particle;
  FixedPointInfo fp_info;
  MomentCurves sim_moments = moments;
  if (particle)
    sim_moments = fixed_point_meanfield(m, policy, sim, &fp_info);

  ParticleEnsemble ensemble = simulate_equilibrium(m, policy, sim_moments, sim);
  std::vector<double> xi =
      simulate_continuation_utility(ensemble, m, policy, sim_moments);

  Estimate at_star = agent_utility(m, policy.a_star, moments, contract, sim);
  const double shifts[4] = {-0.5, -0.2, 0.2, 0.5};
  std::string pj;
  for (int s = 0; s < 4; ++s) {
    double shift = shifts[s];
    DeterministicCurve effort = DeterministicCurve::from_function(
        grid, [&](double t) { return a_star_at(t, m) + shift; });
    Estimate e = agent_utility(m, effort, moments, contract, sim);
    if (s > 0) pj += ",\n";
    pj += "    {\"shift\": " + fmt17(shift) + ", \"value\": " + fmt17(e.value) +
          ", \"standard_error\": " + fmt17(e.standard_error) + "}";
  }
  Estimate objective = principal_objective(ensemble, xi, m, nullptr);
  double closed = principal_value(0.0, m.m0, m.R0, m.v0, m);

  std::string ej = "{\n";
  ej += "  \"R0\": " + fmt17(m.R0) + ",\n";
  ej += "  \"agent_utility\": " + estimate_json(at_star) + ",\n";
  ej += "  \"perturbations\": [\n" + pj + "\n  ],\n";
  ej += "  \"principal_objective\": " + estimate_json(objective) + ",\n";
  if (cfg.has_penalties) {
    Estimate pen = principal_objective(ensemble, xi, m, &cfg.penalties);
    ej += "  \"principal_objective_penalized\": " + estimate_json(pen) + ",\n";
  }
  if (particle) {
    ej += "  \"fixed_point\": {\"iterations\": " +
          std::to_string(fp_info.iterations) +
          ", \"residual\": " + fmt17(fp_info.residual) + "},\n";
  }
  ej += "  \"principal_value_closed\": " + fmt17(closed) + "\n";
  ej += "}\n";
  write_file(cfg.output_dir, "estimates.json", ej);

  SampleStats st = sample_stats(xi);
  double ks = ks_statistic(xi, contract.law.mean, contract.law.variance);
  double pval = kolmogorov_pvalue(ks, (double)xi.size());
  std::string gj = "{\n";
  gj += "  \"mean\": " + fmt17(st.mean) + ",\n";
  gj += "  \"standard_error_mean\": " + fmt17(st.se_mean) + ",\n";
  gj += "  \"variance\": " + fmt17(st.variance) + ",\n";
  gj += "  \"standard_error_variance\": " + fmt17(st.se_variance) + ",\n";
  gj += "  \"law_mean\": " + fmt17(contract.law.mean) + ",\n";
  gj += "  \"law_variance\": " + fmt17(contract.law.variance) + ",\n";
  gj += "  \"skewness\": " + fmt17(st.skewness) + ",\n";
  gj += "  \"standard_error_skewness\": " + fmt17(st.se_skewness) + ",\n";
  gj += "  \"excess_kurtosis\": " + fmt17(st.excess_kurtosis) + ",\n";
  gj += "  \"standard_error_kurtosis\": " + fmt17(st.se_kurtosis) + ",\n";
  gj += "  \"ks_statistic\": " + fmt17(ks) + ",\n";
  gj += "  \"ks_pvalue\": " + fmt17(pval) + "\n";
  gj += "}\n";
  write_file(cfg.output_dir, "gaussian_check.json", gj);
  write_run_meta(cfg.output_dir, "simulate");
  return 0;
}

int cmd_nplayer(const ExperimentConfig& cfg) {
  if (!cfg.has_nplayer || cfg.nplayer_Ns.empty())
    throw validation_error("nplayer block with N or Ns required");
  const MeanFieldModel& m = cfg.model;
  NPlayerConfig nc;
  nc.N = cfg.nplayer_Ns.front();
  nc.games = cfg.nplayer_games;
  nc.seed = cfg.nplayer_seed;
  nc.grid = TimeGrid(m.T, m.T == 0.0 ? 0 : cfg.nplayer_steps);

  std::vector<ConvergenceRow> rows =
      convergence_experiment(m, cfg.nplayer_Ns, nc);

  std::string csv = "N,w1,noise_floor\n";
  std::vector<double> log_n, log_w1;
  bool decreasing = true;
  for (size_t i = 0; i < rows.size(); ++i) {
    csv += std::to_string(rows[i].N) + "," + fmt17(rows[i].w1) + "," +
           fmt17(rows[i].w1_noise_floor) + "\n";
    log_n.push_back(std::log((double)rows[i].N));
    log_w1.push_back(std::log(rows[i].w1));
    if (i > 0 && rows[i].w1 >= rows[i - 1].w1) decreasing = false;
  }
  write_file(cfg.output_dir, "convergence.csv", csv);

  NPlayerPolicy np = nplayer_policy(m, nc.grid);
  bool effort_match = true;
  for (int k = 0; k <= nc.grid.steps; ++k)
    if (np.a.values[k] != a_star_at(nc.grid.point(k), m)) effort_match = false;

  double slope =
      rows.size() >= 2 ? ls_slope(log_n, log_w1) : 0.0;
  bool slope_in_band = slope <= -0.2 && slope >= -0.8;
  std::string vj = "{\n";
  vj += std::string("  \"effort_match\": ") + (effort_match ? "true" : "false") +
        ",\n";
  vj += "  \"samples\": " + std::to_string(nc.games) + ",\n";
  vj += "  \"ls_slope\": " + fmt17(slope) + ",\n";
  vj += std::string("  \"w1_strictly_decreasing\": ") +
        (decreasing ? "true" : "false") + ",\n";
  vj += std::string("  \"monotone_trend\": ") +
        (slope_in_band ? "true" : "false") + "\n";
  vj += "}\n";
  write_file(cfg.output_dir, "verdict.json", vj);
  write_run_meta(cfg.output_dir, "nplayer");
  return 0;
}

int cmd_sensitivity(const ExperimentConfig& cfg) {
  const MeanFieldModel& base = cfg.model;
  validate(base);

  struct Cell {
    const char* quantity;
    const char* parameter;
    char expected;
  };
  // Claimed movement directions at the reference parameter set.
  const Cell cells[] = {
      {"contract_mean", "c", '-'},        {"contract_mean", "alpha", '+'},
      {"contract_mean", "beta1", '+'},    {"contract_mean", "beta2", '+'},
      {"contract_mean", "gamma", '0'},    {"contract_variance", "c", '0'},
      {"contract_variance", "alpha", '+'},{"contract_variance", "beta1", '+'},
      {"contract_variance", "beta2", '+'},{"contract_variance", "gamma", '0'},
      {"optimal_effort", "c", '-'},       {"optimal_effort", "alpha", '+'},
      {"optimal_effort", "beta1", '+'},   {"optimal_effort", "beta2", '+'},
      {"optimal_effort", "gamma", '0'},   {"principal_gain", "c", '-'},
      {"principal_gain", "alpha", '+'},   {"principal_gain", "beta1", '+'},
      {"principal_gain", "beta2", '+'},   {"principal_gain", "gamma", '-'},
  };

  auto with_param = [&](const std::string& p, double v) {
    MeanFieldModel m = base;
    if (p == "c") m.c = v;
    else if (p == "alpha") m.alpha = v;
    else if (p == "beta1") m.beta1 = v;
    else if (p == "beta2") m.beta2 = v;
    else m.gamma = v;
    return m;
  };
  auto param_value = [&](const std::string& p) {
    if (p == "c") return base.c;
    if (p == "alpha") return base.alpha;
    if (p == "beta1") return base.beta1;
    if (p == "beta2") return base.beta2;
    return base.gamma;
  };
  auto quantity = [](const std::string& q, const MeanFieldModel& m) {
    if (q == "contract_mean") return contract_spec(m).law.mean;
    if (q == "contract_variance") return contract_spec(m).law.variance;
    if (q == "optimal_effort") return a_star_at(0.0, m);
    return principal_value(0.0, m.m0, m.R0, m.v0, m);
  };

  std::string csv = "quantity,parameter,derivative,sign,expected,match\n";
  for (const Cell& cell : cells) {
    double x0 = param_value(cell.parameter);
    double h = 1e-5 * std::max(1.0, std::fabs(x0));
    // One-sided probes at domain edges (c > 0, rates in [0, 1/2) or >= 0).
    double lo = x0 - h, hi = x0 + h;
    std::string p = cell.parameter;
    if ((p == "c" && lo <= 0.0) || (p != "c" && lo < 0.0)) lo = x0;
    if (p == "alpha" && hi >= 0.5) hi = x0;
    auto f = [&](double v) {
      return quantity(cell.quantity, with_param(cell.parameter, v));
    };
    double d = (f(hi) - f(lo)) / (hi - lo);
    char sign = '0';
    if (std::fabs(d) > 1e-7 * std::max(1.0, std::fabs(f(x0))))
      sign = d > 0.0 ? '+' : '-';
    csv += std::string(cell.quantity) + "," + cell.parameter + "," +
           fmt17(d) + "," + sign + "," + cell.expected + "," +
           (sign == cell.expected ? "true" : "false") + "\n";
  }

  // Variance-penalty block, probed at the configured penalties (defaults
  // below keep every derivative in its claimed regime).
  Penalties pb = cfg.has_penalties ? cfg.penalties
                                   : Penalties{0.2, 0.2, 0.2};
  if (base.n == 2.0) {
    struct PCell {
      const char* quantity;
      const char* parameter;
      char expected;
    };
    const PCell pcells[] = {
        {"penalized_effort", "lambda_x", '0'},
        {"penalized_effort", "lambda_xi", '-'},
        {"penalized_effort", "lambda_xxi", '-'},
        {"penalized_contract_mean", "lambda_x", '0'},
        {"penalized_contract_mean", "lambda_xi", '-'},
        {"penalized_contract_mean", "lambda_xxi", '-'},
        {"penalized_contract_variance", "lambda_x", '0'},
        {"penalized_contract_variance", "lambda_xi", '-'},
        {"penalized_contract_variance", "lambda_xxi", '-'},
    };
    auto with_pen = [&](const std::string& p, double v) {
      Penalties q = pb;
      if (p == "lambda_x") q.lambda_x = v;
      else if (p == "lambda_xi") q.lambda_xi = v;
      else q.lambda_xxi = v;
      return q;
    };
    auto pen_value = [&](const std::string& p) {
      if (p == "lambda_x") return pb.lambda_x;
      if (p == "lambda_xi") return pb.lambda_xi;
      return pb.lambda_xxi;
    };
    auto pquantity = [&](const std::string& q, const Penalties& p) {
      auto sol = risk_averse_solution(base, p);
      if (q == "penalized_effort") return sol.first.a_star.values.front();
      if (q == "penalized_contract_mean") return sol.second.law.mean;
      return sol.second.law.variance;
    };
    for (const PCell& cell : pcells) {
      double x0 = pen_value(cell.parameter);
      double h = 1e-5 * std::max(1.0, std::fabs(x0));
      double lo = x0 - h, hi = x0 + h;
      if (lo < 0.0) lo = x0;
      auto f = [&](double v) {
        return pquantity(cell.quantity, with_pen(cell.parameter, v));
      };
      double d = (f(hi) - f(lo)) / (hi - lo);
      char sign = '0';
      if (std::fabs(d) > 1e-6 * std::max(1.0, std::fabs(f(x0))))
        sign = d > 0.0 ? '+' : '-';
      csv += std::string(cell.quantity) + "," + cell.parameter + "," +
             fmt17(d) + "," + sign + "," + cell.expected + "," +
             (sign == cell.expected ? "true" : "false") + "\n";
    }
  }
  write_file(cfg.output_dir, "sensitivity.csv", csv);
  write_run_meta(cfg.output_dir, "sensitivity");
  return 0;
}

int cmd_hjb(const ExperimentConfig& cfg, double perturb) {
  const MeanFieldModel& m = cfg.model;
  MomentFunctional v = value_functional(m);
  if (perturb != 0.0) {
    MomentFunctional base = v;
    v.eval = [base, perturb](double t, double m1, double m2, double v1) {
      return base.eval(t, m1, m2, v1) + perturb * t;
    };
  }
  VerificationReport report = verification_report(m, v);

  std::string rj = "{\n";
  rj += std::string("  \"passed\": ") + (report.passed ? "true" : "false") +
        ",\n";
  rj += "  \"failed_check\": \"" + report.failed_check + "\",\n";
  rj += "  \"residual_threshold\": " + fmt17(report.residual_threshold) +
        ",\n";
  rj += "  \"max_residual\": " + fmt17(report.residuals.max_residual) + ",\n";
  rj += "  \"max_argsup_gap\": " + fmt17(report.residuals.max_argsup_gap) +
        ",\n";
  rj += "  \"checks\": {\n";
  rj += std::string("    \"hjb_residual\": ") +
        (report.residual_ok ? "true" : "false") + ",\n";
  rj += std::string("    \"optimizer_attainment\": ") +
        (report.attainment_ok ? "true" : "false") + ",\n";
  rj += std::string("    \"deterministic_admissibility\": ") +
        (report.deterministic_admissible ? "true" : "false") + ",\n";
  rj += std::string("    \"monte_carlo_value\": ") +
        (report.mc_ok ? "true" : "false") + "\n";
  rj += "  },\n";
  rj += "  \"monte_carlo\": {\"value\": " + fmt17(report.mc_value) +
        ", \"standard_error\": " + fmt17(report.mc_se) +
        ", \"closed_value\": " + fmt17(report.closed_value) + "}\n";
  rj += "}\n";
  write_file(cfg.output_dir, "verification_report.json", rj);

  std::string csv = "t,m1,V1,residual,argsup_z\n";
  for (const HjbPoint& p : report.residuals.rows)
    csv += fmt17(p.t) + "," + fmt17(p.m1) + "," + fmt17(p.v1) + "," +
           fmt17(p.residual) + "," + fmt17(p.argsup_z) + "\n";
  write_file(cfg.output_dir, "residuals.csv", csv);
  write_run_meta(cfg.output_dir, "hjb");
  return report.passed ? 0 : 4;
}

}  // namespace mfcl
