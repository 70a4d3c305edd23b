/*
 Copyright 2026 The dlqg Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

// dlqg: batch front end.
//
//   dlqg validate  CONFIG | --demo NAME  [--dump-matrices] [--out DIR]
//   dlqg solve     CONFIG | --demo NAME  [--dump-matrices] [--out DIR] [--tolerance X]
//   dlqg simulate  CONFIG | --demo NAME | --strategy FILE  [--seed N] [--rollouts N]
//                  [--threads N] [--out DIR]
//   dlqg tune      CONFIG | --demo NAME  [--budget N] [--restarts N] [--seed N]
//                  [--threads N] [--out DIR]
//   dlqg demo NAME [--print-config]
//
// Exit status: 0 success, 1 protocol check failed, 2 configuration error,
// 3 numerical breakdown.

#include "dlqg/dlqg.hpp"
#include "dlqg/io.hpp"
#include "dlqg/scenarios.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

using namespace dlqg;
namespace fs = std::filesystem;

struct Options {
  std::string config;
  std::string demo;
  std::string strategy;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> rollouts;
  std::optional<int> budget;
  std::optional<int> restarts;
  double tolerance = kDefaultRtol;
  int threads = 1;
  bool dump = false;
  bool print_config = false;
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void print_matrix(std::ostream& os, const std::string& label, const Mat& m) {
  os << label << " (" << m.rows() << "x" << m.cols() << ")\n";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    os << " ";
    for (Eigen::Index c = 0; c < m.cols(); ++c) os << ' ' << num(m(r, c));
    os << '\n';
  }
}

Scenario load(const Options& o) {
  if (!o.demo.empty()) return demo_scenario(o.demo);
  if (o.config.empty()) throw Error(ErrorCode::kConfig, "no configuration given", "config");
  return load_scenario(o.config);
}

void write_file(const Options& o, const std::string& name, const std::string& text) {
  if (o.out.empty()) return;
  fs::create_directories(o.out);
  std::ofstream f(fs::path(o.out) / name);
  if (!f) throw Error(ErrorCode::kConfig, "cannot write output", (fs::path(o.out) / name).string());
  f << text;
}

int cmd_validate(const Options& o) {
  const Scenario sc = load(o);
  const auto& mp = sc.protocol;
  const ValidationReport rep = validate(mp);
  std::cout << "protocol: " << to_string(mp.kind) << (mp.strict ? " (strict)" : "") << "\n";
  if (!mp.note.empty()) std::cout << "note: " << mp.note << "\n";
  std::cout << "memory dims:";
  for (int d : mp.memory_dims) std::cout << ' ' << d;
  std::cout << "\nstructure: " << rep.summary() << "\n";
  for (const auto& v : rep.violations) std::cout << "  violation: " << v.message << "\n";
  try {
    const TokenTrace trace = simulate_tokens(mp);
    const auto issues = token_issues(mp, trace);
    std::cout << "token simulation: " << (issues.empty() ? "OK" : "issues found") << "\n";
    for (const auto& s : issues) std::cout << "  " << s << "\n";
    for (int t = 1; t <= mp.horizon(); ++t) {
      std::cout << "  t=" << t << " Z:";
      for (const auto& tok : trace.shared[t - 1]) std::cout << ' ' << tok.str();
      std::cout << " | M_next:";
      for (const auto& tok : trace.memory[t]) std::cout << ' ' << tok.str();
      std::cout << "\n";
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kUnsupportedProtocol) throw;
    std::cout << "token simulation: not applicable (" << e.what() << ")\n";
  }
  if (o.dump) {
    const std::string text = protocol_to_json(mp).dump(2) + "\n";
    if (o.out.empty()) std::cout << text;
    write_file(o, "protocol.json", text);
  }
  return rep.ok() ? 0 : 1;
}

void report_strategy(std::ostream& os, const SolvedStrategy& ss, bool dump) {
  os << "J: " << num(ss.J) << "\n";
  os << "coordinated state dim: " << ss.cs.state_dim << " (x " << ss.cs.d_x << ", y "
     << ss.cs.d_y << ", m " << ss.cs.d_m << ")\n";
  os << "t,trace_P,trace_S,norm_K,norm_L,shared_dim\n";
  for (int t = 1; t <= ss.horizon(); ++t)
    os << t << ',' << num(ss.P[t - 1].trace()) << ',' << num(ss.S[t - 1].trace()) << ','
       << num(ss.K[t - 1].norm()) << ',' << num(ss.L[t - 1].norm()) << ','
       << ss.cs.obs_dim(t + 1) << "\n";
  if (!dump) return;
  for (int t = 1; t <= ss.horizon(); ++t) {
    const std::string s = std::to_string(t);
    print_matrix(os, "G_" + s, ss.gains.G_at(t));
    print_matrix(os, "H_" + s, ss.gains.H_at(t));
    print_matrix(os, "P_" + s, ss.P[t - 1]);
    print_matrix(os, "S_" + s, ss.S[t - 1]);
    print_matrix(os, "K_" + s, ss.K[t - 1]);
    print_matrix(os, "L_" + s, ss.L[t - 1]);
    print_matrix(os, "filter_gain_" + s, ss.filter_gain[t - 1]);
  }
}

int cmd_solve(const Options& o) {
  const Scenario sc = load(o);
  const LocalGains lg = sc.gains ? *sc.gains : LocalGains::zeros(sc.plant, sc.protocol);
  const SolvedStrategy ss = solve(sc.plant, sc.protocol, lg, o.tolerance);
  std::ostringstream os;
  report_strategy(os, ss, o.dump);
  std::cout << os.str();
  write_file(o, "report.txt", os.str());
  write_file(o, "strategy.json", strategy_to_json(sc, ss).dump(2) + "\n");
  return 0;
}

int run_simulation(const Options& o, const Scenario& sc, const SolvedStrategy& ss) {
  const std::uint64_t seed = o.seed ? *o.seed : sc.sim_seed;
  const int count = o.rollouts ? *o.rollouts : sc.sim_rollouts;
  if (count < 1) throw Error(ErrorCode::kConfig, "must be >= 1", "--rollouts");
  const auto& p = sc.plant;
  const auto& mp = sc.protocol;
  const int keep = std::min(count, 3);
  const MonteCarloResult mc = monte_carlo(p, mp, ss, seed, count, o.threads, keep);
  const double exact = exact_cost(p, mp, ss);
  double paired = 0.0;
  const int checks = std::min(count, 20);
  for (int r = 0; r < checks; ++r)
    paired = std::max(paired, compare_paired(p, mp, ss, draw_noise(p, seed, r)).max());
  double cond = 0.0;
  for (int t = 1; t <= p.horizon; ++t)
    cond = std::max(cond, gaussian_conditioning(p, ss, t, o.tolerance).mean_error);

  std::ostringstream os;
  os << "seed: " << seed << "\nrollouts: " << count << "\n";
  os << "J_formula: " << num(ss.J) << "\n";
  os << "J_exact: " << num(exact) << "\n";
  os << "J_monte_carlo: " << num(mc.mean) << "\n";
  os << "stderr: " << num(mc.stderr_) << "\n";
  os << "delta_formula_exact: " << num(std::abs(ss.J - exact)) << "\n";
  os << "delta_formula_mc_in_stderr: "
     << num(mc.stderr_ > 0 ? std::abs(ss.J - mc.mean) / mc.stderr_ : 0.0) << "\n";
  os << "paired_noise_max_diff: " << num(paired) << "\n";
  os << "conditioning_max_diff: " << num(cond) << "\n";
  std::cout << os.str();
  write_file(o, "summary.txt", os.str());
  for (int r = 0; r < keep; ++r) {
    std::ostringstream csv;
    write_trajectory_csv(csv, mc.samples[r]);
    write_file(o, "rollout_" + std::to_string(r) + ".csv", csv.str());
  }
  if (!o.out.empty()) {
    std::ostringstream costs;
    costs << "rollout,cost\n";
    for (int r = 0; r < count; ++r) costs << r << ',' << num(mc.costs[r]) << '\n';
    write_file(o, "costs.csv", costs.str());
  }
  return 0;
}

int cmd_simulate(const Options& o) {
  if (!o.strategy.empty()) {
    const LoadedStrategy ls = strategy_from_json(parse_json_text(read_text_file(o.strategy)));
    return run_simulation(o, ls.scenario, ls.strategy);
  }
  const Scenario sc = load(o);
  const LocalGains lg = sc.gains ? *sc.gains : LocalGains::zeros(sc.plant, sc.protocol);
  return run_simulation(o, sc, solve(sc.plant, sc.protocol, lg, o.tolerance));
}

int cmd_tune(const Options& o) {
  const Scenario sc = load(o);
  TuneOptions opt = sc.tune;
  if (o.budget) opt.budget = *o.budget;
  if (o.restarts) opt.restarts = *o.restarts;
  if (o.seed) opt.seed = *o.seed;
  opt.threads = o.threads;
  opt.rtol = o.tolerance;
  if (opt.budget < 1) throw Error(ErrorCode::kConfig, "must be >= 1", "--budget");
  if (opt.restarts < 0) throw Error(ErrorCode::kConfig, "must be >= 0", "--restarts");
  const TuneResult res = tune(sc.plant, sc.protocol, opt);
  const double zero_j =
      solve(sc.plant, sc.protocol, LocalGains::zeros(sc.plant, sc.protocol), o.tolerance).J;
  std::ostringstream os;
  os << "budget: " << opt.budget << "\nrestarts: " << opt.restarts << "\nseed: " << opt.seed
     << "\n";
  os << "evaluations: " << res.evaluations << "\n";
  os << "J_zero_gains: " << num(zero_j) << "\n";
  os << "J_best: " << num(res.J) << "\n";
  os << "best_restart: " << res.best_restart << "\n";
  std::cout << os.str();
  std::ostringstream log;
  write_tune_log_csv(log, res.log);
  write_file(o, "tune_log.csv", log.str());
  write_file(o, "strategy.json", strategy_to_json(sc, res.strategy).dump(2) + "\n");
  return 0;
}

int cmd_demo(const Options& o) {
  if (o.print_config) {
    std::cout << demo_config_text(o.demo) << "\n";
    return 0;
  }
  std::cout << "== demo " << o.demo << " ==\n-- validate\n";
  Options v = o;
  v.dump = false;
  const int rc = cmd_validate(v);
  std::cout << "-- solve\n";
  cmd_solve(v);
  std::cout << "-- simulate\n";
  Options s = v;
  if (!s.rollouts) s.rollouts = 2000;
  cmd_simulate(s);
  return rc;
}

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::kNumericalBreakdown: return 3;
    default: return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decentralized LQG with partial history sharing"};
  app.require_subcommand(1);
  Options o;

  auto add_source = [&](CLI::App* sub) {
    sub->add_option("config", o.config, "JSON configuration file");
    sub->add_option("--demo", o.demo, "Use a built-in scenario instead of a file");
    sub->add_option("--out", o.out, "Directory for output artifacts");
    sub->add_option("--tolerance", o.tolerance, "Relative singular-value cutoff for pinv");
  };
  auto* validate_cmd = app.add_subcommand("validate", "Check protocol structure and token flow");
  add_source(validate_cmd);
  validate_cmd->add_flag("--dump-matrices", o.dump, "Write the protocol matrices");

  auto* solve_cmd = app.add_subcommand("solve", "Solve the coordinator problem");
  add_source(solve_cmd);
  solve_cmd->add_flag("--dump-matrices", o.dump, "Print every per-step matrix");

  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo, exact cost and oracle deltas");
  add_source(sim_cmd);
  sim_cmd->add_option("--strategy", o.strategy, "Strategy file written by solve or tune");
  sim_cmd->add_option("--seed", o.seed, "Noise seed");
  sim_cmd->add_option("--rollouts", o.rollouts, "Number of rollouts");
  sim_cmd->add_option("--threads", o.threads, "Worker threads");

  auto* tune_cmd = app.add_subcommand("tune", "Pattern search over the local gains");
  add_source(tune_cmd);
  tune_cmd->add_option("--budget", o.budget, "Solver evaluations");
  tune_cmd->add_option("--restarts", o.restarts, "Random restarts");
  tune_cmd->add_option("--seed", o.seed, "Restart seed");
  tune_cmd->add_option("--threads", o.threads, "Worker threads");

  auto* demo_cmd = app.add_subcommand("demo", "Run a built-in scenario");
  demo_cmd->add_option("name", o.demo, "scalar-2ctrl-k1, symmetric-k2, figure1-asymmetric, "
                                       "control-sharing, one-sided")
      ->required();
  demo_cmd->add_option("--out", o.out, "Directory for output artifacts");
  demo_cmd->add_flag("--print-config", o.print_config, "Print the scenario JSON and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (o.threads < 1) throw Error(ErrorCode::kConfig, "must be >= 1", "--threads");
    if (*validate_cmd) return cmd_validate(o);
    if (*solve_cmd) return cmd_solve(o);
    if (*sim_cmd) return cmd_simulate(o);
    if (*tune_cmd) return cmd_tune(o);
    if (*demo_cmd) return cmd_demo(o);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (!e.field().empty()) std::cerr << "field: " << e.field() << "\n";
    if (e.code() == ErrorCode::kNumericalBreakdown) std::cerr << "step: " << e.step() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
