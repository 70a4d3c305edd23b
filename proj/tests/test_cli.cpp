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

// Runs the command-line tool as a subprocess.

#include "dlqg/io.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace {

namespace fs = std::filesystem;

struct CliResult {
  int code = -1;
  std::string out;
};

CliResult run(const std::string& args) {
  const std::string cmd = std::string(DLQG_CLI) + " " + args + " 2>&1";
  CliResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::path(DLQG_SCRATCH) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

double field_value(const std::string& text, const std::string& key) {
  const auto pos = text.find(key + ": ");
  if (pos == std::string::npos) return std::nan("");
  return std::stod(text.substr(pos + key.size() + 2));
}

TEST(Cli, ValidateReportsStrictChecks) {
  const CliResult r = run("validate --demo symmetric-k2");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("A1 OK, A2 OK"), std::string::npos) << r.out;
  const CliResult g = run("validate --demo control-sharing");
  EXPECT_EQ(g.code, 0);
  EXPECT_NE(g.out.find("generalized protocol"), std::string::npos) << g.out;
}

TEST(Cli, ValidationFailureExitsOne) {
  const fs::path dir = scratch("validate_fail");
  auto cfg = dlqg::parse_json_text(dlqg::read_text_file(std::string(DLQG_SAMPLES_DIR) + "/scalar-2ctrl-k1.json"));
  // Shares nothing but claims to be a strict protocol: A2 fails.
  cfg["info_structure"] = {{"kind", "explicit"},
                           {"memory_dims", {0, 0}},
                           {"shared_dims", {0, 0}},
                           {"strict", true},
                           {"mm", dlqg::json::array()},
                           {"my", dlqg::json::array()},
                           {"mu", dlqg::json::array()},
                           {"zm", dlqg::json::array()},
                           {"zy", dlqg::json::array()},
                           {"zu", dlqg::json::array()}};
  write(dir / "cfg.json", cfg.dump());
  const CliResult r = run("validate " + (dir / "cfg.json").string());
  EXPECT_EQ(r.code, 1) << r.out;
  EXPECT_NE(r.out.find("A2"), std::string::npos) << r.out;
}

TEST(Cli, ConfigErrorsExitTwoWithField) {
  const fs::path dir = scratch("bad_config");
  auto cfg = dlqg::parse_json_text(dlqg::read_text_file(std::string(DLQG_SAMPLES_DIR) + "/scalar-2ctrl-k1.json"));
  cfg["cost"]["R"] = {{1.0, 0.0}, {0.0, -2.0}};
  write(dir / "bad_r.json", cfg.dump());
  CliResult r = run("solve " + (dir / "bad_r.json").string());
  EXPECT_EQ(r.code, 2) << r.out;
  EXPECT_NE(r.out.find("field: cost.R"), std::string::npos) << r.out;

  write(dir / "syntax.json", "{\n  \"horizon\": 3,\n  \"dims\": [\n}");
  r = run("solve " + (dir / "syntax.json").string());
  EXPECT_EQ(r.code, 2) << r.out;
  EXPECT_NE(r.out.find("field: line 4"), std::string::npos) << r.out;

  EXPECT_EQ(run("demo no-such-demo").code, 2);
  EXPECT_EQ(run("solve").code, 2);
  EXPECT_EQ(run("simulate --demo symmetric-k2 --rollouts abc").code, 2);
}

TEST(Cli, SimulateIsByteIdenticalAcrossRunsAndThreads) {
  const fs::path a = scratch("sim_a"), b = scratch("sim_b"), c = scratch("sim_c");
  const std::string base = "simulate --demo symmetric-k2 --rollouts 100000 --seed 7";
  const CliResult ra = run(base + " --out " + a.string());
  const CliResult rb = run(base + " --out " + b.string());
  const CliResult rc = run(base + " --threads 3 --out " + c.string());
  ASSERT_EQ(ra.code, 0) << ra.out;
  EXPECT_EQ(ra.out, rb.out);
  EXPECT_EQ(ra.out, rc.out);
  for (const char* f : {"summary.txt", "costs.csv", "rollout_0.csv", "rollout_2.csv"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    EXPECT_EQ(slurp(a / f), slurp(c / f)) << f;
  }
  const double j = field_value(ra.out, "J_formula");
  EXPECT_NEAR(field_value(ra.out, "J_exact"), j, 1e-8);
  EXPECT_LE(field_value(ra.out, "delta_formula_mc_in_stderr"), 3.0);
  EXPECT_LE(field_value(ra.out, "paired_noise_max_diff"), 1e-10);
  EXPECT_LE(field_value(ra.out, "conditioning_max_diff"), 1e-8);
}

TEST(Cli, SolvedStrategyFeedsSimulate) {
  const fs::path dir = scratch("solve_sim");
  const CliResult s = run("solve --demo figure1-asymmetric --out " + dir.string());
  ASSERT_EQ(s.code, 0) << s.out;
  ASSERT_TRUE(fs::exists(dir / "strategy.json"));
  ASSERT_TRUE(fs::exists(dir / "report.txt"));
  const CliResult r = run("simulate --strategy " + (dir / "strategy.json").string() + " --rollouts 2000");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NEAR(field_value(r.out, "J_exact"), field_value(s.out, "J"), 1e-8);
}

TEST(Cli, TuneLogDoesNotDependOnThreads) {
  const fs::path a = scratch("tune_a"), b = scratch("tune_b");
  const std::string base = "tune --demo scalar-2ctrl-k1 --budget 120 --restarts 2 --seed 3";
  const CliResult ra = run(base + " --threads 1 --out " + a.string());
  const CliResult rb = run(base + " --threads 3 --out " + b.string());
  ASSERT_EQ(ra.code, 0) << ra.out;
  EXPECT_EQ(ra.out, rb.out);
  EXPECT_EQ(slurp(a / "tune_log.csv"), slurp(b / "tune_log.csv"));
  EXPECT_EQ(slurp(a / "strategy.json"), slurp(b / "strategy.json"));
  EXPECT_EQ(slurp(a / "tune_log.csv").rfind("restart,eval,J_incumbent\n", 0), 0u);
}

TEST(Cli, DemoPrintsItsConfig) {
  const CliResult r = run("demo one-sided --print-config");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(dlqg::parse_json_text(r.out),
            dlqg::parse_json_text(dlqg::read_text_file(std::string(DLQG_SAMPLES_DIR) + "/one-sided.json")));
}

}  // namespace
