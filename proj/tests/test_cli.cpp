// Copyright 2026 The hilqr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

const fs::path kConfigs = HILQR_CONFIG_DIR;

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("hilqr_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  // Exit status of the CLI; stdout and stderr go to dir/log.txt.
  int run(const std::string& args) const {
    const std::string cmd = std::string(HILQR_CLI_PATH) + " " + args + " >> " + (dir_ / "log.txt").string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string write(const std::string& name, const std::string& text) const {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p.string();
  }

  std::string read(const fs::path& p) const {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
  }

  std::string log() const { return read(dir_ / "log.txt"); }

  std::size_t lines(const fs::path& p) const {
    std::ifstream f(p);
    std::string line;
    std::size_t n = 0;
    while (std::getline(f, line)) ++n;
    return n;
  }

  fs::path dir_;
};

TEST_F(Cli, DropSimulation) {
  const fs::path out = dir_ / "drop";
  ASSERT_EQ(run("simulate --config " + (kConfigs / "drop.json").string() + " --out " + out.string()), 0) << log();
  EXPECT_EQ(lines(out / "trajectory.csv"), 1002u);  // header plus 1001 knots
  const json events = json::parse(read(out / "events.json"));
  ASSERT_EQ(events.size(), 1u);
  EXPECT_EQ(events[0]["knot"], 903);
  EXPECT_EQ(events[0]["source"], 0);
  EXPECT_EQ(events[0]["target"], 1);
}

TEST_F(Cli, HoverHasNoEvents) {
  const fs::path out = dir_ / "hover";
  ASSERT_EQ(run("simulate --config " + (kConfigs / "hover.json").string() + " --out " + out.string()), 0) << log();
  EXPECT_TRUE(json::parse(read(out / "events.json")).empty());
}

TEST_F(Cli, ConfigErrorsExitTwo) {
  EXPECT_EQ(run("simulate --config " + write("bad.json", "{\"system\": {\"mass\": }") + " --out " + dir_.string()), 2);
  EXPECT_NE(log().find("not valid JSON"), std::string::npos);
  EXPECT_EQ(run("simulate --config " + write("typo.json", R"({"simulate": {"durration": 1}})") + " --out " +
                dir_.string()),
            2);
  EXPECT_NE(log().find("simulate.durration"), std::string::npos);
  EXPECT_EQ(run("simulate --config " + (dir_ / "missing.json").string()), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("mpc --perturb q:1 --out " + dir_.string()), 2);
  EXPECT_EQ(run("simulate --config " + write("inputs.json", R"({"simulate": {"duration": 0.01, "inputs": [1, 2]}})") +
                " --out " + dir_.string()),
            2);
}

TEST_F(Cli, SimulationFailureExitsThree) {
  // Two bounces inside one 0.1 s step.
  const std::string cfg = write("zeno.json", R"({"simulate": {"x0": [0.001, -0.1], "duration": 0.1, "dt": 0.1}})");
  EXPECT_EQ(run("simulate --config " + cfg + " --out " + dir_.string()), 3) << log();
}

TEST_F(Cli, SolveWritesConvergedReference) {
  const fs::path out = dir_ / "solve";
  ASSERT_EQ(run("solve --out " + out.string()), 0) << log();
  const json report = json::parse(read(out / "report.json"));
  EXPECT_TRUE(report["converged"].get<bool>());
  const auto costs = report["cost_history"].get<std::vector<double>>();
  for (std::size_t i = 1; i < costs.size(); ++i) EXPECT_LT(costs[i], costs[i - 1]);
  for (const char* f : {"reference.csv", "reference_events.json", "extensions.json", "gains.json"}) {
    EXPECT_TRUE(fs::exists(out / f)) << f;
  }
  EXPECT_EQ(lines(out / "reference.csv"), 1002u);
  // The apex at the start state, then the single impact.
  const json events = json::parse(read(out / "reference_events.json"));
  ASSERT_EQ(events.size(), 2u);
  EXPECT_EQ(events[0]["knot"], 0);
  EXPECT_EQ(events[1]["source"], 0);
  EXPECT_EQ(events[1]["target"], 1);
  // Last row: t, mode, z, zdot and an empty input cell.
  std::ifstream csv(out / "reference.csv");
  std::string line;
  std::string last;
  while (std::getline(csv, line)) last = line;
  std::stringstream cells(last);
  std::string t, mode, z, zd;
  std::getline(cells, t, ',');
  std::getline(cells, mode, ',');
  std::getline(cells, z, ',');
  std::getline(cells, zd, ',');
  EXPECT_NEAR(std::stod(z), 2.5, 1e-3);
  EXPECT_NEAR(std::stod(zd), 0.0, 1e-3);
}

TEST_F(Cli, UnreachableGoalExitsFour) {
  EXPECT_EQ(run("solve --config " + (kConfigs / "unreachable.json").string() + " --out " + dir_.string()), 4)
      << log();
}

TEST_F(Cli, CheckPassesAndFaultInjectionFails) {
  EXPECT_EQ(run("check --seed 7 --out " + dir_.string()), 0) << log();
  const json report = json::parse(read(dir_ / "check.json"));
  EXPECT_GE(report.size(), 8u);
  for (const json& r : report) EXPECT_TRUE(r["passed"].get<bool>()) << r.dump();
  EXPECT_EQ(run("check --config " + (kConfigs / "fault_injection.json").string() + " --out " + dir_.string()), 5)
      << log();
  EXPECT_NE(log().find("FAIL saltation_vs_oracle"), std::string::npos);
}

TEST_F(Cli, OutputsAreByteReproducible) {
  const std::string drop = (kConfigs / "drop.json").string();
  ASSERT_EQ(run("simulate --config " + drop + " --out " + (dir_ / "a").string()), 0);
  ASSERT_EQ(run("simulate --config " + drop + " --out " + (dir_ / "b").string()), 0);
  EXPECT_EQ(read(dir_ / "a" / "trajectory.csv"), read(dir_ / "b" / "trajectory.csv"));
  EXPECT_EQ(read(dir_ / "a" / "events.json"), read(dir_ / "b" / "events.json"));
  ASSERT_EQ(run("solve --out " + (dir_ / "c").string()), 0);
  ASSERT_EQ(run("solve --out " + (dir_ / "d").string()), 0);
  for (const char* f : {"reference.csv", "reference_events.json", "extensions.json", "gains.json", "report.json"}) {
    EXPECT_EQ(read(dir_ / "c" / f), read(dir_ / "d" / f)) << f;
  }
}

// A simulated trajectory serves as the MPC reference; without a disturbance
// the closed loop stays on it.
TEST_F(Cli, SimulatedTrajectoryAsMpcReference) {
  const fs::path sim = dir_ / "sim";
  ASSERT_EQ(run("simulate --config " + (kConfigs / "drop.json").string() + " --out " + sim.string()), 0);
  json cfg = {{"reference",
               {{"trajectory", (sim / "trajectory.csv").string()}, {"events", (sim / "events.json").string()}}},
              {"perturbation", {{"magnitude", 0.0}}}};
  const std::string path = write("mpc.json", cfg.dump());
  const fs::path out = dir_ / "mpc";
  ASSERT_EQ(run("mpc --config " + path + " --out " + out.string()), 0) << log();
  const json summary = json::parse(read(out / "summary.json"));
  EXPECT_EQ(summary["run"]["n_steps"], 1001);
  EXPECT_EQ(summary["run"]["n_nonconverged"], 0);
  EXPECT_LE(summary["run"]["max_tracking_error"].get<double>(), 1e-6);
  EXPECT_EQ(lines(out / "mpc_log.csv"), 1002u);

  const fs::path again = dir_ / "mpc2";
  ASSERT_EQ(run("mpc --config " + path + " --out " + again.string()), 0);
  EXPECT_EQ(read(out / "mpc_log.csv"), read(again / "mpc_log.csv"));
}

TEST_F(Cli, ZeroPerturbationTracksReference) {
  const fs::path out = dir_ / "zero";
  ASSERT_EQ(run("mpc --config " + (kConfigs / "no_perturbation.json").string() + " --out " + out.string()), 0)
      << log();
  const json summary = json::parse(read(out / "summary.json"));
  EXPECT_LE(summary["run"]["max_tracking_error"].get<double>(), 1e-6);
  EXPECT_EQ(summary["run"]["n_nonconverged"], 0);
}

}  // namespace
