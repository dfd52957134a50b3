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

#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Hybrid iLQR and HiLQR MPC on the actuated bouncing ball"};
  app.require_subcommand(1);
  hilqr::app::CommandOptions opts;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config, "JSON experiment config")->check(CLI::ExistingFile);
    sub->add_option("--out", opts.out, "output directory");
    sub->add_option("--seed", seed, "seed for randomized verification states");
    sub->add_option("--perturb", opts.perturb, "initial state offset, <z|zdot|index>:<magnitude>");
  };
  CLI::App* simulate = app.add_subcommand("simulate", "open-loop rollout to CSV + events JSON");
  CLI::App* solve = app.add_subcommand("solve", "single-bounce reference by hybrid iLQR");
  CLI::App* mpc = app.add_subcommand("mpc", "closed-loop HiLQR MPC on a perturbed start");
  CLI::App* check = app.add_subcommand("check", "numerical verification battery");
  for (CLI::App* sub : {simulate, solve, mpc, check}) add_common(sub);
  mpc->add_flag("--ablation", opts.ablation, "run with and without the mode-mismatch cost update");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : hilqr::app::kExitConfig;
  }
  for (CLI::App* sub : {simulate, solve, mpc, check}) {
    if (sub->count("--seed") > 0) opts.seed = seed;
  }
  if (*simulate) return hilqr::app::cmd_simulate(opts, std::cout);
  if (*solve) return hilqr::app::cmd_solve(opts, std::cout);
  if (*mpc) return hilqr::app::cmd_mpc(opts, std::cout);
  return hilqr::app::cmd_check(opts, std::cout);
}
