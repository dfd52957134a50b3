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

#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

namespace hilqr::app {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitSimulation = 3,
  kExitSolver = 4,
  kExitVerification = 5,
};

struct CommandOptions {
  std::string config;  // empty: built-in defaults
  std::string out;     // empty: the config's output directory
  bool ablation = false;
  std::optional<std::uint64_t> seed;
  std::string perturb;  // "<component>:<magnitude>", empty keeps the config
};

int cmd_simulate(const CommandOptions& opts, std::ostream& log);
int cmd_solve(const CommandOptions& opts, std::ostream& log);
int cmd_mpc(const CommandOptions& opts, std::ostream& log);
int cmd_check(const CommandOptions& opts, std::ostream& log);

}  // namespace hilqr::app
