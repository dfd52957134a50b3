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
#include <string>
#include <vector>

#include "config.hpp"

namespace hilqr::app {

struct CheckResult {
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string detail;
};

/// Numerical verification battery behind `check`. Randomized states are
/// drawn from `seed`.
std::vector<CheckResult> run_verification(const ExperimentConfig& cfg, std::uint64_t seed);

// Pieces of the battery, exposed for tests.
double saltation_oracle_error(const systems::BouncingBallParams& params,
                              const systems::BouncingBallParams& oracle_params, std::size_t samples,
                              std::uint64_t seed);
double remainder_slope(const systems::BouncingBallParams& params);
double riccati_gain_error();
double gradient_check_error(const systems::BouncingBallParams& params, bool saltation);

}  // namespace hilqr::app
