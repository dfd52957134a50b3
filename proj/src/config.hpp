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
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hilqr/mpc.hpp"
#include "hilqr/systems/bouncing_ball.hpp"
#include "hilqr/systems/single_bounce_reference.hpp"

namespace hilqr::app {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SimulateSpec {
  Vector x0{{4.0, 0.0}};
  std::optional<std::size_t> mode0;
  double duration = 1.0;
  double dt = 0.001;
  double input = 0.0;
  std::vector<double> inputs;  // overrides `input` when non-empty
};

struct ReferenceSpec {
  Vector start{{4.0, 0.0}};
  Vector goal{{2.5, 0.0}};
  double duration = 1.0;
  double dt = 0.001;
  systems::ReferenceWeights weights;
  std::size_t max_iterations = 100;
  double threshold = 1e-4;
  double goal_tolerance = 1e-2;
  std::string trajectory;  // optional CSV to load instead of solving
  std::string events;      // events JSON accompanying `trajectory`
  std::optional<std::size_t> extension_horizon;
};

struct PerturbationSpec {
  std::size_t component = 0;
  double magnitude = 0.5;
};

struct CheckSpec {
  std::size_t samples = 100;
  std::string fault_injection;  // "", "oracle_restitution"
};

struct ExperimentConfig {
  systems::BouncingBallParams system;
  SimulateSpec simulate;
  ReferenceSpec reference;
  MpcConfig mpc;
  TrackingWeights weights;
  PerturbationSpec perturbation;
  CheckSpec check;
  std::uint64_t seed = 20260101;
  std::string output = "out";
};

ExperimentConfig default_config();

/// Parses and validates a JSON document. Unknown keys, wrong types and out
/// of range values raise ConfigError naming the offending field.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// "z:0.5", "zdot:-1" or "<index>:<magnitude>".
PerturbationSpec parse_perturbation(const std::string& text);

}  // namespace hilqr::app
