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

#include <cmath>

#include "hilqr/hybrid_system.hpp"

namespace hilqr::systems {

// Single-mode point mass, x = [z, zdot], xdot = [zdot, u/m].
inline HybridSystem double_integrator(double mass = 1.0) {
  if (!(mass > 0.0) || !std::isfinite(mass)) {
    throw InvalidArgument("double integrator: mass must be positive");
  }
  Mode mode;
  mode.name = "free";
  mode.field = [mass](double, const Vector& x, const Vector& u) {
    return Vector{{x[1], u[0] / mass}};
  };
  mode.field_dx = [](double, const Vector&, const Vector&) {
    return Matrix{{0.0, 1.0}, {0.0, 0.0}};
  };
  mode.field_du = [mass](double, const Vector&, const Vector&) {
    return Matrix{{0.0}, {1.0 / mass}};
  };
  return HybridSystem(2, 1, {std::move(mode)}, {},
                      [](double, const Vector&) { return ModeId{0}; });
}

// Exact zero-order-hold discretization over dt.
inline Matrix double_integrator_A(double dt) { return Matrix{{1.0, dt}, {0.0, 1.0}}; }
inline Matrix double_integrator_B(double mass, double dt) {
  return Matrix{{0.5 * dt * dt / mass}, {dt / mass}};
}

}  // namespace hilqr::systems
