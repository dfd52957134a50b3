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
#include <string>

#include "hilqr/hybrid_system.hpp"

namespace hilqr::systems {

// Vertical ball with an actuated force u. Mode 0 is falling (zdot < 0),
// mode 1 rising (zdot >= 0). Impact 0->1 fires at z = 0 and flips the
// velocity through the restitution coefficient; apex 1->0 fires at zdot = 0
// with an identity reset.
struct BouncingBallParams {
  double mass = 1.0;
  double gravity = 9.81;
  double restitution = 0.8;

  void validate() const {
    if (!(mass > 0.0) || !std::isfinite(mass)) throw InvalidArgument("ball: mass must be positive");
    if (!(gravity > 0.0) || !std::isfinite(gravity)) {
      throw InvalidArgument("ball: gravity must be positive");
    }
    if (!(restitution > 0.0 && restitution <= 1.0)) {
      throw InvalidArgument("ball: restitution must lie in (0, 1]");
    }
  }
};

inline constexpr ModeId kFalling{0};
inline constexpr ModeId kRising{1};
inline constexpr TransitionId kImpact{kFalling, kRising};
inline constexpr TransitionId kApex{kRising, kFalling};

inline HybridSystem bouncing_ball(const BouncingBallParams& p = {}) {
  p.validate();
  const double m = p.mass;
  const double g = p.gravity;
  const double e = p.restitution;

  auto field = [m, g](double, const Vector& x, const Vector& u) {
    return Vector{{x[1], u[0] / m - g}};
  };
  auto field_dx = [](double, const Vector&, const Vector&) {
    return Matrix{{0.0, 1.0}, {0.0, 0.0}};
  };
  auto field_du = [m](double, const Vector&, const Vector&) { return Matrix{{0.0}, {1.0 / m}}; };
  auto zero_dt = [](double, const Vector&) { return 0.0; };
  auto zero_reset_dt = [](double, const Vector&) { return Vector(Vector::Zero(2)); };

  std::vector<Mode> modes{
      {"falling", field, field_dx, field_du},
      {"rising", field, field_dx, field_du},
  };
  Transition impact;
  impact.id = kImpact;
  impact.guard = [](double, const Vector& x) { return x[0]; };
  impact.guard_dt = zero_dt;
  impact.guard_dx = [](double, const Vector&) { return Vector{{1.0, 0.0}}; };
  impact.reset = [e](double, const Vector& x) { return Vector{{x[0], -e * x[1]}}; };
  impact.reset_dt = zero_reset_dt;
  impact.reset_dx = [e](double, const Vector&) { return Matrix{{1.0, 0.0}, {0.0, -e}}; };

  Transition apex;
  apex.id = kApex;
  apex.guard = [](double, const Vector& x) { return x[1]; };
  apex.guard_dt = zero_dt;
  apex.guard_dx = [](double, const Vector&) { return Vector{{0.0, 1.0}}; };
  apex.reset = [](double, const Vector& x) { return x; };
  apex.reset_dt = zero_reset_dt;
  apex.reset_dx = [](double, const Vector&) { return Matrix(Matrix::Identity(2, 2)); };

  return HybridSystem(2, 1, std::move(modes), {std::move(impact), std::move(apex)},
                      [](double, const Vector& x) { return x[1] < 0.0 ? kFalling : kRising; });
}

// Closed form of the impact saltation matrix.
inline Matrix ball_saltation_oracle(const BouncingBallParams& p, const Vector& x_minus,
                                    const Vector& u) {
  p.validate();
  if (x_minus.size() != 2 || u.size() != 1) throw InvalidArgument("ball oracle: bad dimensions");
  const double zdot = x_minus[1];
  if (zdot == 0.0) throw TransversalityError("ball oracle: zero impact velocity");
  const double e = p.restitution;
  const double accel = u[0] / p.mass - p.gravity;
  return Matrix{{-e, 0.0}, {(1.0 + e) * accel / zdot, -e}};
}

}  // namespace hilqr::systems
