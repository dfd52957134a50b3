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
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "hilqr/cost.hpp"
#include "hilqr/ilqr.hpp"
#include "hilqr/systems/bouncing_ball.hpp"

namespace hilqr::systems {

// Running weights are rates per second and get multiplied by dt per knot.
struct ReferenceWeights {
  Matrix Q_terminal = Vector{{1e3, 1e3}}.asDiagonal();
  double state_rate = 0.0;
  double input_rate = 1e-2;
};

struct SingleBounceReference {
  std::shared_ptr<const TrackedReference> reference;
  GainSchedule gains;
  SolveReport report;
};

inline std::size_t knot_count(double duration, double dt) {
  if (!(dt > 0.0) || !(duration > 0.0)) throw InvalidArgument("duration and dt must be positive");
  const double ratio = duration / dt;
  const double n = std::round(ratio);
  if (std::abs(ratio - n) > 1e-9 * std::max(1.0, ratio)) {
    throw InvalidArgument("duration is not an integer multiple of dt");
  }
  return static_cast<std::size_t>(n);
}

inline std::size_t count_events(const HybridTrajectory& traj, TransitionId id) {
  std::size_t n = 0;
  for (const TrajectoryEvent& ev : traj.events) {
    if (ev.record.transition == id) ++n;
  }
  return n;
}

/// Constant input whose one-bounce flight from x_start reaches its first
/// post-impact apex at `duration`. Falls back to zero input when no such
/// constant exists.
inline double single_bounce_guess(const BouncingBallParams& params, const Vector& x_start,
                                  double duration) {
  const double z0 = x_start[0];
  const double v0 = x_start[1];
  const double e = params.restitution;
  if (!(z0 > 0.0)) return 0.0;
  // Net downward acceleration a > 0: impact at t_i, apex e |v_i| / a later.
  auto excess = [&](double a) {
    const double t_i = (v0 + std::sqrt(v0 * v0 + 2.0 * a * z0)) / a;
    const double v_i = v0 - a * t_i;
    return t_i + e * std::abs(v_i) / a - duration;
  };
  double lo = 1e-3;
  double hi = 1e6;
  if (excess(lo) < 0.0 || excess(hi) > 0.0) return 0.0;
  const auto root = boost::math::tools::bisect(
      excess, lo, hi, boost::math::tools::eps_tolerance<double>(40));
  const double a = 0.5 * (root.first + root.second);
  return params.mass * (params.gravity - a);
}

/// Optimal single-bounce trajectory from x_start to x_goal, found by hybrid
/// iLQR from a constant-input single-bounce flight. Throws SolverError unless
/// the solve converges to a trajectory with exactly one impact that ends
/// within goal_tolerance of x_goal.
inline SingleBounceReference make_single_bounce_reference(
    const BouncingBallParams& params, const Vector& x_start, const Vector& x_goal,
    double duration, double dt, const ReferenceWeights& weights = {},
    SolveOptions options = {}, double goal_tolerance = 1e-2) {
  const HybridSystem ball = bouncing_ball(params);
  ball.check_state(x_start);
  ball.check_state(x_goal);
  const std::size_t n_steps = knot_count(duration, dt);

  auto target = std::make_shared<TrackedReference>();
  HybridTrajectory& goal = target->trajectory;
  goal.dt = dt;
  goal.states.assign(n_steps + 1, x_goal);
  goal.inputs.assign(n_steps, Vector::Zero(1));
  goal.modes.assign(n_steps + 1, *ball.classify(0.0, x_goal));

  const CostModel cost = uniform_cost(target, weights.state_rate * dt * Matrix::Identity(2, 2),
                                      weights.input_rate * dt * Matrix::Identity(1, 1),
                                      weights.Q_terminal, false, MismatchPolicy::kUseReference);
  const ModeId mode0 = *ball.classify(0.0, x_start);
  const std::vector<Vector> guess(
      n_steps, Vector::Constant(1, single_bounce_guess(params, x_start, duration)));
  SolveResult solved = solve(ball, cost, x_start, mode0, guess, dt, options);

  const std::size_t impacts = count_events(solved.trajectory, kImpact);
  if (!solved.report.converged) {
    throw SolverError("single-bounce reference did not converge: " + solved.report.message);
  }
  if (impacts != 1) {
    throw SolverError("single-bounce reference has " + std::to_string(impacts) +
                      " impacts, expected exactly one");
  }
  const double miss = (solved.trajectory.states.back() - x_goal).norm();
  if (!(miss <= goal_tolerance)) {
    throw SolverError("single-bounce reference ends " + std::to_string(miss) +
                      " from the goal (tolerance " + std::to_string(goal_tolerance) + ")");
  }
  auto tracked = std::make_shared<TrackedReference>();
  tracked->trajectory = std::move(solved.trajectory);
  tracked->extensions = std::move(solved.extensions);
  return {std::move(tracked), std::move(solved.gains), std::move(solved.report)};
}

}  // namespace hilqr::systems
