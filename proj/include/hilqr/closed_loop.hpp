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

#include <span>
#include <vector>

#include "hilqr/extensions.hpp"
#include "hilqr/gains.hpp"
#include "hilqr/simulator.hpp"

namespace hilqr {

struct ClosedLoopOptions {
  MismatchPolicy mismatch = MismatchPolicy::kThrow;
  SimulationOptions simulation;
};

/// Rollout under the local policy of a backward pass,
///
///   u_k = u_ref_k + alpha * u_ff_k + K_k (x_k - x_ref_k),
///
/// about the nominal trajectory `nominal`. When the rollout is in a different
/// mode than the nominal at knot k, the reference point comes from the
/// matching extension and the inputs and gains of that side's anchor knot are
/// held.
inline HybridTrajectory closed_loop_rollout(const HybridSystem& sys,
                                            const HybridTrajectory& nominal,
                                            std::span<const ReferenceExtension> extensions,
                                            const GainSchedule& gains, double alpha,
                                            const Vector& x0, ModeId mode0,
                                            const ClosedLoopOptions& options = {}) {
  const std::size_t n_steps = nominal.horizon();
  if (gains.size() != n_steps || gains.K.size() != n_steps) {
    throw InvalidArgument("closed_loop_rollout: gain schedule length does not match the nominal");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw InvalidArgument("closed_loop_rollout: alpha must lie in [0, 1]");
  }
  sys.check_mode(mode0);
  sys.check_state(x0);

  HybridTrajectory traj;
  traj.t0 = nominal.t0;
  traj.dt = nominal.dt;
  traj.states.reserve(n_steps + 1);
  traj.modes.reserve(n_steps + 1);
  traj.inputs.reserve(n_steps);
  traj.states.push_back(x0);
  traj.modes.push_back(mode0);
  for (std::size_t k = 0; k < n_steps; ++k) {
    const Vector& x = traj.states[k];
    const ResolvedReference ref =
        resolve_reference(nominal, extensions, k, traj.modes[k], true, options.mismatch);
    const std::size_t a = ref.anchor_knot;
    Vector u = *ref.input + gains.K[a] * (x - *ref.state);
    if (alpha != 0.0) u += alpha * gains.u_ff[a];
    StepResult step =
        integrate_step(sys, traj.modes[k], traj.time(k), x, u, traj.dt, options.simulation);
    traj.inputs.push_back(std::move(u));
    traj.states.push_back(std::move(step.x_next));
    traj.modes.push_back(step.mode_next);
    if (step.event) traj.events.push_back({k, std::move(*step.event)});
  }
  return traj;
}

}  // namespace hilqr
