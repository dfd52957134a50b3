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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

#include "hilqr/hybrid_system.hpp"
#include "hilqr/integrator.hpp"
#include "hilqr/saltation.hpp"

namespace hilqr {

struct SimulationOptions {
  IntegratorOptions integrator;
  // Required bound on |g| at a located event.
  double guard_tolerance = 1e-10;
  int max_root_iterations = 200;
};

// One hybrid transition inside a control step of length dt1 + dt2.
struct EventRecord {
  TransitionId transition;
  std::size_t transition_index = 0;
  double event_time = 0.0;
  Vector x_pre;
  Vector x_post;
  double dt1 = 0.0;
  double dt2 = 0.0;
  Matrix saltation;
};

struct StepResult {
  Vector x_next;
  ModeId mode_next;
  std::optional<EventRecord> event;
};

struct TrajectoryEvent {
  std::size_t knot = 0;  // the event happened in [t_knot, t_knot + dt]
  EventRecord record;
};

// Knots (t_k, x_k, u_k, mode_k) on a uniform grid t_k = t0 + k dt. There are
// N inputs and N + 1 states/modes; at most one event per knot interval.
struct HybridTrajectory {
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<Vector> states;
  std::vector<Vector> inputs;
  std::vector<ModeId> modes;
  std::vector<TrajectoryEvent> events;

  std::size_t horizon() const { return inputs.size(); }
  double time(std::size_t k) const { return t0 + static_cast<double>(k) * dt; }

  const EventRecord* event_at(std::size_t k) const {
    auto it = std::lower_bound(events.begin(), events.end(), k,
                               [](const TrajectoryEvent& e, std::size_t knot) { return e.knot < knot; });
    if (it == events.end() || it->knot != k) return nullptr;
    return &it->record;
  }
};

namespace detail {

struct GuardRoot {
  double time;
  double residual;
  int iterations;
};

// Bracketed root of a scalar function with h(a) > 0 >= h(b): Illinois-modified
// regula falsi with a bisection fallback. Returns the point on the h <= 0 side
// once |h| is within tolerance, refining further while it is cheap.
template <class H>
GuardRoot find_guard_root(H&& h, double a, double ha, double b, double hb, double tolerance,
                          int max_iterations) {
  double fa = ha;
  double fb = hb;
  double true_fa = ha;
  double true_fb = hb;
  int side = 0;
  int it = 0;
  const double fine = tolerance * 1e-4;
  for (; it < max_iterations; ++it) {
    if (std::abs(true_fb) <= fine) break;
    const double width = b - a;
    if (width <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(a), std::abs(b))) {
      break;
    }
    double s = (a * fb - b * fa) / (fb - fa);
    if (!(s > a && s < b)) s = 0.5 * (a + b);
    const double hs = h(s);
    if (hs <= 0.0) {
      b = s;
      fb = true_fb = hs;
      if (side == -1) fa *= 0.5;
      side = -1;
    } else {
      a = s;
      fa = true_fa = hs;
      if (side == +1) fb *= 0.5;
      side = +1;
    }
    // Fall back to bisection when the secant stalls on one side.
    if (b - a > 0.5 * width && side != 0) {
      const double mid = 0.5 * (a + b);
      const double hm = h(mid);
      if (hm <= 0.0) {
        b = mid;
        fb = true_fb = hm;
      } else {
        a = mid;
        fa = true_fa = hm;
      }
      side = 0;
    }
  }
  if (std::abs(true_fb) <= tolerance) return {b, std::abs(true_fb), it};
  if (std::abs(true_fa) <= tolerance) return {a, std::abs(true_fa), it};
  std::ostringstream msg;
  msg << "guard root finding did not converge: |g| = " << std::min(std::abs(true_fa), std::abs(true_fb))
      << " after " << it << " iterations";
  throw EventLocationError(msg.str());
}

struct DetectedEvent {
  std::size_t transition_index;
  double time;
  Vector state;
};

struct FlowOutcome {
  Vector x_end;
  std::optional<DetectedEvent> event;
};

// Flows `mode` from (t0, x0) to t_end with input u held, watching the guards
// in `watched`. Stops at the earliest crossing (ties: first in `watched`).
inline FlowOutcome flow_until_event(const HybridSystem& sys, ModeId mode, double t0,
                                    const Vector& x0, const Vector& u, double t_end,
                                    std::span<const std::size_t> watched,
                                    const SimulationOptions& options) {
  const double tol = options.guard_tolerance;
  std::vector<double> g_prev(watched.size());
  std::vector<bool> armed(watched.size());
  for (std::size_t i = 0; i < watched.size(); ++i) {
    const std::size_t tr = watched[i];
    const double g = sys.guard(tr, t0, x0);
    g_prev[i] = g;
    armed[i] = g > 0.0;
    if (g > 0.0) continue;
    if (g < -tol) {
      std::ostringstream msg;
      msg << "state lies inside the guard set of transition " << tr << " (g = " << g
          << ") at t=" << t0;
      throw InvalidArgument(msg.str());
    }
    // On the guard surface: fire now if the flow leaves the domain.
    const double rate = sys.guard_dt(tr, t0, x0) +
                        sys.guard_dx(tr, t0, x0).dot(sys.field(mode, t0, x0, u));
    if (rate < 0.0) return {x0, DetectedEvent{tr, t0, x0}};
  }
  if (t_end <= t0) return {x0, std::nullopt};

  auto rhs = [&](double s, const Vector& y) { return sys.field(mode, s, y, u); };
  DenseIntegrator<decltype(rhs)> flow(rhs, options.integrator);
  flow.initialize(t0, x0, t_end - t0);
  while (!flow.reached(t_end)) {
    const auto [ta, tb] = flow.step(t_end);
    const Vector xb = flow.state();
    std::optional<DetectedEvent> earliest;
    for (std::size_t i = 0; i < watched.size(); ++i) {
      const std::size_t tr = watched[i];
      const double gb = sys.guard(tr, tb, xb);
      if (armed[i] && gb <= 0.0) {
        auto h = [&](double s) { return sys.guard(tr, s, flow.state_at(s)); };
        const GuardRoot root =
            find_guard_root(h, ta, g_prev[i], tb, gb, tol, options.max_root_iterations);
        if (!earliest || root.time < earliest->time) {
          const Vector state = root.time == tb ? xb : flow.state_at(root.time);
          earliest = DetectedEvent{tr, root.time, state};
        }
      }
      armed[i] = armed[i] || gb > 0.0;
      g_prev[i] = gb;
    }
    if (earliest) return {earliest->state, earliest};
  }
  return {flow.state(), std::nullopt};
}

}  // namespace detail

/// Advances one control step of length dt with u held (zero-order hold).
/// Processes at most one hybrid event; a second one inside the same step
/// raises ZenoError.
inline StepResult integrate_step(const HybridSystem& sys, ModeId mode, double t, const Vector& x,
                                 const Vector& u, double dt, const SimulationOptions& options = {}) {
  sys.check_mode(mode);
  sys.check_state(x);
  sys.check_input(u);
  if (!(dt > 0.0)) throw InvalidArgument("integrate_step: dt must be positive");
  const double t_end = t + dt;

  detail::FlowOutcome first =
      detail::flow_until_event(sys, mode, t, x, u, t_end, sys.outgoing(mode), options);
  if (!first.event) return {std::move(first.x_end), mode, std::nullopt};

  const detail::DetectedEvent& hit = *first.event;
  const Transition& tr = sys.transition(hit.transition_index);
  EventRecord record;
  record.transition = tr.id;
  record.transition_index = hit.transition_index;
  record.event_time = hit.time;
  record.x_pre = hit.state;
  record.x_post = sys.reset(hit.transition_index, hit.time, hit.state);
  record.dt1 = hit.time - t;
  record.dt2 = dt - record.dt1;
  record.saltation = saltation_matrix(sys, hit.transition_index, hit.time, hit.state, u).matrix;

  detail::FlowOutcome second;
  try {
    second = detail::flow_until_event(sys, tr.id.target, hit.time, record.x_post, u, t_end,
                                      sys.outgoing(tr.id.target), options);
  } catch (const InvalidArgument& e) {
    throw ZenoError(std::string("reset lands inside a guard set: ") + e.what());
  }
  if (second.event) {
    std::ostringstream msg;
    msg << "second hybrid event in one step: transitions " << hit.transition_index << " at t="
        << hit.time << " and " << second.event->transition_index << " at t="
        << second.event->time;
    throw ZenoError(msg.str());
  }
  return {std::move(second.x_end), tr.id.target, std::move(record)};
}

struct LocatedEvent {
  double time;
  Vector x_pre;
};

/// Earliest zero of guard `tr` along the flow of `mode` from (t0, x0) within
/// [t0, t0 + window]. Requires g(t0, x0) > 0.
inline LocatedEvent locate_event(const HybridSystem& sys, TransitionId tr, ModeId mode, double t0,
                                 const Vector& x0, const Vector& u, double window,
                                 const SimulationOptions& options = {}) {
  const std::size_t index = sys.transition_index(tr);
  sys.check_state(x0);
  sys.check_input(u);
  if (tr.source != mode) throw InvalidArgument("locate_event: transition does not leave this mode");
  if (!(window > 0.0)) throw InvalidArgument("locate_event: window must be positive");
  if (!(sys.guard(index, t0, x0) > 0.0)) {
    throw InvalidArgument("locate_event: guard is not positive at the window start");
  }
  const std::size_t watched[] = {index};
  detail::FlowOutcome out =
      detail::flow_until_event(sys, mode, t0, x0, u, t0 + window, watched, options);
  if (!out.event) throw EventLocationError("locate_event: guard has no sign change in window");
  return {out.event->time, std::move(out.event->state)};
}

/// Open-loop rollout of N = inputs.size() control steps.
inline HybridTrajectory rollout(const HybridSystem& sys, const Vector& x0, ModeId mode0,
                                const std::vector<Vector>& inputs, double dt, double t0 = 0.0,
                                const SimulationOptions& options = {}) {
  sys.check_mode(mode0);
  sys.check_state(x0);
  if (!(dt > 0.0)) throw InvalidArgument("rollout: dt must be positive");
  HybridTrajectory traj;
  traj.t0 = t0;
  traj.dt = dt;
  traj.inputs = inputs;
  traj.states.reserve(inputs.size() + 1);
  traj.modes.reserve(inputs.size() + 1);
  traj.states.push_back(x0);
  traj.modes.push_back(mode0);
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    StepResult step =
        integrate_step(sys, traj.modes[k], traj.time(k), traj.states[k], inputs[k], dt, options);
    traj.states.push_back(std::move(step.x_next));
    traj.modes.push_back(step.mode_next);
    if (step.event) traj.events.push_back({k, std::move(*step.event)});
  }
  return traj;
}

}  // namespace hilqr
