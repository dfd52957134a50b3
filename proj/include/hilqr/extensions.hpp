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

#include <cstddef>
#include <optional>
#include <span>
#include <sstream>
#include <vector>

#include "hilqr/integrator.hpp"
#include "hilqr/simulator.hpp"

namespace hilqr {

// Continuation of a trajectory across one of its events, in a single mode on
// each side. The pre side keeps flowing the pre-event mode forward past the
// guard; the post side flows the post-event mode backward from the reset
// state. Both hold the input that was active during the event interval.
struct ReferenceExtension {
  std::ptrdiff_t event_knot = 0;  // event inside [t_k, t_k + dt]
  std::size_t transition_index = 0;
  ModeId pre_mode;
  ModeId post_mode;
  double event_time = 0.0;
  Vector x_pre;
  Vector x_post;
  Vector input;
  std::size_t horizon = 0;
  std::vector<Vector> pre_states;   // [j] at knot event_knot + 1 + j
  std::vector<Vector> post_states;  // [j] at knot event_knot - j

  // Knot whose gains are held while this side stands in for the reference.
  std::ptrdiff_t pre_anchor() const { return event_knot; }
  std::ptrdiff_t post_anchor() const { return event_knot + 1; }
};

/// One extension per recorded event. Sides are truncated at the trajectory
/// ends; horizon_knots = 0 gives empty extensions.
inline std::vector<ReferenceExtension> build_extensions(const HybridSystem& sys,
                                                        const HybridTrajectory& traj,
                                                        std::size_t horizon_knots,
                                                        const IntegratorOptions& options = {}) {
  std::vector<ReferenceExtension> out;
  out.reserve(traj.events.size());
  const std::size_t n_knots = traj.states.size();
  for (const TrajectoryEvent& ev : traj.events) {
    const EventRecord& r = ev.record;
    const Transition& tr = sys.transition(r.transition_index);
    ReferenceExtension ext;
    ext.event_knot = static_cast<std::ptrdiff_t>(ev.knot);
    ext.transition_index = r.transition_index;
    ext.pre_mode = tr.id.source;
    ext.post_mode = tr.id.target;
    ext.event_time = r.event_time;
    ext.x_pre = r.x_pre;
    ext.x_post = r.x_post;
    ext.input = traj.inputs[ev.knot];
    ext.horizon = horizon_knots;

    const ModeId pre = ext.pre_mode;
    const ModeId post = ext.post_mode;
    const Vector& u = ext.input;

    auto forward = [&](double s, const Vector& y) { return sys.field(pre, s, y, u); };
    double t_prev = r.event_time;
    Vector x = r.x_pre;
    for (std::size_t j = 0; j < horizon_knots && ev.knot + 1 + j < n_knots; ++j) {
      const double t_next = traj.time(ev.knot + 1 + j);
      x = integrate(forward, t_prev, x, t_next, options);
      t_prev = t_next;
      ext.pre_states.push_back(x);
    }

    // Backward in time: y(s) = x(t_event - s) obeys y' = -F(t_event - s, y).
    const double te = r.event_time;
    auto backward = [&](double s, const Vector& y) -> Vector {
      return -sys.field(post, te - s, y, u);
    };
    double s_prev = 0.0;
    x = r.x_post;
    for (std::size_t j = 0; j < horizon_knots && j <= ev.knot; ++j) {
      const double s_next = te - traj.time(ev.knot - j);
      x = integrate(backward, s_prev, x, s_next, options);
      s_prev = s_next;
      ext.post_states.push_back(x);
    }
    out.push_back(std::move(ext));
  }
  return out;
}

/// Re-indexes extensions so that knot `offset` becomes knot 0.
inline std::vector<ReferenceExtension> shift_extensions(std::span<const ReferenceExtension> exts,
                                                        std::ptrdiff_t offset) {
  std::vector<ReferenceExtension> out(exts.begin(), exts.end());
  for (ReferenceExtension& e : out) e.event_knot -= offset;
  return out;
}

struct ExtensionMatch {
  const ReferenceExtension* extension = nullptr;
  const Vector* state = nullptr;
  std::ptrdiff_t anchor_knot = 0;
};

// The extension side that covers `knot` in `mode`; the nearest event wins.
inline std::optional<ExtensionMatch> find_extension(std::span<const ReferenceExtension> exts,
                                                    std::ptrdiff_t knot, ModeId mode) {
  std::optional<ExtensionMatch> best;
  std::ptrdiff_t best_distance = 0;
  for (const ReferenceExtension& e : exts) {
    if (mode == e.pre_mode && knot > e.event_knot) {
      const std::ptrdiff_t j = knot - e.event_knot - 1;
      if (j < static_cast<std::ptrdiff_t>(e.pre_states.size()) && (!best || j + 1 < best_distance)) {
        best = ExtensionMatch{&e, &e.pre_states[j], e.pre_anchor()};
        best_distance = j + 1;
      }
    }
    if (mode == e.post_mode && knot <= e.event_knot) {
      const std::ptrdiff_t j = e.event_knot - knot;
      if (j < static_cast<std::ptrdiff_t>(e.post_states.size()) && (!best || j + 1 < best_distance)) {
        best = ExtensionMatch{&e, &e.post_states[j], e.post_anchor()};
        best_distance = j + 1;
      }
    }
  }
  return best;
}

// What to do when a knot's mode differs from the reference's and no extension
// covers it: fail, or compare against the raw reference knot.
enum class MismatchPolicy { kThrow, kUseReference };

struct ResolvedReference {
  const Vector* state = nullptr;
  const Vector* input = nullptr;  // null at the terminal knot
  std::size_t anchor_knot = 0;    // knot whose gains apply
  bool from_extension = false;
};

/// Reference point to compare against at knot k for a trajectory in `mode`.
/// With match_modes set, a mode mismatch switches to the extension whose mode
/// agrees with `mode`.
inline ResolvedReference resolve_reference(const HybridTrajectory& ref,
                                           std::span<const ReferenceExtension> exts,
                                           std::size_t k, ModeId mode, bool match_modes,
                                           MismatchPolicy policy) {
  if (k >= ref.states.size()) throw InvalidArgument("reference knot out of range");
  const Vector* raw_input = k < ref.inputs.size() ? &ref.inputs[k] : nullptr;
  if (!match_modes || ref.modes[k] == mode) return {&ref.states[k], raw_input, k, false};
  if (auto match = find_extension(exts, static_cast<std::ptrdiff_t>(k), mode)) {
    std::ptrdiff_t anchor = std::max<std::ptrdiff_t>(match->anchor_knot, 0);
    if (!ref.inputs.empty()) {
      anchor = std::min<std::ptrdiff_t>(anchor, static_cast<std::ptrdiff_t>(ref.inputs.size()) - 1);
    }
    return {match->state, &match->extension->input, static_cast<std::size_t>(anchor), true};
  }
  if (policy == MismatchPolicy::kThrow) {
    std::ostringstream msg;
    msg << "mode " << mode.value << " at knot " << k << " differs from reference mode "
        << ref.modes[k].value << " and no extension covers it";
    throw ExtensionCoverageError(msg.str());
  }
  return {&ref.states[k], raw_input, k, false};
}

}  // namespace hilqr
