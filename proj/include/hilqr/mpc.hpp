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
#include <chrono>
#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hilqr/closed_loop.hpp"
#include "hilqr/cost.hpp"
#include "hilqr/extensions.hpp"
#include "hilqr/ilqr.hpp"
#include "hilqr/simulator.hpp"

namespace hilqr {

struct MpcConfig {
  std::size_t horizon = 50;
  double dt = 0.001;
  double convergence_threshold = 1e-4;
  std::size_t max_iterations = 50;
  std::size_t line_search_width = 9;
  std::optional<std::size_t> extension_horizon;  // unset: 10% of the window
  bool warm_start = true;
  bool seed_reference = true;
  bool cost_update = true;  // compare against extensions on mode mismatch
  bool saltation = true;
  bool parallel = true;
  SimulationOptions simulation;

  void validate() const {
    if (horizon < 2) throw InvalidArgument("mpc: horizon must be at least 2 knots");
    if (!(dt > 0.0)) throw InvalidArgument("mpc: dt must be positive");
    if (!(convergence_threshold > 0.0)) throw InvalidArgument("mpc: threshold must be positive");
    if (max_iterations == 0) throw InvalidArgument("mpc: max_iterations must be positive");
    if (line_search_width == 0) throw InvalidArgument("mpc: line-search width must be positive");
    if (!warm_start && !seed_reference) {
      throw InvalidArgument("mpc: need warm start or reference seeding for an initial guess");
    }
  }

  SolveOptions solve_options() const {
    SolveOptions o;
    o.max_iterations = max_iterations;
    o.convergence_threshold = convergence_threshold;
    o.line_search_width = line_search_width;
    o.parallel = parallel;
    o.extension_horizon = extension_horizon;
    o.mismatch = MismatchPolicy::kUseReference;
    o.linearization.saltation = saltation;
    o.simulation = simulation;
    return o;
  }
};

// Running weights are rates per second, scaled by dt at each knot.
struct TrackingWeights {
  Matrix Q_rate;
  Matrix R_rate;
  Matrix Q_terminal;
};

struct TrackingProblem {
  std::shared_ptr<const HybridSystem> model;
  std::shared_ptr<const TrackedReference> reference;
  TrackingWeights weights;
  GainSchedule tracking_gains;  // reference-tracking feedback over the whole reference

  std::size_t length() const { return reference->trajectory.horizon(); }
};

inline CostModel tracking_cost_model(std::shared_ptr<const TrackedReference> window,
                                     const TrackingWeights& w, bool cost_update) {
  const double dt = window->trajectory.dt;
  return uniform_cost(std::move(window), w.Q_rate * dt, w.R_rate * dt, w.Q_terminal, cost_update,
                      MismatchPolicy::kUseReference);
}

/// Builds the tracking problem and its reference-tracking gains from one
/// backward pass on the reference itself.
inline TrackingProblem make_tracking_problem(std::shared_ptr<const HybridSystem> model,
                                             std::shared_ptr<const TrackedReference> reference,
                                             TrackingWeights weights, const MpcConfig& cfg) {
  if (!model || !reference) throw InvalidArgument("tracking problem: missing model or reference");
  if (reference->trajectory.horizon() == 0) throw InvalidArgument("tracking problem: empty reference");
  if (std::abs(reference->trajectory.dt - cfg.dt) > 1e-12 * cfg.dt) {
    throw InvalidArgument("tracking problem: reference dt differs from the MPC dt");
  }
  TrackingProblem p{std::move(model), std::move(reference), std::move(weights), {}};
  const CostModel cost = tracking_cost_model(p.reference, p.weights, true);
  cost.validate(p.model->state_dim(), p.model->input_dim());
  BackwardPassOptions bp;
  bp.linearization.saltation = cfg.saltation;
  bp.linearization.integrator = cfg.simulation.integrator;
  p.tracking_gains = backward_pass(*p.model, cost, p.reference->trajectory, 1e-9, bp);
  return p;
}

/// Knots [start, start + length] of the reference with its events and
/// extensions re-indexed to the window.
inline std::shared_ptr<const TrackedReference> slice_reference(const TrackedReference& ref,
                                                               std::size_t start,
                                                               std::size_t length) {
  const HybridTrajectory& full = ref.trajectory;
  if (start + length > full.horizon()) throw InvalidArgument("slice_reference: window past the end");
  auto out = std::make_shared<TrackedReference>();
  HybridTrajectory& w = out->trajectory;
  w.t0 = full.time(start);
  w.dt = full.dt;
  w.states.assign(full.states.begin() + start, full.states.begin() + start + length + 1);
  w.modes.assign(full.modes.begin() + start, full.modes.begin() + start + length + 1);
  w.inputs.assign(full.inputs.begin() + start, full.inputs.begin() + start + length);
  for (const TrajectoryEvent& ev : full.events) {
    if (ev.knot >= start && ev.knot < start + length) w.events.push_back({ev.knot - start, ev.record});
  }
  out->extensions = shift_extensions(ref.extensions, static_cast<std::ptrdiff_t>(start));
  return out;
}

struct MpcSolution {
  HybridTrajectory plan;
  GainSchedule gains;
  Vector first_input;
  SolveReport report;
  bool warm_started = false;  // initial guess came from the previous solution
};

namespace detail {

inline GainSchedule slice_gains(const GainSchedule& g, std::size_t start, std::size_t length) {
  GainSchedule out;
  out.K.assign(g.K.begin() + start, g.K.begin() + start + length);
  out.u_ff.reserve(length);
  for (std::size_t k = 0; k < length; ++k) out.u_ff.push_back(Vector::Zero(g.u_ff[start + k].size()));
  return out;
}

}  // namespace detail

/// One receding-horizon solve at reference knot t_index. The initial guess
/// is the cheaper of the shifted previous plan and the reference tracked
/// with its precomputed gains. Always returns the best plan found; a
/// non-converged solve is flagged in the report.
inline MpcSolution mpc_step(const TrackingProblem& problem, const Vector& x_now, ModeId mode_now,
                            std::size_t t_index, const MpcSolution* previous,
                            const MpcConfig& cfg) {
  const HybridSystem& sys = *problem.model;
  const HybridTrajectory& full = problem.reference->trajectory;
  if (t_index > full.horizon()) throw InvalidArgument("mpc_step: t_index past the reference end");
  sys.check_state(x_now);
  sys.check_mode(mode_now);
  const std::size_t len = std::min(cfg.horizon, full.horizon() - t_index);

  MpcSolution sol;
  if (len == 0) {
    // End of the reference: nothing left to plan, hold the last input.
    sol.plan.t0 = full.time(t_index);
    sol.plan.dt = full.dt;
    sol.plan.states = {x_now};
    sol.plan.modes = {mode_now};
    sol.first_input = full.inputs.back();
    sol.report.converged = true;
    return sol;
  }

  const auto window = slice_reference(*problem.reference, t_index, len);
  const CostModel cost = tracking_cost_model(window, problem.weights, cfg.cost_update);

  std::optional<HybridTrajectory> best;
  double best_cost = 0.0;
  std::string failures;
  auto consider = [&](auto&& make, bool warm) {
    try {
      HybridTrajectory candidate = make();
      const double c = trajectory_cost(cost, candidate);
      if (std::isfinite(c) && (!best || c < best_cost)) {
        best = std::move(candidate);
        best_cost = c;
        sol.warm_started = warm;
      }
    } catch (const Error& e) {
      failures += std::string(failures.empty() ? "" : "; ") + e.what();
    }
  };
  if (cfg.warm_start && previous && previous->plan.horizon() > 0) {
    consider(
        [&] {
          std::vector<Vector> inputs;
          inputs.reserve(len);
          const std::vector<Vector>& prev = previous->plan.inputs;
          for (std::size_t k = 1; k < prev.size() && inputs.size() < len; ++k) inputs.push_back(prev[k]);
          while (inputs.size() < len) inputs.push_back(window->trajectory.inputs[inputs.size()]);
          return rollout(sys, x_now, mode_now, inputs, full.dt, window->trajectory.t0, cfg.simulation);
        },
        true);
  }
  if (cfg.seed_reference || !best) {
    consider(
        [&] {
          ClosedLoopOptions cl;
          cl.mismatch = MismatchPolicy::kUseReference;
          cl.simulation = cfg.simulation;
          return closed_loop_rollout(sys, window->trajectory, window->extensions,
                                     detail::slice_gains(problem.tracking_gains, t_index, len), 0.0,
                                     x_now, mode_now, cl);
        },
        false);
  }
  if (!best) throw SolverError("mpc_step: no feasible initial rollout (" + failures + ")");

  SolveResult solved = solve(sys, cost, std::move(*best), cfg.solve_options());
  sol.plan = std::move(solved.trajectory);
  sol.gains = std::move(solved.gains);
  sol.report = std::move(solved.report);
  sol.first_input = sol.plan.inputs.front();
  return sol;
}

struct MpcLogRow {
  double t = 0.0;
  ModeId mode;
  Vector x;
  Vector u;
  bool converged = false;
  std::size_t iterations = 0;
  double expected_reduction = 0.0;
  double solve_ms = 0.0;
  std::vector<double> cost_history;
};

struct MpcSummary {
  std::size_t n_steps = 0;
  std::size_t n_nonconverged = 0;
  double max_tracking_error = 0.0;
  double mean_iterations = 0.0;
  double mean_solve_ms = 0.0;
  double peak_input = 0.0;
  Vector final_state;
};

struct MpcLog {
  std::vector<MpcLogRow> rows;
  MpcSummary summary;
};

inline MpcSummary summarize(const std::vector<MpcLogRow>& rows, const HybridTrajectory& ref) {
  MpcSummary s;
  s.n_steps = rows.size();
  double iterations = 0.0;
  double ms = 0.0;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const MpcLogRow& r = rows[k];
    if (!r.converged) ++s.n_nonconverged;
    iterations += static_cast<double>(r.iterations);
    ms += r.solve_ms;
    if (k < ref.states.size()) {
      s.max_tracking_error = std::max(s.max_tracking_error, (r.x - ref.states[k]).norm());
    }
    s.peak_input = std::max(s.peak_input, r.u.cwiseAbs().maxCoeff());
  }
  if (!rows.empty()) {
    s.mean_iterations = iterations / static_cast<double>(rows.size());
    s.mean_solve_ms = ms / static_cast<double>(rows.size());
    s.final_state = rows.back().x;
  }
  return s;
}

/// Largest input magnitude logged at knots [first, last].
inline double peak_input_between(const MpcLog& log, std::size_t first, std::size_t last) {
  double peak = 0.0;
  for (std::size_t k = first; k <= last && k < log.rows.size(); ++k) {
    peak = std::max(peak, log.rows[k].u.cwiseAbs().maxCoeff());
  }
  return peak;
}

/// Closed-loop MPC over the whole reference: one solve per reference knot,
/// the plant paused while solving and then advanced one dt under the first
/// planned input. The plant may differ from the planning model.
inline MpcLog run_mpc(const TrackingProblem& problem, const HybridSystem& plant, const MpcConfig& cfg,
                      const Vector& disturbance = Vector()) {
  cfg.validate();
  const HybridTrajectory& ref = problem.reference->trajectory;
  Vector x = ref.states.front();
  if (disturbance.size() > 0) {
    if (disturbance.size() != x.size()) throw InvalidArgument("run_mpc: disturbance has the wrong size");
    x += disturbance;
  }
  ModeId mode = plant.classify(ref.t0, x).value_or(ref.modes.front());

  MpcLog log;
  log.rows.reserve(ref.states.size());
  std::optional<MpcSolution> previous;
  for (std::size_t k = 0; k <= ref.horizon(); ++k) {
    const double t = ref.time(k);
    const auto start = std::chrono::steady_clock::now();
    MpcSolution sol = mpc_step(problem, x, mode, k, previous ? &*previous : nullptr, cfg);
    const auto stop = std::chrono::steady_clock::now();

    MpcLogRow row;
    row.t = t;
    row.mode = mode;
    row.x = x;
    row.u = sol.first_input;
    row.converged = sol.report.converged;
    row.iterations = sol.report.iterations;
    row.expected_reduction = sol.report.final_expected_reduction;
    row.solve_ms = std::chrono::duration<double, std::milli>(stop - start).count();
    row.cost_history = sol.report.cost_history;
    if (k < ref.horizon()) {
      StepResult step = integrate_step(plant, mode, t, x, sol.first_input, ref.dt, cfg.simulation);
      x = std::move(step.x_next);
      mode = step.mode_next;
    }
    log.rows.push_back(std::move(row));
    previous = std::move(sol);
  }
  log.summary = summarize(log.rows, ref);
  return log;
}

// Timestepping contact penalty: each leg's input block is interpolated from
// R_max toward R_min by that leg's share of the total contact force.
struct ForceWeightConfig {
  Matrix R_min;
  Matrix R_max;
  std::vector<std::vector<std::size_t>> legs;  // input indices per leg

  void validate() const {
    const Eigen::Index m = R_max.rows();
    if (R_max.cols() != m || R_min.rows() != m || R_min.cols() != m) {
      throw InvalidArgument("force weights: R_min and R_max must be square and the same size");
    }
    auto spd = [](const Matrix& M, const char* what) {
      if ((M - M.transpose()).cwiseAbs().maxCoeff() > 0.0) {
        throw InvalidArgument(std::string("force weights: ") + what + " is not symmetric");
      }
      if (Eigen::LLT<Matrix>(M).info() != Eigen::Success) {
        throw InvalidArgument(std::string("force weights: ") + what + " is not positive definite");
      }
    };
    spd(R_min, "R_min");
    spd(R_max, "R_max");
    std::vector<bool> used(static_cast<std::size_t>(m), false);
    for (const auto& leg : legs) {
      if (leg.empty()) throw InvalidArgument("force weights: a leg has no inputs");
      for (std::size_t i : leg) {
        if (i >= static_cast<std::size_t>(m)) throw InvalidArgument("force weights: input index out of range");
        if (used[i]) throw InvalidArgument("force weights: legs share an input");
        used[i] = true;
      }
      const Matrix d = block(R_max, leg) - block(R_min, leg);
      const Eigen::SelfAdjointEigenSolver<Matrix> es(d, Eigen::EigenvaluesOnly);
      if (es.eigenvalues().minCoeff() < -1e-12 * (1.0 + d.cwiseAbs().maxCoeff())) {
        throw InvalidArgument("force weights: R_max - R_min is not PSD on a leg block");
      }
    }
  }

  static Matrix block(const Matrix& M, const std::vector<std::size_t>& idx) {
    const auto n = static_cast<Eigen::Index>(idx.size());
    Matrix out(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
      for (Eigen::Index c = 0; c < n; ++c) out(r, c) = M(idx[r], idx[c]);
    }
    return out;
  }
};

struct ForceWeightedPenalty {
  std::vector<double> weights;
  std::vector<Matrix> leg_penalties;
  Matrix assembled;  // R_max with each leg's block replaced by its R_j
};

inline ForceWeightedPenalty force_weighted_penalty(const std::vector<double>& lambda,
                                                   const ForceWeightConfig& cfg) {
  cfg.validate();
  if (lambda.size() != cfg.legs.size()) {
    throw InvalidArgument("force weights: expected one force per leg");
  }
  double total = 0.0;
  for (double l : lambda) {
    if (!(l >= 0.0) || !std::isfinite(l)) throw InvalidArgument("force weights: forces must be finite and nonnegative");
    total += l;
  }
  ForceWeightedPenalty out;
  out.assembled = cfg.R_max;
  for (std::size_t j = 0; j < lambda.size(); ++j) {
    const double w = total > 0.0 ? lambda[j] / total : 0.0;
    const std::vector<std::size_t>& leg = cfg.legs[j];
    const Matrix rmax = ForceWeightConfig::block(cfg.R_max, leg);
    const Matrix R = rmax - w * (rmax - ForceWeightConfig::block(cfg.R_min, leg));
    for (std::size_t r = 0; r < leg.size(); ++r) {
      for (std::size_t c = 0; c < leg.size(); ++c) out.assembled(leg[r], leg[c]) = R(r, c);
    }
    out.weights.push_back(w);
    out.leg_penalties.push_back(R);
  }
  return out;
}

}  // namespace hilqr
