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
#include <future>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hilqr/closed_loop.hpp"
#include "hilqr/cost.hpp"
#include "hilqr/extensions.hpp"
#include "hilqr/gains.hpp"
#include "hilqr/linearization.hpp"
#include "hilqr/simulator.hpp"

namespace hilqr {

// How a knot interval that contains an event is linearized.
//  kSplitStep: f = Phi(dt2) Xi Phi(dt1), the exact first-order step map.
//  kEndOfStep: the event is moved to the end of the interval, f = Xi Phi(dt),
//              with Phi taken over the whole step in the pre-event mode.
enum class EventLinearization { kSplitStep, kEndOfStep };

struct LinearizationOptions {
  bool saltation = true;  // false replaces Xi by the identity (ablation)
  EventLinearization convention = EventLinearization::kSplitStep;
  IntegratorOptions integrator;
};

// Jacobians of one knot interval. Without an event, (f_x, f_u) is the whole
// step. With one, (f_x, f_u) covers the flow up to the event and `event`
// carries the saltation matrix and the post-event flow Jacobians.
struct StageJacobians {
  struct Event {
    Matrix saltation;
    Matrix post_x;
    Matrix post_u;
  };

  Matrix f_x;
  Matrix f_u;
  std::optional<Event> event;

  Matrix A() const { return event ? Matrix(event->post_x * event->saltation * f_x) : f_x; }
  Matrix B() const {
    return event ? Matrix(event->post_x * event->saltation * f_u + event->post_u) : f_u;
  }
};

inline StageJacobians linearize_stage(const HybridSystem& sys, const HybridTrajectory& traj,
                                      std::size_t k, const LinearizationOptions& options = {}) {
  const Vector& x = traj.states[k];
  const Vector& u = traj.inputs[k];
  const double t = traj.time(k);
  const EventRecord* ev = traj.event_at(k);
  StageJacobians out;
  if (!ev) {
    FlowJacobians j = linearize_flow(sys, traj.modes[k], t, x, u, traj.dt, options.integrator);
    out.f_x = std::move(j.f_x);
    out.f_u = std::move(j.f_u);
    return out;
  }
  const Transition& tr = sys.transition(ev->transition_index);
  const Eigen::Index n = x.size();
  const Eigen::Index m = u.size();
  StageJacobians::Event part;
  part.saltation = options.saltation ? ev->saltation : Matrix::Identity(n, n);
  if (options.convention == EventLinearization::kSplitStep) {
    FlowJacobians pre = linearize_flow(sys, tr.id.source, t, x, u, ev->dt1, options.integrator);
    FlowJacobians post =
        linearize_flow(sys, tr.id.target, ev->event_time, ev->x_post, u, ev->dt2, options.integrator);
    out.f_x = std::move(pre.f_x);
    out.f_u = std::move(pre.f_u);
    part.post_x = std::move(post.f_x);
    part.post_u = std::move(post.f_u);
  } else {
    FlowJacobians pre = linearize_flow(sys, tr.id.source, t, x, u, traj.dt, options.integrator);
    out.f_x = std::move(pre.f_x);
    out.f_u = std::move(pre.f_u);
    part.post_x = Matrix::Identity(n, n);
    part.post_u = Matrix::Zero(n, m);
  }
  out.event = std::move(part);
  return out;
}

inline std::vector<StageJacobians> linearize_trajectory(const HybridSystem& sys,
                                                        const HybridTrajectory& traj,
                                                        const LinearizationOptions& options = {}) {
  std::vector<StageJacobians> out;
  out.reserve(traj.horizon());
  for (std::size_t k = 0; k < traj.horizon(); ++k) out.push_back(linearize_stage(sys, traj, k, options));
  return out;
}

/// Q-function expansion at one knot from the running cost, the step
/// Jacobians and the next knot's value expansion (V_x, V_xx). A transition
/// cost, when present, enters through the pre-event Jacobians.
inline ExpansionCoefficients stage_expansion(const StageCost& J, const StageJacobians& jac,
                                             const Vector& V_x, const Matrix& V_xx,
                                             const TransitionCostTerms* transition = nullptr) {
  const Matrix A = jac.A();
  const Matrix B = jac.B();
  ExpansionCoefficients q;
  q.Q_x = J.J_x + A.transpose() * V_x;
  q.Q_u = J.J_u + B.transpose() * V_x;
  const Matrix VA = V_xx * A;
  const Matrix VB = V_xx * B;
  q.Q_xx = J.J_xx + A.transpose() * VA;
  q.Q_ux = J.J_ux + B.transpose() * VA;
  q.Q_uu = J.J_uu + B.transpose() * VB;
  if (transition && jac.event) {
    const Matrix& Ap = jac.f_x;
    const Matrix& Bp = jac.f_u;
    q.Q_x += Ap.transpose() * transition->gradient;
    q.Q_u += Bp.transpose() * transition->gradient;
    q.Q_xx += Ap.transpose() * transition->hessian * Ap;
    q.Q_ux += Bp.transpose() * transition->hessian * Ap;
    q.Q_uu += Bp.transpose() * transition->hessian * Bp;
  }
  q.Q_xx = 0.5 * (q.Q_xx + q.Q_xx.transpose());
  q.Q_uu = 0.5 * (q.Q_uu + q.Q_uu.transpose());
  return q;
}

struct BackwardPassOptions {
  LinearizationOptions linearization;
  double regularization_max = 1e6;
  double regularization_increase = 10.0;
  double regularization_min = 1e-9;
  bool zero_feedback = false;  // K = 0; V reduces to the open-loop cost gradient
};

/// Bellman recursion from knot N-1 down to 0 with Q_uu + lambda I
/// regularization. Raises lambda until every Q_uu is positive definite;
/// throws SolverError past the cap.
inline GainSchedule backward_pass(const HybridSystem& sys, const CostModel& cost,
                                  const HybridTrajectory& traj, double regularization,
                                  const BackwardPassOptions& options = {}) {
  const std::size_t n_steps = traj.horizon();
  if (cost.horizon() != n_steps) throw InvalidArgument("backward_pass: cost and trajectory misaligned");
  const std::vector<StageJacobians> jacs = linearize_trajectory(sys, traj, options.linearization);
  std::vector<StageCost> stage(n_steps);
  for (std::size_t k = 0; k < n_steps; ++k) {
    stage[k] = tracking_cost(cost, k, traj.states[k], traj.inputs[k], traj.modes[k]);
  }
  std::vector<std::optional<TransitionCostTerms>> transition(n_steps);
  if (cost.transition_cost) {
    for (const TrajectoryEvent& ev : traj.events) transition[ev.knot] = cost.transition_cost(ev.record);
  }
  const TerminalCost terminal = terminal_cost(cost, traj.states[n_steps], traj.modes[n_steps]);
  const Eigen::Index m = static_cast<Eigen::Index>(sys.input_dim());

  double lambda = std::max(regularization, 0.0);
  for (;;) {
    GainSchedule gains;
    gains.u_ff.resize(n_steps);
    gains.K.resize(n_steps);
    gains.expansions.resize(n_steps);
    gains.V_x.resize(n_steps + 1);
    gains.V_xx.resize(n_steps + 1);
    gains.V_x[n_steps] = terminal.J_x;
    gains.V_xx[n_steps] = terminal.J_xx;
    gains.regularization = lambda;
    bool ok = true;
    for (std::size_t i = n_steps; i-- > 0;) {
      ExpansionCoefficients q =
          stage_expansion(stage[i], jacs[i], gains.V_x[i + 1], gains.V_xx[i + 1],
                          transition[i] ? &*transition[i] : nullptr);
      const Matrix quu_reg = q.Q_uu + lambda * Matrix::Identity(m, m);
      const Eigen::LLT<Matrix> llt(quu_reg);
      if (llt.info() != Eigen::Success) {
        ok = false;
        break;
      }
      Vector k_ff = -llt.solve(q.Q_u);
      Matrix K = options.zero_feedback ? Matrix::Zero(m, q.Q_x.size()) : Matrix(-llt.solve(q.Q_ux));
      if (!k_ff.allFinite() || !K.allFinite()) {
        ok = false;
        break;
      }
      if (options.zero_feedback) {
        gains.V_x[i] = q.Q_x;
        gains.V_xx[i] = q.Q_xx;
      } else {
        gains.V_x[i] = q.Q_x + q.Q_ux.transpose() * k_ff;
        const Matrix vxx = q.Q_xx + q.Q_ux.transpose() * K;
        gains.V_xx[i] = 0.5 * (vxx + vxx.transpose());
      }
      gains.dJ_linear += k_ff.dot(q.Q_u);
      gains.dJ_quadratic += k_ff.dot(q.Q_uu * k_ff);
      gains.u_ff[i] = std::move(k_ff);
      gains.K[i] = std::move(K);
      gains.expansions[i] = std::move(q);
    }
    if (ok) return gains;
    lambda = std::max(lambda * options.regularization_increase, options.regularization_min);
    if (lambda > options.regularization_max) {
      throw SolverError("backward pass: Q_uu is not positive definite at maximum regularization");
    }
  }
}

struct LineSearchCandidate {
  double alpha = 0.0;
  bool ok = false;
  double cost = 0.0;
  std::string error;
};

struct ForwardPassOptions {
  bool parallel = true;
  double armijo_ratio = 1e-4;
  ClosedLoopOptions closed_loop;
};

struct ForwardPassResult {
  bool accepted = false;
  HybridTrajectory trajectory;
  double alpha = 0.0;
  double cost = 0.0;
  std::vector<LineSearchCandidate> candidates;
};

/// Line-search schedule alpha_j = base^j, j = 0..width-1.
inline std::vector<double> line_search_schedule(std::size_t width, double base) {
  std::vector<double> alphas(width);
  double a = 1.0;
  for (double& alpha : alphas) {
    alpha = a;
    a *= base;
  }
  return alphas;
}

/// Evaluates a closed-loop rollout for every alpha (concurrently when
/// enabled) and keeps the lowest-cost candidate whose actual reduction is at
/// least armijo_ratio times the predicted one. Ties go to the larger alpha.
/// Without a qualifying candidate the nominal is returned with alpha = 0.
inline ForwardPassResult forward_pass(const HybridSystem& sys, const CostModel& cost,
                                      const HybridTrajectory& nominal,
                                      std::span<const ReferenceExtension> extensions,
                                      const GainSchedule& gains, std::span<const double> alphas,
                                      double nominal_cost, const ForwardPassOptions& options = {}) {
  if (alphas.empty()) throw InvalidArgument("forward_pass: empty line-search schedule");
  for (std::size_t j = 0; j < alphas.size(); ++j) {
    if (!(alphas[j] > 0.0 && alphas[j] <= 1.0) || (j > 0 && !(alphas[j] < alphas[j - 1]))) {
      throw InvalidArgument("forward_pass: alphas must be in (0, 1] and strictly descending");
    }
  }
  struct Outcome {
    LineSearchCandidate info;
    HybridTrajectory trajectory;
  };
  auto evaluate = [&](double alpha) {
    Outcome out;
    out.info.alpha = alpha;
    try {
      out.trajectory = closed_loop_rollout(sys, nominal, extensions, gains, alpha,
                                           nominal.states.front(), nominal.modes.front(),
                                           options.closed_loop);
      out.info.cost = trajectory_cost(cost, out.trajectory);
      out.info.ok = std::isfinite(out.info.cost);
      if (!out.info.ok) out.info.error = "non-finite cost";
    } catch (const Error& e) {
      out.info.error = e.what();
    }
    return out;
  };

  std::vector<Outcome> outcomes(alphas.size());
  if (options.parallel && alphas.size() > 1) {
    std::vector<std::future<Outcome>> futures;
    futures.reserve(alphas.size());
    for (double alpha : alphas) futures.push_back(std::async(std::launch::async, evaluate, alpha));
    for (std::size_t j = 0; j < futures.size(); ++j) outcomes[j] = futures[j].get();
  } else {
    for (std::size_t j = 0; j < alphas.size(); ++j) outcomes[j] = evaluate(alphas[j]);
  }

  ForwardPassResult result;
  result.candidates.reserve(outcomes.size());
  std::optional<std::size_t> best;
  bool any_ok = false;
  for (std::size_t j = 0; j < outcomes.size(); ++j) {
    const LineSearchCandidate& c = outcomes[j].info;
    result.candidates.push_back(c);
    if (!c.ok) continue;
    any_ok = true;
    const double predicted = -expected_reduction(gains, c.alpha);
    const double actual = nominal_cost - c.cost;
    const bool sufficient =
        predicted > 0.0 ? actual >= options.armijo_ratio * predicted : actual > 0.0;
    if (!sufficient) continue;
    if (!best || c.cost < outcomes[*best].info.cost) best = j;
  }
  if (!any_ok) {
    throw SolverError("forward pass: every line-search rollout failed (" +
                      outcomes.front().info.error + ")");
  }
  if (!best) {
    result.trajectory = nominal;
    result.cost = nominal_cost;
    return result;
  }
  result.accepted = true;
  result.alpha = outcomes[*best].info.alpha;
  result.cost = outcomes[*best].info.cost;
  result.trajectory = std::move(outcomes[*best].trajectory);
  return result;
}

struct SolveOptions {
  std::size_t max_iterations = 50;
  double convergence_threshold = 1e-4;
  std::size_t line_search_width = 9;
  double line_search_base = 0.6;
  double armijo_ratio = 1e-4;
  double regularization_init = 1e-9;
  double regularization_min = 1e-9;
  double regularization_max = 1e6;
  double regularization_increase = 10.0;
  double regularization_decrease = 5.0;
  bool parallel = true;
  // Extension horizon for the iterates; unset means 10% of the horizon.
  std::optional<std::size_t> extension_horizon;
  MismatchPolicy mismatch = MismatchPolicy::kUseReference;
  LinearizationOptions linearization;
  SimulationOptions simulation;
};

struct SolveReport {
  bool converged = false;
  std::size_t iterations = 0;
  double final_cost = 0.0;
  double final_expected_reduction = 0.0;
  std::vector<double> cost_history;  // initial cost, then one entry per accepted step
  std::vector<double> expected_reduction_history;
  std::vector<double> regularization_history;
  std::vector<double> accepted_alphas;
  std::string message;
};

struct SolveResult {
  HybridTrajectory trajectory;
  std::vector<ReferenceExtension> extensions;
  GainSchedule gains;
  SolveReport report;
};

inline std::size_t default_extension_horizon(std::size_t n_steps) {
  return std::max<std::size_t>(1, n_steps / 10);
}

/// Hybrid iLQR: alternate backward passes and parallel line searches from
/// `initial` until |expected_reduction(1)| drops below the threshold. A
/// backward pass right after a rejected line search cannot declare
/// convergence, since its regularization was just raised. Hitting the
/// iteration cap or the regularization cap returns the best trajectory with
/// converged = false.
inline SolveResult solve(const HybridSystem& sys, const CostModel& cost, HybridTrajectory initial,
                         const SolveOptions& options = {}) {
  cost.validate(sys.state_dim(), sys.input_dim());
  if (initial.horizon() != cost.horizon()) throw InvalidArgument("solve: initial trajectory has the wrong horizon");
  const std::size_t ext_horizon =
      options.extension_horizon.value_or(default_extension_horizon(initial.horizon()));
  const std::vector<double> alphas =
      line_search_schedule(options.line_search_width, options.line_search_base);

  BackwardPassOptions bp;
  bp.linearization = options.linearization;
  bp.regularization_max = options.regularization_max;
  bp.regularization_increase = options.regularization_increase;
  bp.regularization_min = options.regularization_min;
  ForwardPassOptions fp;
  fp.parallel = options.parallel;
  fp.armijo_ratio = options.armijo_ratio;
  fp.closed_loop.mismatch = options.mismatch;
  fp.closed_loop.simulation = options.simulation;

  SolveResult result;
  result.trajectory = std::move(initial);
  double current = trajectory_cost(cost, result.trajectory);
  result.report.cost_history.push_back(current);
  double lambda = options.regularization_init;
  bool may_converge = true;
  bool gains_stale = true;

  for (std::size_t it = 1; it <= options.max_iterations; ++it) {
    result.report.iterations = it;
    if (gains_stale) {
      result.extensions = build_extensions(sys, result.trajectory, ext_horizon,
                                           options.simulation.integrator);
    }
    try {
      result.gains = backward_pass(sys, cost, result.trajectory, lambda, bp);
    } catch (const SolverError& e) {
      result.report.message = e.what();
      break;
    }
    gains_stale = false;
    lambda = result.gains.regularization;
    const double dj = expected_reduction(result.gains, 1.0);
    result.report.expected_reduction_history.push_back(dj);
    result.report.regularization_history.push_back(lambda);
    result.report.final_expected_reduction = dj;
    if (may_converge && std::abs(dj) < options.convergence_threshold) {
      result.report.converged = true;
      break;
    }

    ForwardPassResult step;
    try {
      step = forward_pass(sys, cost, result.trajectory, result.extensions, result.gains, alphas,
                          current, fp);
    } catch (const SolverError& e) {
      step.accepted = false;
      result.report.message = e.what();
    }
    if (step.accepted) {
      result.trajectory = std::move(step.trajectory);
      current = step.cost;
      result.report.cost_history.push_back(current);
      result.report.accepted_alphas.push_back(step.alpha);
      lambda = std::max(lambda / options.regularization_decrease, options.regularization_min);
      may_converge = true;
      gains_stale = true;
    } else {
      lambda = std::max(lambda * options.regularization_increase, options.regularization_min);
      may_converge = false;
      if (lambda > options.regularization_max) {
        result.report.message = "line search failed at maximum regularization";
        break;
      }
    }
  }
  if (!result.report.converged && result.report.message.empty()) {
    result.report.message = "iteration limit reached";
  }
  // Keep the returned gains consistent with the returned trajectory.
  if (gains_stale) {
    result.extensions =
        build_extensions(sys, result.trajectory, ext_horizon, options.simulation.integrator);
    try {
      result.gains = backward_pass(sys, cost, result.trajectory, lambda, bp);
      result.report.final_expected_reduction = expected_reduction(result.gains, 1.0);
    } catch (const SolverError&) {
    }
  }
  result.report.final_cost = current;
  return result;
}

/// Solve starting from an open-loop rollout of `initial_inputs`.
inline SolveResult solve(const HybridSystem& sys, const CostModel& cost, const Vector& x0,
                         ModeId mode0, const std::vector<Vector>& initial_inputs, double dt,
                         const SolveOptions& options = {}) {
  return solve(sys, cost,
               rollout(sys, x0, mode0, initial_inputs, dt, cost.reference->trajectory.t0,
                       options.simulation),
               options);
}

}  // namespace hilqr
