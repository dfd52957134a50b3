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
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hilqr/extensions.hpp"
#include "hilqr/simulator.hpp"

namespace hilqr {

// A trajectory to track together with its extensions.
struct TrackedReference {
  HybridTrajectory trajectory;
  std::vector<ReferenceExtension> extensions;
};

// Optional cost charged on the pre-event state of a transition.
struct TransitionCostTerms {
  double value = 0.0;
  Vector gradient;
  Matrix hessian;
};
using TransitionCost = std::function<TransitionCostTerms(const EventRecord& event)>;

// Quadratic tracking cost over N knots:
//
//   sum_i (x_i - xr_i)^T Q_i (x_i - xr_i) + (u_i - ur_i)^T R_i (u_i - ur_i)
//     + (x_N - xr_N)^T Q_N (x_N - xr_N) + sum over events of transition costs.
//
// With mode_matching on, a knot whose mode differs from the reference's is
// compared against the reference extension in the same mode.
struct CostModel {
  std::shared_ptr<const TrackedReference> reference;
  std::vector<Matrix> Q;
  std::vector<Matrix> R;
  Matrix Q_terminal;
  bool mode_matching = true;
  MismatchPolicy mismatch = MismatchPolicy::kThrow;
  TransitionCost transition_cost;

  std::size_t horizon() const { return Q.size(); }

  void validate(std::size_t state_dim, std::size_t input_dim) const {
    if (!reference) throw InvalidArgument("cost model has no reference");
    const std::size_t n_steps = Q.size();
    if (R.size() != n_steps) throw InvalidArgument("cost model: Q and R schedules differ in length");
    const HybridTrajectory& ref = reference->trajectory;
    if (ref.horizon() != n_steps || ref.states.size() != n_steps + 1) {
      throw InvalidArgument("cost model: reference length " + std::to_string(ref.horizon()) +
                            " does not match horizon " + std::to_string(n_steps));
    }
    auto check = [](const Matrix& M, std::size_t dim, const char* what, bool definite) {
      if (static_cast<std::size_t>(M.rows()) != dim || static_cast<std::size_t>(M.cols()) != dim) {
        throw InvalidArgument(std::string("cost model: ") + what + " has the wrong shape");
      }
      if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + M.cwiseAbs().maxCoeff())) {
        throw InvalidArgument(std::string("cost model: ") + what + " is not symmetric");
      }
      if (dim == 0) return;
      const Eigen::SelfAdjointEigenSolver<Matrix> es(M, Eigen::EigenvaluesOnly);
      const double lo = es.eigenvalues().minCoeff();
      if (definite ? !(lo > 0.0) : lo < -1e-12 * (1.0 + M.cwiseAbs().maxCoeff())) {
        throw InvalidArgument(std::string("cost model: ") + what +
                              (definite ? " is not positive definite" : " is not positive semidefinite"));
      }
    };
    for (const Matrix& q : Q) check(q, state_dim, "Q", false);
    for (const Matrix& r : R) check(r, input_dim, "R", true);
    check(Q_terminal, state_dim, "Q_N", false);
  }
};

// Value and derivatives of one running cost term.
struct StageCost {
  double value = 0.0;
  Vector J_x;
  Vector J_u;
  Matrix J_xx;
  Matrix J_uu;
  Matrix J_ux;
};

/// Running cost at knot k for (x, u) in `mode`.
inline StageCost tracking_cost(const CostModel& cost, std::size_t k, const Vector& x,
                               const Vector& u, ModeId mode) {
  const TrackedReference& ref = *cost.reference;
  const ResolvedReference target = resolve_reference(ref.trajectory, ref.extensions, k, mode,
                                                     cost.mode_matching, cost.mismatch);
  const Vector dx = x - *target.state;
  const Vector du = u - *target.input;
  const Matrix& Q = cost.Q[k];
  const Matrix& R = cost.R[k];
  StageCost out;
  out.value = dx.dot(Q * dx) + du.dot(R * du);
  out.J_x = 2.0 * Q * dx;
  out.J_u = 2.0 * R * du;
  out.J_xx = 2.0 * Q;
  out.J_uu = 2.0 * R;
  out.J_ux = Matrix::Zero(u.size(), x.size());
  return out;
}

struct TerminalCost {
  double value = 0.0;
  Vector J_x;
  Matrix J_xx;
};

inline TerminalCost terminal_cost(const CostModel& cost, const Vector& x, ModeId mode) {
  const TrackedReference& ref = *cost.reference;
  const ResolvedReference target =
      resolve_reference(ref.trajectory, ref.extensions, cost.horizon(), mode, cost.mode_matching,
                        cost.mismatch);
  const Vector dx = x - *target.state;
  return {dx.dot(cost.Q_terminal * dx), 2.0 * cost.Q_terminal * dx, 2.0 * cost.Q_terminal};
}

/// Total cost of a trajectory under `cost`.
inline double trajectory_cost(const CostModel& cost, const HybridTrajectory& traj) {
  const std::size_t n_steps = cost.horizon();
  if (traj.horizon() != n_steps) {
    throw InvalidArgument("trajectory_cost: trajectory and cost horizons differ");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < n_steps; ++k) {
    const TrackedReference& ref = *cost.reference;
    const ResolvedReference target = resolve_reference(ref.trajectory, ref.extensions, k,
                                                       traj.modes[k], cost.mode_matching,
                                                       cost.mismatch);
    const Vector dx = traj.states[k] - *target.state;
    const Vector du = traj.inputs[k] - *target.input;
    total += dx.dot(cost.Q[k] * dx) + du.dot(cost.R[k] * du);
  }
  total += terminal_cost(cost, traj.states[n_steps], traj.modes[n_steps]).value;
  if (cost.transition_cost) {
    for (const TrajectoryEvent& ev : traj.events) total += cost.transition_cost(ev.record).value;
  }
  return total;
}

/// Cost model with the same Q and R at every knot.
inline CostModel uniform_cost(std::shared_ptr<const TrackedReference> reference, const Matrix& Q,
                              const Matrix& R, const Matrix& Q_terminal, bool mode_matching,
                              MismatchPolicy mismatch = MismatchPolicy::kThrow) {
  CostModel cost;
  const std::size_t n_steps = reference->trajectory.horizon();
  cost.reference = std::move(reference);
  cost.Q.assign(n_steps, Q);
  cost.R.assign(n_steps, R);
  cost.Q_terminal = Q_terminal;
  cost.mode_matching = mode_matching;
  cost.mismatch = mismatch;
  return cost;
}

}  // namespace hilqr
