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

#include "verification.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "hilqr/ilqr.hpp"
#include "hilqr/systems/double_integrator.hpp"

namespace hilqr::app {
namespace {

using systems::kFalling;
using systems::kImpact;
using systems::kRising;

double rel(const Matrix& a, const Matrix& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

// State at t0 + T after starting at x in the falling mode, one impact inside.
Vector through_impact(const HybridSystem& ball, const Vector& x, const Vector& u, double T) {
  return integrate_step(ball, kFalling, 0.0, x, u, T).x_next;
}

CheckResult make(std::string name, double measured, double tol, std::string detail = {}) {
  return {std::move(name), measured, tol, std::isfinite(measured) && measured <= tol, std::move(detail)};
}

}  // namespace

double saltation_oracle_error(const systems::BouncingBallParams& params,
                              const systems::BouncingBallParams& oracle_params, std::size_t samples,
                              std::uint64_t seed) {
  const HybridSystem ball = systems::bouncing_ball(params);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> speed(0.1, 20.0);
  std::uniform_real_distribution<double> force(-30.0, 30.0);
  double worst = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const Vector x{{0.0, -speed(rng)}};
    const Vector u{{force(rng)}};
    const Matrix xi = saltation_matrix(ball, kImpact, 0.0, x, u).matrix;
    worst = std::max(worst, rel(xi, systems::ball_saltation_oracle(oracle_params, x, u)));
  }
  return worst;
}

// Flow-through-impact Jacobian against central differences of the map.
double saltation_fd_error(const systems::BouncingBallParams& params) {
  const HybridSystem ball = systems::bouncing_ball(params);
  const Vector x{{0.05, -2.0}};
  const Vector u{{1.5}};
  const double T = 0.05;
  HybridTrajectory traj = rollout(ball, x, kFalling, {u}, T);
  if (traj.events.size() != 1) return INFINITY;
  const Matrix J = linearize_stage(ball, traj, 0).A();
  Matrix fd(2, 2);
  const double h = 1e-6;
  for (int j = 0; j < 2; ++j) {
    Vector xp = x;
    Vector xm = x;
    xp[j] += h;
    xm[j] -= h;
    fd.col(j) = (through_impact(ball, xp, u, T) - through_impact(ball, xm, u, T)) / (2.0 * h);
  }
  return rel(J, fd);
}

double remainder_slope(const systems::BouncingBallParams& params) {
  const HybridSystem ball = systems::bouncing_ball(params);
  const Vector x{{0.05, -2.0}};
  const Vector u{{1.5}};
  const double T = 0.05;
  HybridTrajectory traj = rollout(ball, x, kFalling, {u}, T);
  if (traj.events.size() != 1) return NAN;
  const Matrix J = linearize_stage(ball, traj, 0).A();
  const Vector base = traj.states[1];
  const Vector dir = Vector{{0.6, -0.8}};
  std::vector<double> lx;
  std::vector<double> ly;
  for (double d : {1e-3, 1e-4, 1e-5}) {
    const Vector delta = d * dir;
    const double r = (through_impact(ball, x + delta, u, T) - base - J * delta).norm();
    lx.push_back(std::log10(d));
    ly.push_back(std::log10(r));
  }
  const double mx = (lx[0] + lx[1] + lx[2]) / 3.0;
  const double my = (ly[0] + ly[1] + ly[2]) / 3.0;
  double sxy = 0.0;
  double sxx = 0.0;
  for (int i = 0; i < 3; ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return sxy / sxx;
}

double riccati_gain_error() {
  const double dt = 0.01;
  const std::size_t N = 100;
  const HybridSystem di = systems::double_integrator(1.0);
  const Matrix A = systems::double_integrator_A(dt);
  const Matrix B = systems::double_integrator_B(1.0, dt);
  const Matrix Q = Vector{{1.0, 0.1}}.asDiagonal();
  const Matrix R = Matrix::Constant(1, 1, 0.01);
  const Matrix QN = Vector{{10.0, 1.0}}.asDiagonal();

  auto ref = std::make_shared<TrackedReference>();
  ref->trajectory = rollout(di, Vector::Zero(2), ModeId{0}, std::vector<Vector>(N, Vector::Zero(1)), dt);
  const CostModel cost = uniform_cost(ref, Q, R, QN, false);
  const HybridTrajectory start =
      rollout(di, Vector{{1.0, 0.0}}, ModeId{0}, std::vector<Vector>(N, Vector::Zero(1)), dt);
  const GainSchedule g = backward_pass(di, cost, start, 0.0);

  // The library's cost is x'Qx, so the Riccati recursion runs on (Q, R, Q_N).
  Matrix P = QN;
  double worst = 0.0;
  for (std::size_t k = N; k-- > 0;) {
    const Matrix S = R + B.transpose() * P * B;
    const Matrix K = -S.ldlt().solve(B.transpose() * P * A);
    P = Q + A.transpose() * P * A + A.transpose() * P * B * K;
    P = 0.5 * (P + P.transpose());
    worst = std::max(worst, rel(g.K[k], K));
  }
  return worst;
}

double gradient_check_error(const systems::BouncingBallParams& params, bool saltation) {
  const HybridSystem ball = systems::bouncing_ball(params);
  const double dt = 0.001;
  const std::size_t N = 300;
  std::vector<Vector> inputs;
  for (std::size_t k = 0; k < N; ++k) inputs.push_back(Vector{{2.0 * std::sin(0.02 * static_cast<double>(k))}});
  const Vector x0{{0.5, -1.0}};
  auto ref = std::make_shared<TrackedReference>();
  ref->trajectory = rollout(ball, Vector{{0.6, -0.5}}, kFalling, std::vector<Vector>(N, Vector::Zero(1)), dt);
  const CostModel cost = uniform_cost(ref, Vector{{1.0, 0.1}}.asDiagonal() * dt,
                                      Matrix::Constant(1, 1, 0.01 * dt), Vector{{5.0, 1.0}}.asDiagonal(),
                                      false);
  const HybridTrajectory traj = rollout(ball, x0, kFalling, inputs, dt);
  if (traj.events.size() != 1) return INFINITY;

  BackwardPassOptions bp;
  bp.zero_feedback = true;
  bp.linearization.saltation = saltation;
  const GainSchedule g = backward_pass(ball, cost, traj, 0.0, bp);

  auto cost_along = [&](double eps) {
    std::vector<Vector> u = inputs;
    for (std::size_t k = 0; k < N; ++k) u[k] += eps * g.u_ff[k];
    return trajectory_cost(cost, rollout(ball, x0, kFalling, u, dt));
  };
  double step = 0.0;
  for (const Vector& v : g.u_ff) step = std::max(step, v.cwiseAbs().maxCoeff());
  const double eps = 1e-4 / std::max(step, 1.0);
  const double fd = (cost_along(eps) - cost_along(-eps)) / (2.0 * eps);
  return std::abs(fd - g.dJ_linear) / std::max(std::abs(fd), 1e-300);
}

std::vector<CheckResult> run_verification(const ExperimentConfig& cfg, std::uint64_t seed) {
  std::vector<CheckResult> out;
  const systems::BouncingBallParams& p = cfg.system;
  systems::BouncingBallParams oracle = p;
  if (cfg.check.fault_injection == "oracle_restitution") {
    oracle.restitution = p.restitution > 0.5 ? p.restitution - 0.1 : p.restitution + 0.1;
  }
  out.push_back(make("saltation_vs_oracle", saltation_oracle_error(p, oracle, cfg.check.samples, seed), 1e-8,
                     std::to_string(cfg.check.samples) + " random pre-impact states"));
  out.push_back(make("saltation_vs_finite_difference", saltation_fd_error(p), 1e-6,
                     "flow-through-impact Jacobian"));
  const double slope = remainder_slope(p);
  out.push_back(make("remainder_slope", std::abs(slope - 2.0), 0.2,
                     "log-log slope " + std::to_string(slope) + ", expected 2"));
  out.push_back(make("riccati_equivalence", riccati_gain_error(), 1e-6, "double integrator, N=100"));
  out.push_back(make("gradient_check", gradient_check_error(p, true), 1e-4, "one-impact trajectory"));
  const double no_salt = gradient_check_error(p, false);
  out.push_back({"gradient_check_without_saltation_fails", no_salt, 1e-4, no_salt > 1e-4,
                 "relative error must exceed the tolerance"});

  // Drop from 4 m with no input.
  const HybridSystem ball = systems::bouncing_ball(p);
  const double h = 4.0;
  const HybridTrajectory drop =
      rollout(ball, Vector{{h, -0.0}}, kFalling, std::vector<Vector>(3000, Vector::Zero(1)), 0.001);
  double speed_err = INFINITY;
  double ratio_err = 0.0;
  double residual = 0.0;
  double energy_gain = -INFINITY;
  auto energy = [&](const Vector& x) { return p.mass * p.gravity * x[0] + 0.5 * p.mass * x[1] * x[1]; };
  bool first = true;
  for (const TrajectoryEvent& ev : drop.events) {
    const EventRecord& r = ev.record;
    residual = std::max(residual, std::abs(ball.guard(r.transition_index, r.event_time, r.x_pre)));
    if (r.transition == kImpact) {
      if (first) {
        speed_err = std::abs(std::abs(r.x_pre[1]) - std::sqrt(2.0 * p.gravity * h)) / std::sqrt(2.0 * p.gravity * h);
        first = false;
      }
      ratio_err = std::max(ratio_err, std::abs(r.x_post[1] / r.x_pre[1] + p.restitution));
      energy_gain = std::max(energy_gain, energy(r.x_post) - energy(r.x_pre));
    }
  }
  double drift = 0.0;
  for (std::size_t k = 0; k + 1 < drop.states.size(); ++k) {
    if (drop.event_at(k)) continue;
    drift = std::max(drift, std::abs(energy(drop.states[k + 1]) - energy(drop.states[k])) /
                                std::max(energy(drop.states[k]), 1e-12) / drop.dt);
  }
  out.push_back(make("impact_speed", speed_err, 1e-8, "4 m drop, sqrt(2 g h)"));
  out.push_back(make("restitution_ratio", ratio_err, 1e-9, "zdot+ / zdot- = -e"));
  out.push_back(make("guard_residual", residual, 1e-10, std::to_string(drop.events.size()) + " events"));
  out.push_back({"energy_nonincreasing_at_impacts", energy_gain, 0.0, energy_gain <= 0.0, "max E+ - E-"});
  out.push_back(make("energy_drift_per_second", drift, 1e-8, "relative drift inside modes"));
  return out;
}

}  // namespace hilqr::app
