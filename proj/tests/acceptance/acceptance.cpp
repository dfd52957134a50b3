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

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Tolerances are fixed here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>

#include "oracles.hpp"
#include "problems.hpp"

namespace {

using namespace hilqr;
using systems::kFalling;
using systems::kImpact;

constexpr double kPerturbation = 0.5;          // +z at t = 0
constexpr double kFinalZTol = 0.05;
constexpr double kFinalZdotTol = 0.1;
constexpr double kPeakRatioMin = 5.0;
constexpr double kSaltationTol = 1e-8;
constexpr double kSlopeTol = 0.2;
constexpr double kRiccatiTol = 1e-6;
constexpr std::size_t kLqMaxIterations = 2;
constexpr double kGradientTol = 1e-4;
constexpr double kImpactSpeedTol = 1e-8;
constexpr double kRestitutionTol = 1e-9;
constexpr double kResidualTol = 1e-10;
constexpr double kRuntimeLimitSeconds = 600.0;

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  std::printf("criterion %d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

bool monotone(const std::vector<double>& costs) {
  for (std::size_t i = 1; i < costs.size(); ++i) {
    if (costs[i] > costs[i - 1]) return false;
  }
  return true;
}

struct AblationRuns {
  MpcLog update;
  MpcLog no_update;
  std::size_t impact_knot = 0;
  std::size_t horizon = 0;
  double seconds = 0.0;
};

AblationRuns run_ablation() {
  const auto start = std::chrono::steady_clock::now();
  AblationRuns runs;
  MpcConfig on;
  MpcConfig off;
  off.cost_update = false;
  const TrackingProblem problem = fixture::ball_tracking_problem(on);
  const Vector dz{{kPerturbation, 0.0}};
  runs.update = run_mpc(problem, *problem.model, on, dz);
  runs.no_update = run_mpc(problem, *problem.model, off, dz);
  runs.impact_knot = fixture::impact_knot(problem.reference->trajectory);
  runs.horizon = on.horizon;
  runs.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return runs;
}

void criteria_1_and_2(const AblationRuns& r) {
  const std::size_t fail_on = r.update.summary.n_nonconverged;
  const std::size_t fail_off = r.no_update.summary.n_nonconverged;
  report(1, fail_on == 0 && fail_off >= 1 && r.seconds < kRuntimeLimitSeconds,
         "non-converged with update " + std::to_string(fail_on) + ", without " + std::to_string(fail_off) +
             " of " + std::to_string(r.update.summary.n_steps) + " solves" + fmt(", %.1f s", r.seconds));

  const Vector& xf = r.update.summary.final_state;
  const std::size_t lo = r.impact_knot > r.horizon ? r.impact_knot - r.horizon : 0;
  const std::size_t hi = r.impact_knot + r.horizon;
  const double peak_on = peak_input_between(r.update, lo, hi);
  const double peak_off = peak_input_between(r.no_update, lo, hi);
  const double ratio = peak_off / peak_on;
  report(2,
         std::abs(xf[0] - 2.5) <= kFinalZTol && std::abs(xf[1]) <= kFinalZdotTol && ratio >= kPeakRatioMin,
         fmt("final state [%.5f, %.5f]; near-impact peak input %.3g vs %.3g", xf[0], xf[1], peak_on, peak_off) +
             fmt(" (ratio %.2f)", ratio));
}

void criterion_3() {
  const systems::BouncingBallParams p;
  const HybridSystem ball = systems::bouncing_ball(p);
  std::mt19937_64 rng(20260101);
  std::uniform_real_distribution<double> speed(0.1, 20.0);
  std::uniform_real_distribution<double> force(-30.0, 30.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double zd = -speed(rng);
    const double u = force(rng);
    const Matrix xi = saltation_matrix(ball, kImpact, 0.0, Vector{{0.0, zd}}, Vector{{u}}).matrix;
    worst = std::max(worst, oracle::rel_err(xi, oracle::ball_saltation(zd, u, p.mass, p.gravity, p.restitution)));
  }

  // Remainder of the linearized flow through an impact, against the
  // closed-form step map.
  const Vector x{{0.05, -2.0}};
  const double u = 1.5;
  const double T = 0.05;
  const HybridTrajectory traj = rollout(ball, x, kFalling, {Vector{{u}}}, T);
  const Matrix J = linearize_stage(ball, traj, 0).A();
  const Vector base = oracle::ball_step_through_impact(x, u, p.mass, p.gravity, p.restitution, T);
  const Vector dir{{0.6, -0.8}};
  std::vector<double> mags{1e-3, 1e-4, 1e-5};
  std::vector<double> rem;
  for (double d : mags) {
    const Vector delta = d * dir;
    rem.push_back(
        (oracle::ball_step_through_impact(x + delta, u, p.mass, p.gravity, p.restitution, T) - base - J * delta)
            .norm());
  }
  const double slope = oracle::loglog_slope(mags, rem);
  report(3, worst <= kSaltationTol && std::abs(slope - 2.0) <= kSlopeTol && traj.events.size() == 1,
         fmt("max relative saltation error %.2e over 100 states; remainder slope %.4f", worst, slope));
}

void criterion_4() {
  const fixture::LqProblem lq = fixture::double_integrator_lq(100);
  const std::vector<Vector> zero(lq.N, Vector::Zero(1));
  const HybridTrajectory start = rollout(lq.system, lq.x0, ModeId{0}, zero, lq.dt);
  const GainSchedule g = backward_pass(lq.system, lq.cost, start, 0.0);
  const oracle::RiccatiSolution ric = oracle::riccati(lq.A, lq.B, lq.Q, lq.R, lq.QN, lq.N);
  double worst = 0.0;
  for (std::size_t k = 0; k < lq.N; ++k) worst = std::max(worst, oracle::rel_err(g.K[k], ric.K[k]));
  const SolveResult r = solve(lq.system, lq.cost, lq.x0, ModeId{0}, zero, lq.dt);
  report(4, worst <= kRiccatiTol && r.report.converged && r.report.iterations <= kLqMaxIterations,
         fmt("max relative gain error %.2e; solve converged in %.0f iterations", worst,
             static_cast<double>(r.report.iterations)));
}

// Directional derivative of the rollout cost along u_ff by central
// differences, against the linear term of the expected reduction.
double gradient_error(bool saltation, std::size_t* impacts) {
  const HybridSystem ball = systems::bouncing_ball();
  const double dt = 0.001;
  const std::size_t N = 300;
  std::vector<Vector> inputs;
  for (std::size_t k = 0; k < N; ++k) inputs.push_back(Vector{{2.0 * std::sin(0.02 * static_cast<double>(k))}});
  const Vector x0{{0.5, -1.0}};
  auto ref = std::make_shared<TrackedReference>();
  ref->trajectory = rollout(ball, Vector{{0.6, -0.5}}, kFalling, std::vector<Vector>(N, Vector::Zero(1)), dt);
  const CostModel cost = uniform_cost(ref, Vector{{1.0, 0.1}}.asDiagonal() * dt, Matrix::Constant(1, 1, 0.01 * dt),
                                      Vector{{5.0, 1.0}}.asDiagonal(), false);
  const HybridTrajectory traj = rollout(ball, x0, kFalling, inputs, dt);
  *impacts = systems::count_events(traj, kImpact);
  BackwardPassOptions bp;
  bp.zero_feedback = true;
  bp.linearization.saltation = saltation;
  const GainSchedule g = backward_pass(ball, cost, traj, 0.0, bp);
  auto along = [&](double eps) {
    std::vector<Vector> u = inputs;
    for (std::size_t k = 0; k < N; ++k) u[k] += eps * g.u_ff[k];
    return trajectory_cost(cost, rollout(ball, x0, kFalling, u, dt));
  };
  double scale = 1.0;
  for (const Vector& v : g.u_ff) scale = std::max(scale, v.cwiseAbs().maxCoeff());
  const double eps = 1e-4 / scale;
  const double fd = (along(eps) - along(-eps)) / (2.0 * eps);
  return std::abs(fd - g.dJ_linear) / std::abs(fd);
}

void criterion_5() {
  std::size_t impacts = 0;
  const double with = gradient_error(true, &impacts);
  std::size_t impacts_ablation = 0;
  const double without = gradient_error(false, &impacts_ablation);
  report(5, impacts == 1 && with <= kGradientTol && without > kGradientTol,
         fmt("relative error %.2e with saltation, %.2e without (must exceed %.0e)", with, without, kGradientTol));
}

void criterion_6() {
  const systems::BouncingBallParams p;
  const HybridSystem ball = systems::bouncing_ball(p);
  const double h = 4.0;
  const HybridTrajectory drop =
      rollout(ball, Vector{{h, 0.0}}, kFalling, std::vector<Vector>(4000, Vector::Zero(1)), 0.001);
  auto energy = [&](const Vector& x) { return p.mass * p.gravity * x[0] + 0.5 * p.mass * x[1] * x[1]; };
  const double v = std::sqrt(2.0 * p.gravity * h);
  double speed_err = INFINITY;
  double ratio_err = 0.0;
  double residual = 0.0;
  bool energy_ok = true;
  std::size_t impacts = 0;
  for (const TrajectoryEvent& ev : drop.events) {
    const EventRecord& r = ev.record;
    residual = std::max(residual, std::abs(ball.guard(r.transition_index, r.event_time, r.x_pre)));
    if (r.transition != kImpact) continue;
    if (impacts++ == 0) speed_err = std::abs(-r.x_pre[1] - v) / v;
    ratio_err = std::max(ratio_err, std::abs(r.x_post[1] / r.x_pre[1] + p.restitution));
    energy_ok = energy_ok && energy(r.x_post) <= energy(r.x_pre);
  }
  double e_prev = energy(drop.states[0]);
  for (std::size_t k = 0; k < drop.horizon(); ++k) {
    const double e = energy(drop.states[k + 1]);
    energy_ok = energy_ok && e <= e_prev + 1e-8 * drop.dt * std::max(1.0, e_prev);
    e_prev = e;
  }
  report(6,
         impacts >= 3 && speed_err <= kImpactSpeedTol && ratio_err <= kRestitutionTol && residual <= kResidualTol &&
             energy_ok,
         fmt("impact speed error %.2e, restitution error %.2e, max guard residual %.2e", speed_err, ratio_err,
             residual) +
             ", energy non-increasing: " + (energy_ok ? "yes" : "no") + " over " + std::to_string(impacts) +
             " impacts");
}

void criterion_7(const AblationRuns& runs) {
  const MpcConfig cfg;
  const TrackingProblem problem = fixture::ball_tracking_problem(cfg);
  const HybridSystem& ball = *problem.model;
  const HybridTrajectory& ref = problem.reference->trajectory;
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::size_t> knot(0, ref.horizon() - cfg.horizon);
  std::uniform_real_distribution<double> dz(-0.3, 0.3);
  std::uniform_real_distribution<double> dv(-1.0, 1.0);
  const std::vector<double> alphas = line_search_schedule(cfg.line_search_width, 0.6);
  int agree = 0;
  int accepted = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t k = knot(rng);
    const Vector x = ref.states[k] + Vector{{dz(rng), dv(rng)}};
    const ModeId mode = *ball.classify(ref.time(k), x);
    const auto window = slice_reference(*problem.reference, k, cfg.horizon);
    const CostModel cost = tracking_cost_model(window, problem.weights, true);
    ClosedLoopOptions cl;
    cl.mismatch = MismatchPolicy::kUseReference;
    const HybridTrajectory nominal =
        closed_loop_rollout(ball, window->trajectory, window->extensions,
                            detail::slice_gains(problem.tracking_gains, k, cfg.horizon), 0.0, x, mode, cl);
    const auto exts = build_extensions(ball, nominal, default_extension_horizon(cfg.horizon));
    const GainSchedule gains = backward_pass(ball, cost, nominal, 1e-9);
    const double c0 = trajectory_cost(cost, nominal);
    ForwardPassOptions par;
    par.closed_loop = cl;
    ForwardPassOptions seq = par;
    seq.parallel = false;
    const ForwardPassResult a = forward_pass(ball, cost, nominal, exts, gains, alphas, c0, par);
    const ForwardPassResult b = forward_pass(ball, cost, nominal, exts, gains, alphas, c0, seq);
    if (a.accepted == b.accepted && a.alpha == b.alpha && a.cost == b.cost) ++agree;
    if (a.accepted) ++accepted;
  }
  std::size_t solves = 0;
  std::size_t monotone_solves = 0;
  for (const MpcLog* log : {&runs.update, &runs.no_update}) {
    for (const MpcLogRow& row : log->rows) {
      ++solves;
      if (monotone(row.cost_history)) ++monotone_solves;
    }
  }
  report(7, agree == 20 && monotone_solves == solves,
         std::to_string(agree) + "/20 perturbed steps select the identical candidate (" + std::to_string(accepted) +
             " accepted a step); " + std::to_string(monotone_solves) + "/" + std::to_string(solves) +
             " solves with non-increasing cost");
}

void criterion_8() {
  ForceWeightConfig cfg;
  cfg.R_min = Matrix::Identity(4, 4);
  cfg.R_max = 4.0 * Matrix::Identity(4, 4);
  cfg.legs = {{0}, {1}, {2}, {3}};
  const double rmin = 1.0;
  const double rmax = 4.0;
  bool exact = true;
  auto expect = [&](const std::vector<double>& lambda, const std::vector<double>& r) {
    const ForceWeightedPenalty p = force_weighted_penalty(lambda, cfg);
    for (std::size_t j = 0; j < r.size(); ++j) exact = exact && p.leg_penalties[j](0, 0) == r[j];
  };
  expect({1, 0, 0, 0}, {rmin, rmax, rmax, rmax});
  const double uniform = rmax - 0.25 * (rmax - rmin);
  expect({1, 1, 1, 1}, {uniform, uniform, uniform, uniform});
  expect({3, 1, 0, 0}, {rmax - 0.75 * (rmax - rmin), rmax - 0.25 * (rmax - rmin), rmax, rmax});
  exact = exact && force_weighted_penalty({3, 1, 0, 0}, cfg).weights == std::vector<double>{0.75, 0.25, 0.0, 0.0};

  std::mt19937_64 rng(88);
  std::uniform_real_distribution<double> force(0.0, 1000.0);
  std::bernoulli_distribution lifted(0.25);
  double worst = 0.0;
  int samples = 0;
  while (samples < 1000) {
    std::vector<double> lambda(4);
    double total = 0.0;
    for (double& l : lambda) total += (l = lifted(rng) ? 0.0 : force(rng));
    if (!(total > 0.0)) continue;
    ++samples;
    double sum = 0.0;
    for (double w : force_weighted_penalty(lambda, cfg).weights) sum += w;
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  report(8, exact && worst <= 1e-12,
         std::string("three examples ") + (exact ? "exact" : "NOT exact") +
             fmt("; max |sum w - 1| = %.1e over 1000 random force vectors", worst));
}

}  // namespace

int main() {
  try {
    const AblationRuns runs = run_ablation();
    criteria_1_and_2(runs);
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7(runs);
    criterion_8();
  } catch (const std::exception& e) {
    std::printf("acceptance aborted: %s\n", e.what());
    return 2;
  }
  std::printf("%s: %d criteria failed\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
  return failures == 0 ? 0 : 1;
}
