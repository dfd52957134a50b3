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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "problems.hpp"

namespace hilqr {
namespace {

using systems::BouncingBallParams;
using systems::bouncing_ball;
using systems::kApex;
using systems::kFalling;
using systems::kImpact;
using systems::kRising;

TEST(BouncingBall, Structure) {
  const HybridSystem ball = bouncing_ball();
  EXPECT_EQ(ball.mode_count(), 2u);
  EXPECT_EQ(ball.transition_count(), 2u);
  EXPECT_EQ(ball.state_dim(), 2u);
  EXPECT_EQ(ball.input_dim(), 1u);
  EXPECT_EQ(ball.transition(kImpact).id, kImpact);
  EXPECT_EQ(ball.transition(kApex).id, kApex);
  EXPECT_EQ(ball.classify(0.0, Vector{{1.0, -0.1}}), kFalling);
  EXPECT_EQ(ball.classify(0.0, Vector{{1.0, 0.0}}), kRising);
  EXPECT_EQ(ball.classify(0.0, Vector{{1.0, 0.1}}), kRising);
}

TEST(BouncingBall, ModesShareTheVectorField) {
  const HybridSystem ball = bouncing_ball({1.7, 9.81, 0.6});
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> d(-10.0, 10.0);
  for (int i = 0; i < 100; ++i) {
    const Vector x{{d(rng), d(rng)}};
    const Vector u{{d(rng)}};
    EXPECT_EQ(ball.field(kFalling, 0.0, x, u), ball.field(kRising, 0.0, x, u));
  }
}

TEST(BouncingBall, ResetPreservesHeightAndScalesVelocity) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> d(-10.0, 0.0);
  std::uniform_real_distribution<double> e(0.1, 1.0);
  for (int i = 0; i < 100; ++i) {
    const double rest = e(rng);
    const HybridSystem ball = bouncing_ball({1.0, 9.81, rest});
    const Vector x{{d(rng) * 1e-3, d(rng)}};
    const Vector y = apply_reset(ball, kImpact, 0.0, x);
    EXPECT_EQ(y[0], x[0]);
    EXPECT_EQ(y[1], -rest * x[1]);
    EXPECT_EQ(apply_reset(ball, kApex, 0.0, x), x);
  }
}

TEST(BouncingBall, ParameterValidation) {
  EXPECT_THROW(bouncing_ball({0.0, 9.81, 0.8}), InvalidArgument);
  EXPECT_THROW(bouncing_ball({1.0, -1.0, 0.8}), InvalidArgument);
  EXPECT_THROW(bouncing_ball({1.0, 9.81, 0.0}), InvalidArgument);
  EXPECT_THROW(bouncing_ball({1.0, 9.81, 1.2}), InvalidArgument);
  EXPECT_THROW(bouncing_ball({NAN, 9.81, 0.8}), InvalidArgument);
  EXPECT_NO_THROW(bouncing_ball({1.0, 9.81, 1.0}));
}

TEST(SaltationOracle, Examples) {
  const Matrix a = systems::ball_saltation_oracle({}, Vector{{0.0, -1.0}}, Vector{{0.0}});
  EXPECT_LE((a - Matrix{{-0.8, 0.0}, {17.658, -0.8}}).cwiseAbs().maxCoeff(), 1e-12);
  const BouncingBallParams elastic{2.0, 9.81, 1.0};
  const Matrix b = systems::ball_saltation_oracle(elastic, Vector{{0.0, -3.0}}, Vector{{2.0 * 9.81}});
  EXPECT_EQ(b, (Matrix{{-1.0, 0.0}, {0.0, -1.0}}));
  EXPECT_THROW(systems::ball_saltation_oracle({}, Vector{{0.0, 0.0}}, Vector{{0.0}}), TransversalityError);
}

TEST(SaltationOracle, AgreesWithGeneralFormula) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> speed(0.05, 30.0);
  std::uniform_real_distribution<double> force(-50.0, 50.0);
  std::uniform_real_distribution<double> rest(0.2, 1.0);
  for (int i = 0; i < 100; ++i) {
    const BouncingBallParams p{0.5 + 0.1 * i, 9.81, rest(rng)};
    const HybridSystem ball = bouncing_ball(p);
    const Vector x{{0.0, -speed(rng)}};
    const Vector u{{force(rng)}};
    const Matrix general = saltation_matrix(ball, kImpact, 0.0, x, u).matrix;
    EXPECT_LE(oracle::rel_err(general, systems::ball_saltation_oracle(p, x, u)), 1e-8);
    EXPECT_LE(oracle::rel_err(general, oracle::ball_saltation(x[1], u[0], p.mass, p.gravity, p.restitution)), 1e-8);
  }
}

TEST(DoubleIntegrator, ExactTransitionMatrices) {
  const HybridSystem di = systems::double_integrator(2.0);
  EXPECT_EQ(di.mode_count(), 1u);
  EXPECT_EQ(di.transition_count(), 0u);
  const FlowJacobians j = linearize_flow_step(di, ModeId{0}, 0.0, Vector{{1.0, 2.0}}, Vector{{3.0}}, 0.05);
  EXPECT_LE((j.f_x - systems::double_integrator_A(0.05)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((j.f_u - systems::double_integrator_B(2.0, 0.05)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW(systems::double_integrator(0.0), InvalidArgument);
}

TEST(DoubleIntegrator, NeverHasEvents) {
  const HybridSystem di = systems::double_integrator();
  std::mt19937_64 rng(12);
  std::normal_distribution<double> n(0.0, 20.0);
  std::vector<Vector> inputs;
  for (int k = 0; k < 500; ++k) inputs.push_back(Vector{{n(rng)}});
  const HybridTrajectory traj = rollout(di, Vector{{0.0, -1.0}}, ModeId{0}, inputs, 0.01);
  EXPECT_TRUE(traj.events.empty());
  for (const ModeId m : traj.modes) EXPECT_EQ(m, ModeId{0});
}

TEST(SingleBounceReference, DefaultProblem) {
  const auto ref = fixture::ball_reference();
  const HybridTrajectory& traj = ref->trajectory;
  EXPECT_EQ(traj.states.size(), 1001u);
  EXPECT_EQ(systems::count_events(traj, kImpact), 1u);
  EXPECT_LE(std::abs(traj.states.back()[0] - 2.5), 1e-3);
  EXPECT_LE(std::abs(traj.states.back()[1]), 1e-3);
  EXPECT_EQ(ref->extensions.size(), traj.events.size());
}

TEST(SingleBounceReference, GuessHasOneBounceEndingAtApex) {
  const BouncingBallParams p;
  const double u = systems::single_bounce_guess(p, Vector{{4.0, 0.0}}, 1.0);
  EXPECT_LT(u, 0.0);
  const HybridSystem ball = bouncing_ball(p);
  const HybridTrajectory traj =
      rollout(ball, Vector{{4.0, 0.0}}, kFalling, std::vector<Vector>(1000, Vector{{u}}), 0.001);
  EXPECT_EQ(systems::count_events(traj, kImpact), 1u);
  EXPECT_LE(std::abs(traj.states.back()[1]), 1e-6);
  EXPECT_EQ(systems::single_bounce_guess(p, Vector{{-1.0, 0.0}}, 1.0), 0.0);
}

TEST(SingleBounceReference, ZeroInputDropTime) {
  const HybridSystem ball = bouncing_ball();
  const HybridTrajectory traj =
      rollout(ball, Vector{{4.0, 0.0}}, kFalling, std::vector<Vector>(1000, Vector::Zero(1)), 0.001);
  ASSERT_EQ(traj.events.size(), 1u);
  EXPECT_NEAR(traj.events[0].record.event_time, std::sqrt(8.0 / 9.81), 1e-10);
}

TEST(SingleBounceReference, FailuresAreReported) {
  EXPECT_THROW(systems::make_single_bounce_reference({}, Vector{{4.0, 0.0}}, Vector{{2.5, 0.0}}, 0.2, 0.001),
               SolverError);
  EXPECT_THROW(systems::make_single_bounce_reference({}, Vector{{4.0, 0.0}}, Vector{{2.5, 0.0}}, 1.0, 0.0003),
               InvalidArgument);
  EXPECT_THROW(systems::knot_count(1.0, 0.0), InvalidArgument);
  EXPECT_EQ(systems::knot_count(1.0, 0.001), 1000u);
}

}  // namespace
}  // namespace hilqr
