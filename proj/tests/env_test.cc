// Copyright 2026 The cerl Authors
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

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "cerl/loco_env.h"
#include "cerl/manip_env.h"
#include "cerl/oracle.h"
#include "cerl/reach_env.h"
#include "cerl/vec_env.h"

namespace cerl {
namespace {

constexpr double kPi = std::numbers::pi;
// Offsets into the locomotion observation.
constexpr int kFootPosBase = 5;
constexpr int kGoalCurBase = 25;
constexpr int kLocoSRemaining = 49;

LocoEnvConfig StillConfig() {
  LocoEnvConfig c;
  c.jitter_pos = 0.0;
  c.jitter_theta = 0.0;
  GaitParams p;
  p.stride_len = {0.0, 0.0};
  p.duration = 0.35;
  c.fixed_params = p;
  return c;
}

TEST(LocoEnvTest, SameSeedSameObservations) {
  LocoEnv a(LocoEnvConfig{}, 7), b(LocoEnvConfig{}, 7);
  EXPECT_EQ(a.Reset(3), b.Reset(3));
  RandomController ra(5), rb(5);
  for (int t = 0; t < 50; ++t) {
    const auto sa = a.Step(ra.Act(a, {}));
    const auto sb = b.Step(rb.Act(b, {}));
    ASSERT_EQ(sa.obs, sb.obs);
    ASSERT_EQ(sa.reward, sb.reward);
  }
}

TEST(LocoEnvTest, ResetKeepsGaitParamsAndRestartsPlan) {
  LocoEnv env(LocoEnvConfig{}, 11);
  const GaitParams before = env.params();
  env.Reset(1);
  for (int t = 0; t < 40; ++t) env.Step(LocoOracleAction(env));
  ASSERT_GT(env.state().tracker.cursor(), 0u);
  env.Reset(2);
  EXPECT_EQ(env.params().stride_len, before.stride_len);
  EXPECT_EQ(env.params().heading, before.heading);
  EXPECT_EQ(env.state().tracker.cursor(), 0u);
  EXPECT_EQ(env.state().step, 0);
}

TEST(LocoEnvTest, ZeroJitterObservationMatchesNominalLayout) {
  LocoEnv env(StillConfig(), 1);
  const auto obs = env.Reset(4);
  ASSERT_EQ(obs.size(), static_cast<std::size_t>(LocoEnv::kObsSize));
  for (int f = 0; f < kNumFeet; ++f) {
    const Vec2 nominal = NominalFoot(env.params(), env.config().layout, f);
    EXPECT_NEAR(obs[kFootPosBase + 2 * f], nominal.x(), 1e-12) << f;
    EXPECT_NEAR(obs[kFootPosBase + 2 * f + 1], nominal.y(), 1e-12) << f;
  }
  EXPECT_DOUBLE_EQ(obs[kLocoSRemaining], 0.35);
}

TEST(LocoEnvTest, ZeroActionIsFixedPoint) {
  LocoEnv env(StillConfig(), 1);
  env.Reset(4);
  const LocoState s0 = env.state();
  const std::vector<double> zero(LocoEnv::kActSize, 0.0);
  const StepResult r = env.Step(zero);
  const LocoState& s1 = env.state();
  EXPECT_EQ(s1.base.x, s0.base.x);
  EXPECT_EQ(s1.base.y, s0.base.y);
  for (int f = 0; f < kNumFeet; ++f) {
    EXPECT_EQ(s1.feet[f].position, s0.feet[f].position);
    EXPECT_EQ(s1.feet[f].attached, s0.feet[f].attached);
  }
  EXPECT_NEAR(s1.tracker.s_remaining(), s0.tracker.s_remaining() - 0.02, 1e-12);
  EXPECT_DOUBLE_EQ(r.info.breakdown.reach + r.info.breakdown.hold +
                       r.info.breakdown.detach,
                   r.info.breakdown.Total());
  EXPECT_GT(r.info.breakdown.hold, 0.0);
}

TEST(LocoEnvTest, AllFeetAttachedBaseTwist) {
  LocoEnv env(StillConfig(), 1);
  env.Reset(4);
  LocoState s = env.state();
  for (int f = 0; f < kNumFeet; ++f) {
    s.feet[f].position = s.base.Apply(NominalFoot(env.params(), env.config().layout, f));
    s.feet[f].anchor = s.feet[f].position;
    s.feet[f].attached = true;
  }
  env.set_state(s);
  const std::vector<double> before = env.Observation();
  std::vector<double> a(LocoEnv::kActSize, 0.0);
  a[0] = 0.1 / env.config().max_base_speed;
  const StepResult r = env.Step(a);
  EXPECT_NEAR(env.state().base.x, s.base.x + 0.002, 1e-15);
  EXPECT_NEAR(env.state().base.y, s.base.y, 1e-15);
  for (int f = 0; f < kNumFeet; ++f) {
    EXPECT_EQ(env.state().feet[f].position, s.feet[f].anchor);
    EXPECT_NEAR(r.obs[kFootPosBase + 2 * f], before[kFootPosBase + 2 * f] - 0.002,
                1e-12);
    EXPECT_NEAR(r.obs[kFootPosBase + 2 * f + 1], before[kFootPosBase + 2 * f + 1],
                1e-12);
  }
}

TEST(LocoEnvTest, GoalExpressedInBaseFrame) {
  LocoEnv env(StillConfig(), 1);
  env.Reset(4);
  LocoState s = env.state();
  std::vector<std::vector<ContactGoal>> goals(kNumFeet);
  for (int f = 0; f < kNumFeet; ++f) {
    goals[f] = {{Vec2(0.3, 0.0), 1, 0.35}, {Vec2(0.3, 0.0), 1, 0.35}};
  }
  s.tracker = GoalTracker(std::make_shared<const ContactPlan>(
      std::vector<std::string>{"LF", "RF", "LH", "RH"}, goals));
  s.base = {0.0, 0.0, 0.0};
  env.set_state(s);
  auto obs = env.Observation();
  EXPECT_NEAR(obs[kGoalCurBase], 0.3, 1e-15);
  EXPECT_NEAR(obs[kGoalCurBase + 1], 0.0, 1e-15);
  s.base.theta = kPi / 2.0;
  env.set_state(s);
  obs = env.Observation();
  EXPECT_NEAR(obs[kGoalCurBase], 0.0, 1e-15);
  EXPECT_NEAR(obs[kGoalCurBase + 1], -0.3, 1e-15);
}

TEST(LocoEnvTest, RejectsNonFiniteAction) {
  LocoEnv env(LocoEnvConfig{}, 1);
  std::vector<double> a(LocoEnv::kActSize, 0.0);
  a[3] = std::nan("");
  EXPECT_THROW(env.Step(a), EnvError);
  EXPECT_THROW(env.Step(std::vector<double>(3, 0.0)), EnvError);
}

TEST(LocoEnvTest, LayoutHashDiffersAcrossEnvs) {
  LocoEnv loco(LocoEnvConfig{}, 1);
  ManipEnv manip(ManipEnvConfig{}, 1);
  EXPECT_NE(loco.layout_hash(), manip.layout_hash());
  EXPECT_EQ(LayoutSize(LocoEnv::Layout()), LocoEnv::kObsSize);
  EXPECT_EQ(LayoutSize(ManipEnv::Layout()), ManipEnv::kObsSize);
}

ManipEnv GraspedBox() {
  ManipEnvConfig c;
  c.tasks = {ManipTask::kRepose};
  ManipEnv env(c, 3);
  ManipState s = env.state();
  s.object = {0.0, 0.0, 0.0};
  for (int h = 0; h < 2; ++h) {
    s.hands[h].contact = s.plan->contacts[1][h];
    s.hands[h].position = SurfacePoint(c.object, s.object, s.hands[h].contact);
    s.hands[h].attached = true;
  }
  env.set_state(s);
  return env;
}

TEST(ManipEnvTest, EqualHandVelocitiesTranslateObject) {
  ManipEnv env = GraspedBox();
  std::vector<double> a = {0.1, 0.0, 0.1, 0.0, 0.0, 0.0};
  for (double& x : a) x /= env.config().max_hand_speed;
  env.Step(a);
  const ManipState& s = env.state();
  EXPECT_NEAR(s.object.x, 0.002, 1e-15);
  EXPECT_NEAR(s.object.y, 0.0, 1e-15);
  EXPECT_NEAR(s.object.theta, 0.0, 1e-15);
  EXPECT_NEAR(s.object_twist.vx, 0.1, 1e-12);
  EXPECT_TRUE(s.hands[0].attached);
  EXPECT_TRUE(s.hands[1].attached);
}

TEST(ManipEnvTest, OneHandCannotMoveObject) {
  ManipEnv env = GraspedBox();
  ManipState s = env.state();
  s.hands[1].attached = false;
  env.set_state(s);
  env.Step(std::vector<double>{1.0, 1.0, 0.0, 0.0, 0.0, 0.0});
  EXPECT_EQ(env.state().object.x, 0.0);
  EXPECT_EQ(env.state().object.y, 0.0);
}

TEST(ManipEnvTest, RelativeGoalZeroAtGoalPose) {
  ManipEnv env = GraspedBox();
  ManipState s = env.state();
  s.object = env.CurrentPoseGoal();
  env.set_state(s);
  const auto obs = env.Observation();
  // goal_pose_rel_object occupies entries 31..33.
  EXPECT_NEAR(obs[31], 0.0, 1e-12);
  EXPECT_NEAR(obs[32], 0.0, 1e-12);
  EXPECT_NEAR(obs[33], 0.0, 1e-12);
  EXPECT_EQ(obs[36], 1.0);
}

TEST(ManipEnvTest, FreeSlotHasNoPoseGoal) {
  ManipEnvConfig c;
  c.tasks = {ManipTask::kRepose};
  c.n_targets = 1;
  ManipEnv env(c, 4);
  const std::vector<double> zero(ManipEnv::kActSize, 0.0);
  ASSERT_EQ(env.state().plan->plan.goal(0, 0).indicator, 0);
  ASSERT_EQ(env.state().plan->plan.goal(1, 0).indicator, 0);
  bool advanced = false;
  for (int t = 0; t < 100 && !advanced; ++t) {
    const StepResult r = env.Step(zero);
    if (env.state().tracker.cursor() == 0) EXPECT_EQ(r.info.breakdown.pose, 0.0);
    advanced = r.info.advanced;
  }
  // The object never moved, yet the free slot still completes.
  EXPECT_TRUE(advanced);
  EXPECT_EQ(env.state().tracker.cursor(), 1u);
  EXPECT_GT(env.Step(zero).info.breakdown.pose, 0.0);
}

// Hands grasping an object already at the final goal, run to plan completion.
StepResult RunToCompletion(bool end_on_plan_exhausted, int* steps) {
  ManipEnvConfig c;
  c.tasks = {ManipTask::kRepose};
  c.n_targets = 1;
  c.end_on_plan_exhausted = end_on_plan_exhausted;
  ManipEnv env(c, 5);
  ManipState s = env.state();
  s.object = s.plan->pose_goals.back();
  for (int h = 0; h < 2; ++h) {
    s.hands[h].contact = s.plan->contacts[1][h];
    s.hands[h].position = SurfacePoint(c.object, s.object, s.hands[h].contact);
    s.hands[h].attached = true;
  }
  env.set_state(s);
  std::vector<double> hold = {0.0, 0.0, 0.0, 0.0, 1.0, 1.0};
  StepResult r;
  for (*steps = 1; *steps <= c.episode_steps; ++*steps) {
    r = env.Step(hold);
    if (r.info.plan_exhausted) break;
  }
  return r;
}

TEST(ManipEnvTest, EpisodeContinuesAfterPlanCompletes) {
  int steps = 0;
  const StepResult keep = RunToCompletion(false, &steps);
  ASSERT_TRUE(keep.info.plan_exhausted);
  EXPECT_TRUE(keep.info.bonus_fired);
  EXPECT_FALSE(keep.done);
  EXPECT_LT(steps, ManipEnvConfig{}.episode_steps);
  const StepResult end = RunToCompletion(true, &steps);
  EXPECT_TRUE(end.done);
}

TEST(ManipEnvTest, FitRigidRecoversTransform) {
  const Vec2 b0(0.0, 0.08), b1(0.0, -0.08);
  const Pose2 truth{0.05, -0.02, 0.7};
  const Pose2 fit = FitRigid(b0, b1, truth.Apply(b0), truth.Apply(b1), 0.0);
  EXPECT_NEAR(fit.x, truth.x, 1e-12);
  EXPECT_NEAR(fit.y, truth.y, 1e-12);
  EXPECT_NEAR(fit.theta, truth.theta, 1e-12);
}

TEST(ReachEnvTest, RewardIsReachPlusActionRate) {
  ReachEnv env(ReachEnvConfig{}, 2);
  env.Reset(5);
  const std::vector<double> a = {0.5, -0.25};
  const StepResult r = env.Step(a);
  const double d = (env.target() - env.position()).norm();
  const double rate = -0.01 * (0.25 + 0.0625);
  EXPECT_NEAR(r.reward, std::exp(-d / 0.25) + rate, 1e-12);
  EXPECT_EQ(r.info.breakdown.hold, 0.0);
  EXPECT_EQ(r.info.breakdown.detach, 0.0);
}

TEST(ReachEnvTest, EpisodeLength) {
  ReachEnv env(ReachEnvConfig{}, 2);
  env.Reset(1);
  int steps = 0;
  bool done = false;
  while (!done) {
    done = env.Step(std::vector<double>{0.0, 0.0}).done;
    ++steps;
  }
  EXPECT_EQ(steps, 50);
}

std::vector<std::unique_ptr<Env>> LocoBatch(int n, std::uint64_t seed0) {
  std::vector<std::unique_ptr<Env>> envs;
  for (int i = 0; i < n; ++i) {
    LocoEnvConfig c;
    c.gaits = {kAllGaits.begin(), kAllGaits.end()};
    envs.push_back(std::make_unique<LocoEnv>(c, seed0 + i));
  }
  return envs;
}

std::vector<std::vector<double>> RandomActions(int n, int size, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<double>> a(n, std::vector<double>(size));
  for (auto& v : a) {
    for (double& x : v) x = rng.Uniform(-1.0, 1.0);
  }
  return a;
}

void ExpectSameStep(const StepResult& a, const BatchResult& b, std::size_t i) {
  EXPECT_EQ(a.obs, b.obs[i]);
  EXPECT_EQ(a.reward, b.reward[i]);
  EXPECT_EQ(a.done, b.done[i] != 0);
  EXPECT_EQ(a.info.act_bits, b.info[i].act_bits);
}

TEST(BatchStepTest, SingleEnvEqualsStep) {
  auto batch = LocoBatch(1, 40);
  auto solo = batch[0]->Clone();
  const auto actions = RandomActions(1, LocoEnv::kActSize, 1);
  const BatchResult r = BatchStep(batch, actions);
  ExpectSameStep(solo->Step(actions[0]), r, 0);
}

TEST(BatchStepTest, SixtyFourEnvsMatchSequentialAndThreads) {
  auto batch = LocoBatch(64, 100);
  auto threaded = LocoBatch(64, 100);
  std::vector<std::unique_ptr<Env>> seq;
  for (const auto& e : batch) seq.push_back(e->Clone());
  for (int t = 0; t < 10; ++t) {
    const auto actions = RandomActions(64, LocoEnv::kActSize, 10 + t);
    const BatchResult r = BatchStep(batch, actions, 1);
    const BatchResult rt = BatchStep(threaded, actions, 4);
    for (std::size_t i = 0; i < 64; ++i) {
      ExpectSameStep(seq[i]->Step(actions[i]), r, i);
      EXPECT_EQ(rt.obs[i], r.obs[i]);
      EXPECT_EQ(rt.reward[i], r.reward[i]);
    }
  }
}

TEST(BatchStepTest, PermutationInvariant) {
  auto batch = LocoBatch(16, 7);
  std::vector<int> perm(16);
  for (int i = 0; i < 16; ++i) perm[i] = (i * 5 + 3) % 16;
  std::vector<std::unique_ptr<Env>> permuted(16);
  for (int i = 0; i < 16; ++i) permuted[i] = batch[perm[i]]->Clone();
  const auto actions = RandomActions(16, LocoEnv::kActSize, 2);
  std::vector<std::vector<double>> pa(16);
  for (int i = 0; i < 16; ++i) pa[i] = actions[perm[i]];
  const BatchResult r = BatchStep(batch, actions);
  const BatchResult rp = BatchStep(permuted, pa);
  for (int i = 0; i < 16; ++i) {
    EXPECT_EQ(rp.obs[i], r.obs[perm[i]]);
    EXPECT_EQ(rp.reward[i], r.reward[perm[i]]);
  }
}

TEST(BatchStepTest, RaggedInputRejected) {
  auto batch = LocoBatch(2, 1);
  const auto actions = RandomActions(3, LocoEnv::kActSize, 1);
  EXPECT_THROW(BatchStep(batch, actions), std::invalid_argument);
}

TEST(VecEnvTest, AutoResetAndDeterminism) {
  auto make = [] {
    std::vector<std::unique_ptr<Env>> envs;
    for (int i = 0; i < 4; ++i) {
      envs.push_back(std::make_unique<ReachEnv>(ReachEnvConfig{}, i));
    }
    return VecEnv(std::move(envs), 9);
  };
  VecEnv a = make(), b = make();
  EXPECT_EQ(a.Reset(), b.Reset());
  int dones = 0;
  for (int t = 0; t < 120; ++t) {
    const auto actions = RandomActions(4, 2, t);
    const BatchResult& ra = a.Step(actions);
    const BatchResult& rb = b.Step(actions);
    ASSERT_EQ(ra.obs, rb.obs);
    ASSERT_EQ(ra.reward, rb.reward);
    for (auto d : ra.done) dones += d;
  }
  // Episodes of 50 steps: two boundaries per env in 120 steps.
  EXPECT_EQ(dones, 8);
}

}  // namespace
}  // namespace cerl
