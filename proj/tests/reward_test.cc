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

#include "cerl/reward.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "cerl/random.h"

namespace cerl {
namespace {

EffectorSnapshot Snap(double d, int i_cmd, int i_act, double s) {
  EffectorSnapshot e;
  e.p_act = Vec2(0.3, -0.2);
  e.window.current.point = e.p_act + Vec2(d, 0.0);
  e.window.current.indicator = i_cmd;
  e.i_act = i_act;
  e.s_remaining = s;
  return e;
}

TEST(ReachRewardTest, Examples) {
  RewardConfig cfg;
  EXPECT_DOUBLE_EQ(ReachReward(Snap(0.0, 0, 0, 0.1), cfg), 1.0);
  EXPECT_NEAR(ReachReward(Snap(0.1, 0, 0, 0.1), cfg), 0.670320046, 1e-9);
  EXPECT_DOUBLE_EQ(ReachReward(Snap(0.1, 1, 1, 0.1), cfg), 0.0);
  EXPECT_DOUBLE_EQ(ReachReward(Snap(0.0, 0, 0, 0.5), cfg), 0.0);
  EXPECT_DOUBLE_EQ(ReachReward(Snap(0.0, 0, 0, cfg.delta), cfg), 1.0);
}

TEST(ReachRewardTest, SquaredDistanceVariant) {
  RewardConfig cfg;
  cfg.squared_distance = true;
  EXPECT_NEAR(ReachReward(Snap(0.1, 0, 0, 0.1), cfg), std::exp(-0.04), 1e-15);
}

TEST(HoldRewardTest, Examples) {
  RewardConfig cfg;
  EXPECT_DOUBLE_EQ(HoldReward(Snap(0.0, 1, 1, 0.3), cfg), 2.0);
  EXPECT_DOUBLE_EQ(HoldReward(Snap(0.0, 1, 0, 0.3), cfg), 0.0);
  EXPECT_NEAR(HoldReward(Snap(0.1, 1, 1, 0.3), cfg), 1.670320046, 1e-9);
  EXPECT_DOUBLE_EQ(HoldReward(Snap(0.0, 0, 1, 0.3), cfg), 0.0);
}

TEST(DetachRewardTest, Examples) {
  RewardConfig cfg;
  EXPECT_DOUBLE_EQ(DetachReward(Snap(0.0, 0, 0, 0.5), cfg), 1.0);
  EXPECT_DOUBLE_EQ(DetachReward(Snap(0.0, 0, 1, 0.5), cfg), 0.0);
  EXPECT_DOUBLE_EQ(DetachReward(Snap(0.0, 0, 0, 0.1), cfg), 0.0);
  EXPECT_DOUBLE_EQ(DetachReward(Snap(0.0, 0, 0, cfg.delta), cfg), 0.0);
}

TEST(PoseRewardTest, Examples) {
  RewardConfig cfg;
  EXPECT_DOUBLE_EQ(PoseReward(0.0, 0.0, cfg), 15.0);
  EXPECT_DOUBLE_EQ(PoseReward(0.05, 0.1, cfg), 7.5);
  EXPECT_NEAR(PoseReward(1e12, 0.3, cfg), 0.5 / 0.4, 1e-9);
}

TEST(PoseRewardTest, MonotoneDecreasing) {
  RewardConfig cfg;
  Rng rng(4);
  for (int i = 0; i < 1000; ++i) {
    const double dp = rng.Uniform(0.0, 1.0), dt = rng.Uniform(0.0, 3.0);
    const double e = rng.Uniform(1e-6, 0.1);
    EXPECT_GT(PoseReward(dp, dt, cfg), PoseReward(dp + e, dt, cfg));
    EXPECT_GT(PoseReward(dp, dt, cfg), PoseReward(dp, dt + e, cfg));
  }
}

TEST(TotalContactRewardTest, Examples) {
  RewardConfig cfg;
  std::vector<EffectorSnapshot> four(4, Snap(0.0, 1, 1, 0.3));
  EXPECT_DOUBLE_EQ(TotalContactReward(four, std::nullopt, cfg).Total(), 8.0);
  std::vector<EffectorSnapshot> one = {Snap(0.0, 0, 0, 0.5)};
  EXPECT_DOUBLE_EQ(TotalContactReward(one, std::nullopt, cfg).Total(), 1.0);
  std::vector<EffectorSnapshot> mixed = {Snap(0.0, 1, 1, 0.3), Snap(0.0, 0, 0, 0.5)};
  EXPECT_DOUBLE_EQ(TotalContactReward(mixed, std::nullopt, cfg).Total(), 3.0);
  const RewardBreakdown b = TotalContactReward(mixed, PoseErrors{0.05, 0.1}, cfg);
  EXPECT_DOUBLE_EQ(b.pose, 7.5);
  EXPECT_DOUBLE_EQ(b.Total(), 10.5);
}

TEST(TotalContactRewardTest, PerEffectorTermsBounded) {
  RewardConfig cfg;
  Rng rng(9);
  for (int i = 0; i < 5000; ++i) {
    const EffectorSnapshot s =
        Snap(rng.Uniform(0.0, 2.0), static_cast<int>(rng.Index(2)),
             static_cast<int>(rng.Index(2)), rng.Uniform(0.0, 1.0));
    const double r = ReachReward(s, cfg), h = HoldReward(s, cfg),
                 d = DetachReward(s, cfg);
    EXPECT_GE(r, 0.0);
    EXPECT_LE(r, 1.0);
    EXPECT_GE(h, 0.0);
    EXPECT_LE(h, 1.0 + cfg.alpha_hold);
    // At most one of the three phases pays at a time.
    EXPECT_LE((r > 0.0) + (h > 0.0) + (d > 0.0), 1);
  }
}

TEST(PenaltyTest, Examples) {
  RewardConfig cfg;
  const std::vector<double> a = {0.5, -0.5}, zero = {0.0, 0.0};
  PenaltyInputs same;
  same.action = a;
  same.prev_action = a;
  EXPECT_DOUBLE_EQ(RegularizationPenalties(same, cfg), 0.0);

  const std::vector<double> b = {1.0, 1.0}, c = {-1.0, 1.0};
  PenaltyInputs rate;
  rate.action = b;
  rate.prev_action = c;
  EXPECT_NEAR(RegularizationPenalties(rate, cfg), -0.04, 1e-15);

  PenaltyInputs impact;
  impact.action = zero;
  impact.prev_action = zero;
  impact.impact_events = 2;
  EXPECT_DOUBLE_EQ(RegularizationPenalties(impact, cfg), -1.0);

  const std::vector<double> three = {0.0, 0.0, 0.0};
  PenaltyInputs bad;
  bad.action = three;
  bad.prev_action = zero;
  EXPECT_THROW(RegularizationPenalties(bad, cfg), std::invalid_argument);
}

TEST(BonusRewardTest, Examples) {
  RewardConfig cfg;
  EXPECT_DOUBLE_EQ(BonusReward(true, cfg), 5.0);
  EXPECT_DOUBLE_EQ(BonusReward(false, cfg), 0.0);
  cfg.bonus = 0.0;
  EXPECT_DOUBLE_EQ(BonusReward(true, cfg), 0.0);
}

TEST(RewardConfigTest, JsonStrictAndValidated) {
  RewardConfig c;
  c.sigma_sq = 0.5;
  c.penalties.slip = -0.25;
  nlohmann::json j = c;
  const RewardConfig back = j.get<RewardConfig>();
  EXPECT_DOUBLE_EQ(back.sigma_sq, 0.5);
  EXPECT_DOUBLE_EQ(back.penalties.slip, -0.25);
  EXPECT_ANY_THROW((nlohmann::json{{"sigmasq", 0.3}}.get<RewardConfig>()));
  EXPECT_ANY_THROW((nlohmann::json{{"sigma_sq", -1.0}}.get<RewardConfig>()));
  EXPECT_ANY_THROW((nlohmann::json{{"penalties", {{"slip", 0.5}}}}.get<RewardConfig>()));
}

}  // namespace
}  // namespace cerl
