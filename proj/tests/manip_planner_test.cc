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

#include "cerl/manip_planner.h"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <gtest/gtest.h>

#include "cerl/random.h"

namespace cerl {
namespace {

constexpr double kPi = std::numbers::pi;

TEST(SurfacePointTest, Examples) {
  const ObjectSpec box = ObjectSpec::Box(0.5, 0.5);
  const SurfaceContact plus_x{0, 0.0};
  const Vec2 a = SurfacePoint(box, {}, plus_x);
  EXPECT_NEAR(a.x(), 0.5, 1e-15);
  EXPECT_NEAR(a.y(), 0.0, 1e-15);
  const Vec2 b = SurfacePoint(box, {0.0, 0.0, kPi / 2.0}, plus_x);
  EXPECT_NEAR(b.x(), 0.0, 1e-15);
  EXPECT_NEAR(b.y(), 0.5, 1e-15);

  const ObjectSpec disc = ObjectSpec::Disc(0.3);
  const Vec2 c = SurfacePoint(disc, {}, {-1, kPi});
  EXPECT_NEAR(c.x(), -0.3, 1e-15);
  EXPECT_NEAR(c.y(), 0.0, 1e-15);
}

TEST(SurfacePointTest, PointsLieOnBoundary) {
  Rng rng(2);
  const ObjectSpec shapes[] = {ObjectSpec::Box(0.12, 0.08), ObjectSpec::Disc(0.1),
                               ObjectSpec::RoundedPolygon(6, 0.07, 0.02)};
  for (const ObjectSpec& s : shapes) {
    for (int i = 0; i < 200; ++i) {
      SurfaceContact c;
      if (s.shape == ObjectShape::kDisc) {
        c = {-1, rng.Uniform(-kPi, kPi)};
      } else {
        c.face = static_cast<int>(rng.Index(s.num_faces()));
        c.param = rng.Uniform(-0.03, 0.03);
      }
      const Vec2 p = SurfacePointLocal(s, c);
      EXPECT_NEAR(SignedDistanceLocal(s, p), 0.0, 1e-12) << ShapeName(s.shape);
      // The normal points outward.
      EXPECT_GT(SignedDistanceLocal(s, p + 1e-3 * SurfaceNormalLocal(s, c)), 0.0);
    }
  }
}

TEST(SurfacePointTest, RejectsInvalidContact) {
  const ObjectSpec box = ObjectSpec::Box(0.1, 0.1);
  EXPECT_THROW(SurfacePointLocal(box, {7, 0.0}), std::invalid_argument);
  EXPECT_THROW(SurfacePointLocal(box, {0, 0.5}), std::invalid_argument);
}

TEST(SelectGraspTest, OpposingFacesAlongHandAxes) {
  const ObjectSpec box = ObjectSpec::Box(0.12, 0.08);
  const auto g = SelectGrasp(box, {});
  EXPECT_EQ(g[0].face, 1);  // +y
  EXPECT_EQ(g[1].face, 3);  // -y
  const auto r = SelectGrasp(box, {0.0, 0.0, kPi / 2.0});
  EXPECT_EQ(r[0].face, 0);  // +x rotated onto +y
  EXPECT_EQ(r[1].face, 2);
}

TEST(ReposePlanTest, TrainedRangesRespected) {
  const ObjectSpec box = ObjectSpec::Box(0.12, 0.08);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const ManipPlan m = ReposePlan(box, {}, 3, PoseRanges::Trained(), seed);
    ASSERT_EQ(m.pose_goals.size(), 3u);
    ASSERT_EQ(m.plan.horizon(), 4u);
    for (const Pose2& g : m.pose_goals) {
      EXPECT_GE(g.x, 0.0);
      EXPECT_LE(g.x, 0.1);
      EXPECT_GE(g.y, -0.15);
      EXPECT_LE(g.y, 0.15);
      EXPECT_GE(g.theta, -0.6);
      EXPECT_LE(g.theta, 0.6);
    }
    EXPECT_EQ(m.plan.goal(0, 0).indicator, 0);
    for (std::size_t t = 1; t < m.plan.horizon(); ++t) {
      EXPECT_EQ(m.plan.goal(0, t).indicator, 1);
      EXPECT_EQ(m.plan.goal(1, t).indicator, 1);
    }
  }
}

TEST(ReposePlanTest, EvaluatedRangesRespected) {
  const ObjectSpec box = ObjectSpec::Box(0.12, 0.08);
  double max_x = 0.0, max_yaw = 0.0;
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    const ManipPlan m = ReposePlan(box, {}, 1, PoseRanges::Evaluated(), seed);
    const Pose2& g = m.pose_goals[0];
    EXPECT_GE(g.x, 0.0);
    EXPECT_LE(g.x, 0.2);
    EXPECT_LE(std::abs(g.theta), 1.2);
    max_x = std::max(max_x, g.x);
    max_yaw = std::max(max_yaw, std::abs(g.theta));
  }
  // Draws reach beyond the trained ranges.
  EXPECT_GT(max_x, 0.1);
  EXPECT_GT(max_yaw, 0.6);
}

TEST(ReposePlanTest, DurationsAndDeterminism) {
  const ObjectSpec box = ObjectSpec::Box(0.12, 0.08);
  const ManipPlan a = ReposePlan(box, {}, 3, PoseRanges::Trained(), 17);
  const ManipPlan b = ReposePlan(box, {}, 3, PoseRanges::Trained(), 17);
  EXPECT_EQ(a.plan, b.plan);
  for (std::size_t t = 0; t < a.plan.horizon(); ++t) {
    EXPECT_GE(a.plan.goal(0, t).duration, kManipDurationLo);
    EXPECT_LE(a.plan.goal(0, t).duration, kManipDurationHi);
  }
}

TEST(ReorientPlanTest, QuarterTurnSteps) {
  const ObjectSpec box = ObjectSpec::Box(0.12, 0.08);
  const ManipPlan m = ReorientPlan(box, {}, 3, 5);
  ASSERT_EQ(m.pose_goals.size(), 3u);
  EXPECT_EQ(m.plan.horizon(), 9u);
  double prev = 0.0;
  for (const Pose2& g : m.pose_goals) {
    EXPECT_NEAR(WrapAngle(g.theta - prev), kPi / 4.0, 1e-12);
    prev = g.theta;
  }
  for (std::size_t t = 0; t < m.plan.horizon(); ++t) {
    EXPECT_GE(m.plan.goal(1, t).duration, 1.0);
    EXPECT_LE(m.plan.goal(1, t).duration, 1.5);
  }
}

TEST(ReorientPlanTest, FullTurnReturnsToStart) {
  const ObjectSpec box = ObjectSpec::Box(0.12, 0.08);
  const Pose2 start{0.0, 0.0, 0.3};
  const ManipPlan m = ReorientPlan(box, start, 8, 1);
  EXPECT_NEAR(WrapAngle(m.pose_goals.back().theta - start.theta), 0.0, 1e-9);
}

}  // namespace
}  // namespace cerl
