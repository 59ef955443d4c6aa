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

#include "cerl/oracle.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cerl {
namespace {

// Writes v / limit into out[0..1], shrinking the vector (not the components
// independently) when it exceeds the unit box.
void PutVelocity(const Vec2& v, double limit, double* out) {
  Vec2 u = v / limit;
  const double m = std::max({1.0, std::abs(u.x()), std::abs(u.y())});
  u /= m;
  out[0] = u.x();
  out[1] = u.y();
}

}  // namespace

int StepsToExpiry(double s_remaining, double dt) {
  int n = 0;
  double s = s_remaining;
  do {
    s -= dt;
    ++n;
  } while (s > 0.0);
  return n;
}

std::vector<double> LocoOracleAction(const LocoEnv& env) {
  const LocoEnvConfig& cfg = env.config();
  const LocoState& s = env.state();
  const double dt = cfg.dt;
  std::vector<double> a(LocoEnv::kActSize, 0.0);

  const double slot = (s.step + 1) * dt / env.params().duration;
  const Pose2 target =
      ReferencePose(env.params(), GaitPeriod(env.gait()), s.episode_start, slot);
  const Twist2 xi = LogPose(s.base.Inverse().Compose(target));
  a[0] = std::clamp(xi.vx / dt / cfg.max_base_speed, -1.0, 1.0);
  a[1] = std::clamp(xi.vy / dt / cfg.max_base_speed, -1.0, 1.0);
  a[2] = std::clamp(xi.omega / dt / cfg.max_base_yaw_rate, -1.0, 1.0);

  for (int f = 0; f < kNumFeet; ++f) {
    const GoalWindow w = s.tracker.window(f);
    const bool stance = w.current.indicator == 1;
    a[11 + f] = stance ? 1.0 : -1.0;
    if (stance && s.feet[f].attached) continue;
    const Vec2 d = Rotate(-s.base.theta, w.current.point - s.feet[f].position);
    PutVelocity(d / dt, cfg.max_foot_speed, &a[3 + 2 * f]);
  }
  return a;
}

std::vector<double> ManipOracleAction(const ManipEnv& env) {
  const ManipEnvConfig& cfg = env.config();
  const ManipState& s = env.state();
  const double dt = cfg.dt;
  std::vector<double> a(ManipEnv::kActSize, 0.0);
  bool hold = true;
  for (int h = 0; h < 2; ++h) {
    const bool want = s.tracker.window(h).current.indicator == 1;
    a[4 + h] = want ? 1.0 : -1.0;
    hold = hold && want && s.hands[h].attached;
  }
  if (hold) {
    const int n = StepsToExpiry(s.tracker.s_remaining(), dt);
    const Pose2 goal = env.CurrentPoseGoal();
    const double f = 1.0 / n;
    const Pose2 next{s.object.x + f * (goal.x - s.object.x),
                     s.object.y + f * (goal.y - s.object.y),
                     WrapAngle(s.object.theta + f * WrapAngle(goal.theta - s.object.theta))};
    for (int h = 0; h < 2; ++h) {
      const Vec2 p = SurfacePoint(cfg.object, next, s.hands[h].contact);
      PutVelocity((p - s.hands[h].position) / dt, cfg.max_hand_speed, &a[2 * h]);
    }
    return a;
  }
  for (int h = 0; h < 2; ++h) {
    if (s.hands[h].attached && a[4 + h] > 0.0) continue;
    const Vec2 p = env.CommandedPoint(h);
    PutVelocity((p - s.hands[h].position) / dt, cfg.max_hand_speed, &a[2 * h]);
  }
  return a;
}

std::vector<double> OracleController::Act(const Env& env, std::span<const double>) {
  if (const auto* loco = dynamic_cast<const LocoEnv*>(&env)) return LocoOracleAction(*loco);
  if (const auto* manip = dynamic_cast<const ManipEnv*>(&env)) return ManipOracleAction(*manip);
  throw std::invalid_argument("oracle controller supports loco and manip environments");
}

std::vector<double> ZeroController::Act(const Env& env, std::span<const double>) {
  return std::vector<double>(env.act_size(), 0.0);
}

std::vector<double> RandomController::Act(const Env& env, std::span<const double>) {
  std::vector<double> a(env.act_size());
  for (auto& x : a) x = rng_.Uniform(-1.0, 1.0);
  return a;
}

}  // namespace cerl
