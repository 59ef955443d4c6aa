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

#ifndef CERL_MANIP_ENV_H_
#define CERL_MANIP_ENV_H_

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "cerl/env.h"
#include "cerl/manip_planner.h"
#include "cerl/random.h"

namespace cerl {

enum class ManipTask { kRepose, kReorient };

const char* TaskName(ManipTask task);
ManipTask TaskFromName(const std::string& name);

struct ManipEnvConfig {
  double dt = 0.02;
  ObjectSpec object = ObjectSpec::Box(0.12, 0.08);
  std::vector<ManipTask> tasks = {ManipTask::kRepose, ManipTask::kReorient};
  PoseRanges ranges = PoseRanges::Trained();
  int n_targets = 3;
  int n_rotations = 2;
  Pose2 start;
  std::array<Vec2, 2> hand_rest = {Vec2(0.0, 0.3), Vec2(0.0, -0.3)};
  double max_hand_speed = 1.0;
  double eps_att = 0.03;
  double tau_p = 0.05;
  double tau_theta = 0.1;
  double impact_speed = 1.5;
  TableBounds table;
  int episode_steps = 480;
  // When false, the final slot stays active after the plan completes and the
  // episode runs to episode_steps.
  bool end_on_plan_exhausted = false;
  RewardConfig reward;

  void Validate() const;
};

void to_json(nlohmann::json& j, const ManipEnvConfig& c);
void from_json(const nlohmann::json& j, ManipEnvConfig& c);

struct HandState {
  Vec2 position = Vec2::Zero();
  bool attached = false;
  SurfaceContact contact;
};

struct ManipState {
  Pose2 object;
  Twist2 object_twist;  // table-frame (vx, vy, omega)
  std::array<HandState, 2> hands;
  std::shared_ptr<const ManipPlan> plan;
  GoalTracker tracker;
  ManipTask task = ManipTask::kRepose;
  int step = 0;
  std::vector<double> prev_action;
};

// Tabletop object moved by two rigidly attaching hands. Action (6, each in
// [-1, 1]): per-hand planar velocity (4) and per-hand contact intent (2).
// Intent > 0 requests contact, < 0 releases it, exactly 0 keeps the state.
class ManipEnv : public Env {
 public:
  static constexpr int kObsSize = 37;
  static constexpr int kActSize = 6;

  ManipEnv(ManipEnvConfig config, std::uint64_t seed);

  int obs_size() const override { return kObsSize; }
  int act_size() const override { return kActSize; }
  int num_effectors() const override { return 2; }
  std::uint64_t layout_hash() const override;
  double dt() const override { return config_.dt; }

  std::vector<double> Reset(std::uint64_t seed) override;
  StepResult Step(std::span<const double> action) override;
  std::vector<double> Observation() const override;
  std::unique_ptr<Env> Clone() const override;

  const ManipEnvConfig& config() const { return config_; }
  const ManipState& state() const { return state_; }
  void set_state(const ManipState& s) { state_ = s; }

  // Surface contact and world point hand h is commanded to at the current
  // cursor, on the object's current pose.
  SurfaceContact CommandedContact(int hand) const;
  Vec2 CommandedPoint(int hand) const;
  // Object pose goal in force at the current cursor.
  Pose2 CurrentPoseGoal() const;

  static std::span<const ObsField> Layout();

 private:
  std::size_t Slot() const;

  ManipEnvConfig config_;
  ManipState state_;
};

// Rigid planar transform carrying the object-frame points (b0, b1) onto the
// world points (w0, w1) in the least-squares sense.
Pose2 FitRigid(const Vec2& b0, const Vec2& b1, const Vec2& w0, const Vec2& w1,
               double fallback_theta);

}  // namespace cerl

#endif  // CERL_MANIP_ENV_H_
