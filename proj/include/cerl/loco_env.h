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

#ifndef CERL_LOCO_ENV_H_
#define CERL_LOCO_ENV_H_

#include <array>
#include <memory>
#include <optional>
#include <vector>

#include "cerl/env.h"
#include "cerl/gait_planner.h"
#include "cerl/random.h"

namespace cerl {

struct LocoEnvConfig {
  double dt = 0.02;
  // Gaits drawn (uniformly, once per environment) from this list.
  std::vector<GaitType> gaits = {GaitType::kTrot};
  // Probability of the heading path mode versus the yaw-rate mode.
  double heading_mode_prob = 0.5;
  GaitRanges ranges;
  // When set, replaces the sampled gait parameters.
  std::optional<GaitParams> fixed_params;
  FootLayout layout;
  TerrainBounds terrain;
  Pose2 start;
  double jitter_pos = 0.005;
  double jitter_theta = 0.01;
  int min_stance = 2;
  bool ballistic_flight = true;
  double max_base_speed = 1.0;
  double max_base_yaw_rate = 4.0;
  double max_foot_speed = 4.0;
  double impact_speed = 2.5;
  double tau_base = 0.1;
  // Slack required by the feasibility screen on sampled parameters.
  double feasibility_margin = 0.02;
  int max_param_draws = 10000;
  int episode_steps = 300;
  RewardConfig reward;

  void Validate() const;
};

void to_json(nlohmann::json& j, const LocoEnvConfig& c);
void from_json(const nlohmann::json& j, LocoEnvConfig& c);

struct FootState {
  Vec2 position = Vec2::Zero();
  bool attached = false;
  Vec2 anchor = Vec2::Zero();
};

struct LocoState {
  Pose2 base;
  Twist2 twist;
  Twist2 last_supported_twist;
  double flight_time = 0.0;
  std::array<FootState, kNumFeet> feet;
  GoalTracker tracker;
  int step = 0;
  std::vector<double> prev_action;
  Pose2 episode_start;
};

// Top-down quadruped. Action (15, each in [-1, 1]): base twist command (3),
// per-foot planar velocity in base axes (8), per-foot contact intent (4).
// Intent > 0 requests contact, < 0 releases it, exactly 0 keeps the state.
class LocoEnv : public Env {
 public:
  static constexpr int kObsSize = 51;
  static constexpr int kActSize = 15;

  // Gait and gait parameters are drawn here, once per environment lifetime.
  LocoEnv(LocoEnvConfig config, std::uint64_t seed);

  int obs_size() const override { return kObsSize; }
  int act_size() const override { return kActSize; }
  int num_effectors() const override { return kNumFeet; }
  std::uint64_t layout_hash() const override;
  double dt() const override { return config_.dt; }

  std::vector<double> Reset(std::uint64_t seed) override;
  StepResult Step(std::span<const double> action) override;
  std::vector<double> Observation() const override;
  std::unique_ptr<Env> Clone() const override;

  const LocoEnvConfig& config() const { return config_; }
  GaitType gait() const { return gait_; }
  const GaitParams& params() const { return params_; }
  const LocoState& state() const { return state_; }
  void set_state(const LocoState& s) { state_ = s; }
  // Number of parameter draws rejected by the feasibility screen.
  int rejected_draws() const { return rejected_draws_; }

  Vec2 HipWorld(const Pose2& base, int foot) const;

  static std::span<const ObsField> Layout();

 private:
  LocoEnvConfig config_;
  GaitType gait_ = GaitType::kTrot;
  GaitParams params_;
  int rejected_draws_ = 0;
  int horizon_ = 0;
  LocoState state_;
};

// Slots needed to cover an episode at the given command duration.
int HorizonFor(int episode_steps, double dt, double duration);

}  // namespace cerl

#endif  // CERL_LOCO_ENV_H_
