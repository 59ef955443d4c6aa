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

#ifndef CERL_REWARD_H_
#define CERL_REWARD_H_

#include <optional>
#include <span>
#include <vector>

#include "cerl/contact.h"
#include <nlohmann/json.hpp>

namespace cerl {

struct PenaltyWeights {
  double action_rate = -0.01;
  double angular_velocity = -0.01;
  double effector_speed = -0.001;
  double slip = -0.5;
  double impact = -0.5;
};

struct RewardConfig {
  double sigma_sq = 0.25;
  double alpha_hold = 1.0;
  double delta = 0.15;
  double c_pos = 0.5;
  double c_rot = 0.5;
  double eps_pos = 0.05;
  double eps_rot = 0.1;
  double bonus = 5.0;
  // Use d^2 instead of d inside the reach/hold kernels.
  bool squared_distance = false;
  PenaltyWeights penalties;

  // Throws std::invalid_argument on violated invariants.
  void Validate() const;
};

void to_json(nlohmann::json& j, const RewardConfig& c);
// Rejects unknown keys; missing keys keep their defaults.
void from_json(const nlohmann::json& j, RewardConfig& c);

struct EffectorSnapshot {
  Vec2 p_act = Vec2::Zero();
  int i_act = 0;
  GoalWindow window;
  double s_remaining = 0.0;
};

double ReachReward(const EffectorSnapshot& snap, const RewardConfig& cfg);
double HoldReward(const EffectorSnapshot& snap, const RewardConfig& cfg);
double DetachReward(const EffectorSnapshot& snap, const RewardConfig& cfg);

// dp, dtheta >= 0; dtheta already wrapped.
double PoseReward(double dp, double dtheta, const RewardConfig& cfg);

struct PoseErrors {
  double dp = 0.0;
  double dtheta = 0.0;
};

struct RewardBreakdown {
  double reach = 0.0;
  double hold = 0.0;
  double detach = 0.0;
  double pose = 0.0;
  double bonus = 0.0;
  double penalty = 0.0;

  double Total() const { return pose + reach + hold + detach + bonus + penalty; }
  RewardBreakdown& operator+=(const RewardBreakdown& o);
};

// Sum over effectors of reach + hold + detach plus the pose term when
// provided. Only the contact fields of the breakdown are filled.
RewardBreakdown TotalContactReward(std::span<const EffectorSnapshot> snapshots,
                                   const std::optional<PoseErrors>& pose,
                                   const RewardConfig& cfg);

struct PenaltyInputs {
  std::span<const double> action;
  std::span<const double> prev_action;
  double base_angular_velocity = 0.0;
  // Planar velocities of the end-effectors (or other joint-like speeds).
  std::span<const Vec2> effector_velocities;
  int slip_events = 0;
  int impact_events = 0;
};

// Weighted squared norms and event counts; result <= 0 for non-positive
// weights.
double RegularizationPenalties(const PenaltyInputs& in, const RewardConfig& cfg);

double BonusReward(bool bonus_fired, const RewardConfig& cfg);

}  // namespace cerl

#endif  // CERL_REWARD_H_
