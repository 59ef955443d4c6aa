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

#ifndef CERL_REACH_ENV_H_
#define CERL_REACH_ENV_H_

#include <memory>
#include <vector>

#include "cerl/env.h"
#include "cerl/random.h"

namespace cerl {

struct ReachEnvConfig {
  double dt = 0.02;
  double target_min = 0.5;
  double target_max = 1.0;
  double max_speed = 2.0;
  int episode_steps = 50;
  RewardConfig reward;

  ReachEnvConfig() {
    // The whole episode is one reach window.
    reward.delta = 1e9;
    reward.bonus = 0.0;
  }
  void Validate() const;
};

void to_json(nlohmann::json& j, const ReachEnvConfig& c);
void from_json(const nlohmann::json& j, ReachEnvConfig& c);

// One point effector that must reach a target drawn on an annulus around its
// start. Only the reach term and the action-rate penalty are active.
// Observation: position (2), target delta (2), target (2), time fraction (1).
class ReachEnv : public Env {
 public:
  static constexpr int kObsSize = 7;
  static constexpr int kActSize = 2;

  ReachEnv(ReachEnvConfig config, std::uint64_t seed);

  int obs_size() const override { return kObsSize; }
  int act_size() const override { return kActSize; }
  int num_effectors() const override { return 1; }
  std::uint64_t layout_hash() const override;
  double dt() const override { return config_.dt; }

  std::vector<double> Reset(std::uint64_t seed) override;
  StepResult Step(std::span<const double> action) override;
  std::vector<double> Observation() const override;
  std::unique_ptr<Env> Clone() const override;

  const Vec2& position() const { return position_; }
  const Vec2& target() const { return target_; }

 private:
  ReachEnvConfig config_;
  Vec2 position_ = Vec2::Zero();
  Vec2 target_ = Vec2::Zero();
  int step_ = 0;
  std::vector<double> prev_action_;
};

}  // namespace cerl

#endif  // CERL_REACH_ENV_H_
