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
#include <string>

#include "cerl/json_util.h"

namespace cerl {
namespace {

using json_util::Get;
using json_util::RejectUnknown;

double Kernel(const EffectorSnapshot& snap, const RewardConfig& cfg) {
  const double d = (snap.window.current.point - snap.p_act).norm();
  const double arg = cfg.squared_distance ? d * d : d;
  return std::exp(-arg / cfg.sigma_sq);
}

}  // namespace

void RewardConfig::Validate() const {
  if (!(sigma_sq > 0.0)) throw std::invalid_argument("reward.sigma_sq must be > 0");
  if (!(alpha_hold >= 0.0)) {
    throw std::invalid_argument("reward.alpha_hold must be >= 0");
  }
  if (!(delta > 0.0)) throw std::invalid_argument("reward.delta must be > 0");
  if (!(c_pos > 0.0) || !(c_rot > 0.0)) {
    throw std::invalid_argument("reward.c_pos and c_rot must be > 0");
  }
  if (!(eps_pos > 0.0) || !(eps_rot > 0.0)) {
    throw std::invalid_argument("reward.eps_pos and eps_rot must be > 0");
  }
  if (!(bonus >= 0.0)) throw std::invalid_argument("reward.bonus must be >= 0");
  for (double w : {penalties.action_rate, penalties.angular_velocity,
                   penalties.effector_speed, penalties.slip, penalties.impact}) {
    if (!(w <= 0.0)) {
      throw std::invalid_argument("reward.penalties weights must be <= 0");
    }
  }
}

void to_json(nlohmann::json& j, const RewardConfig& c) {
  j = {{"sigma_sq", c.sigma_sq},
       {"alpha_hold", c.alpha_hold},
       {"delta", c.delta},
       {"c_pos", c.c_pos},
       {"c_rot", c.c_rot},
       {"eps_pos", c.eps_pos},
       {"eps_rot", c.eps_rot},
       {"bonus", c.bonus},
       {"squared_distance", c.squared_distance},
       {"penalties",
        {{"action_rate", c.penalties.action_rate},
         {"angular_velocity", c.penalties.angular_velocity},
         {"effector_speed", c.penalties.effector_speed},
         {"slip", c.penalties.slip},
         {"impact", c.penalties.impact}}}};
}

void from_json(const nlohmann::json& j, RewardConfig& c) {
  RejectUnknown(j,
                {"sigma_sq", "alpha_hold", "delta", "c_pos", "c_rot", "eps_pos",
                 "eps_rot", "bonus", "squared_distance", "penalties"},
                "reward");
  Get(j, "sigma_sq", c.sigma_sq);
  Get(j, "alpha_hold", c.alpha_hold);
  Get(j, "delta", c.delta);
  Get(j, "c_pos", c.c_pos);
  Get(j, "c_rot", c.c_rot);
  Get(j, "eps_pos", c.eps_pos);
  Get(j, "eps_rot", c.eps_rot);
  Get(j, "bonus", c.bonus);
  Get(j, "squared_distance", c.squared_distance);
  if (j.contains("penalties")) {
    const auto& p = j.at("penalties");
    RejectUnknown(p,
                  {"action_rate", "angular_velocity", "effector_speed", "slip",
                   "impact"},
                  "reward.penalties");
    Get(p, "action_rate", c.penalties.action_rate);
    Get(p, "angular_velocity", c.penalties.angular_velocity);
    Get(p, "effector_speed", c.penalties.effector_speed);
    Get(p, "slip", c.penalties.slip);
    Get(p, "impact", c.penalties.impact);
  }
  c.Validate();
}

double ReachReward(const EffectorSnapshot& snap, const RewardConfig& cfg) {
  if (snap.window.current.indicator != 0 || snap.s_remaining > cfg.delta) {
    return 0.0;
  }
  return Kernel(snap, cfg);
}

double HoldReward(const EffectorSnapshot& snap, const RewardConfig& cfg) {
  if (snap.window.current.indicator != 1 || snap.i_act != 1) return 0.0;
  return 1.0 + cfg.alpha_hold * Kernel(snap, cfg);
}

double DetachReward(const EffectorSnapshot& snap, const RewardConfig& cfg) {
  return (snap.window.current.indicator == 0 && snap.i_act == 0 &&
          snap.s_remaining > cfg.delta)
             ? 1.0
             : 0.0;
}

double PoseReward(double dp, double dtheta, const RewardConfig& cfg) {
  return cfg.c_pos / (cfg.eps_pos + dp) + cfg.c_rot / (cfg.eps_rot + dtheta);
}

RewardBreakdown& RewardBreakdown::operator+=(const RewardBreakdown& o) {
  reach += o.reach;
  hold += o.hold;
  detach += o.detach;
  pose += o.pose;
  bonus += o.bonus;
  penalty += o.penalty;
  return *this;
}

RewardBreakdown TotalContactReward(std::span<const EffectorSnapshot> snapshots,
                                   const std::optional<PoseErrors>& pose,
                                   const RewardConfig& cfg) {
  RewardBreakdown b;
  for (const auto& s : snapshots) {
    b.reach += ReachReward(s, cfg);
    b.hold += HoldReward(s, cfg);
    b.detach += DetachReward(s, cfg);
  }
  if (pose) b.pose = PoseReward(pose->dp, pose->dtheta, cfg);
  return b;
}

double RegularizationPenalties(const PenaltyInputs& in, const RewardConfig& cfg) {
  if (in.action.size() != in.prev_action.size()) {
    throw std::invalid_argument("RegularizationPenalties: action shape mismatch");
  }
  double rate = 0.0;
  for (std::size_t i = 0; i < in.action.size(); ++i) {
    const double d = in.action[i] - in.prev_action[i];
    rate += d * d;
  }
  double speed = 0.0;
  for (const auto& v : in.effector_velocities) speed += v.squaredNorm();
  const auto& w = cfg.penalties;
  return w.action_rate * rate +
         w.angular_velocity * in.base_angular_velocity * in.base_angular_velocity +
         w.effector_speed * speed + w.slip * in.slip_events +
         w.impact * in.impact_events;
}

double BonusReward(bool bonus_fired, const RewardConfig& cfg) {
  return bonus_fired ? cfg.bonus : 0.0;
}

}  // namespace cerl
