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

#include "cerl/reach_env.h"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "cerl/json_util.h"

namespace cerl {
namespace {

constexpr ObsField kReachLayout[] = {
    {"position", 2}, {"target_delta", 2}, {"target", 2}, {"time_fraction", 1}};

}  // namespace

void ReachEnvConfig::Validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("env.dt must be > 0");
  if (!(target_min >= 0.0) || !(target_max >= target_min)) {
    throw std::invalid_argument("env target annulus must satisfy 0 <= min <= max");
  }
  if (!(max_speed > 0.0)) throw std::invalid_argument("env.max_speed must be > 0");
  if (episode_steps < 1) throw std::invalid_argument("env.episode_steps >= 1");
  reward.Validate();
}

void to_json(nlohmann::json& j, const ReachEnvConfig& c) {
  j = {{"type", "reach"},
       {"dt", c.dt},
       {"target_min", c.target_min},
       {"target_max", c.target_max},
       {"max_speed", c.max_speed},
       {"episode_steps", c.episode_steps}};
}

void from_json(const nlohmann::json& j, ReachEnvConfig& c) {
  json_util::RejectUnknown(
      j, {"type", "dt", "target_min", "target_max", "max_speed", "episode_steps"},
      "env");
  json_util::Get(j, "dt", c.dt);
  json_util::Get(j, "target_min", c.target_min);
  json_util::Get(j, "target_max", c.target_max);
  json_util::Get(j, "max_speed", c.max_speed);
  json_util::Get(j, "episode_steps", c.episode_steps);
}

ReachEnv::ReachEnv(ReachEnvConfig config, std::uint64_t seed)
    : config_(std::move(config)) {
  config_.Validate();
  Reset(seed);
}

std::uint64_t ReachEnv::layout_hash() const { return LayoutHash("reach/v1", kReachLayout); }

std::vector<double> ReachEnv::Reset(std::uint64_t seed) {
  Rng rng(Rng::SplitMix(seed ^ 0x72656163ULL));
  const double r = rng.Uniform(config_.target_min, config_.target_max);
  const double a = rng.Uniform(-std::numbers::pi, std::numbers::pi);
  target_ = Vec2(r * std::cos(a), r * std::sin(a));
  position_ = Vec2::Zero();
  step_ = 0;
  prev_action_.assign(kActSize, 0.0);
  return Observation();
}

StepResult ReachEnv::Step(std::span<const double> raw_action) {
  const std::vector<double> a = CheckedAction(raw_action, kActSize);
  const Vec2 v = Vec2(a[0], a[1]) * config_.max_speed;
  position_ += v * config_.dt;
  const double horizon = config_.episode_steps * config_.dt;
  EffectorSnapshot snap;
  snap.p_act = position_;
  snap.i_act = 0;
  snap.window.current = {target_, 0, horizon};
  snap.window.next = snap.window.current;
  snap.s_remaining = horizon - step_ * config_.dt;

  StepResult out;
  StepInfo& info = out.info;
  info.cmd_bits = {0};
  info.act_bits = {0};
  info.contact_made = {0};
  info.make_error = {0.0};
  info.breakdown.reach = ReachReward(snap, config_.reward);
  PenaltyInputs pin;
  pin.action = a;
  pin.prev_action = prev_action_;
  info.breakdown.penalty = RegularizationPenalties(pin, config_.reward);
  prev_action_ = a;
  ++step_;
  info.divergence = !position_.allFinite();
  out.reward = info.breakdown.Total();
  out.done = step_ >= config_.episode_steps || info.divergence;
  info.plan_exhausted = step_ >= config_.episode_steps;
  out.obs = Observation();
  return out;
}

std::vector<double> ReachEnv::Observation() const {
  const Vec2 d = target_ - position_;
  return {position_.x(), position_.y(), d.x(), d.y(), target_.x(), target_.y(),
          static_cast<double>(step_) / config_.episode_steps};
}

std::unique_ptr<Env> ReachEnv::Clone() const { return std::make_unique<ReachEnv>(*this); }

}  // namespace cerl
