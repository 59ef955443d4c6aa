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

#include "cerl/loco_env.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cerl/json_util.h"

namespace cerl {
namespace {

constexpr ObsField kLocoLayout[] = {
    {"base_twist", 3},          {"base_orientation_cs", 2},
    {"foot_pos_base", 8},       {"foot_contact", 4},
    {"cmd_indicator_cur", 4},   {"cmd_indicator_next", 4},
    {"goal_cur_base", 8},       {"goal_next_base", 8},
    {"foot_to_goal_base", 8},   {"s_remaining", 1},
    {"duration", 1},
};

bool AllFinite(const LocoState& s) {
  if (!std::isfinite(s.base.x) || !std::isfinite(s.base.y) ||
      !std::isfinite(s.base.theta)) {
    return false;
  }
  for (const auto& f : s.feet) {
    if (!f.position.allFinite()) return false;
  }
  return true;
}

}  // namespace

int HorizonFor(int episode_steps, double dt, double duration) {
  return static_cast<int>(std::ceil(episode_steps * dt / duration)) + 4;
}

void LocoEnvConfig::Validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("env.dt must be > 0");
  if (gaits.empty()) throw std::invalid_argument("env.gaits must not be empty");
  if (!(heading_mode_prob >= 0.0 && heading_mode_prob <= 1.0)) {
    throw std::invalid_argument("env.heading_mode_prob must lie in [0, 1]");
  }
  if (!(ranges.duration.lo > dt)) {
    throw std::invalid_argument("env: command durations must exceed dt");
  }
  if (min_stance < 1 || min_stance > kNumFeet) {
    throw std::invalid_argument("env.min_stance must lie in [1, 4]");
  }
  if (!(layout.r_leg > 0.0)) throw std::invalid_argument("env.r_leg must be > 0");
  if (episode_steps < 1) throw std::invalid_argument("env.episode_steps >= 1");
  if (fixed_params && !(fixed_params->duration > dt)) {
    throw std::invalid_argument("env: fixed duration must exceed dt");
  }
  reward.Validate();
}

void to_json(nlohmann::json& j, const LocoEnvConfig& c) {
  std::vector<std::string> gaits;
  for (auto g : c.gaits) gaits.push_back(GaitName(g));
  j = {{"type", "loco"},
       {"dt", c.dt},
       {"gaits", gaits},
       {"heading_mode_prob", c.heading_mode_prob},
       {"stride", {c.ranges.stride.lo, c.ranges.stride.hi}},
       {"stance", {c.ranges.stance.lo, c.ranges.stance.hi}},
       {"yaw_rate", {c.ranges.yaw_rate.lo, c.ranges.yaw_rate.hi}},
       {"offset", {c.ranges.offset.lo, c.ranges.offset.hi}},
       {"duration", {c.ranges.duration.lo, c.ranges.duration.hi}},
       {"r_leg", c.layout.r_leg},
       {"jitter_pos", c.jitter_pos},
       {"jitter_theta", c.jitter_theta},
       {"min_stance", c.min_stance},
       {"ballistic_flight", c.ballistic_flight},
       {"max_base_speed", c.max_base_speed},
       {"max_base_yaw_rate", c.max_base_yaw_rate},
       {"max_foot_speed", c.max_foot_speed},
       {"impact_speed", c.impact_speed},
       {"tau_base", c.tau_base},
       {"feasibility_margin", c.feasibility_margin},
       {"episode_steps", c.episode_steps}};
}

void from_json(const nlohmann::json& j, LocoEnvConfig& c) {
  using json_util::Get;
  json_util::RejectUnknown(
      j,
      {"type", "dt", "gaits", "heading_mode_prob", "stride", "stance",
       "yaw_rate", "offset", "duration", "r_leg", "jitter_pos", "jitter_theta",
       "min_stance", "ballistic_flight", "max_base_speed", "max_base_yaw_rate",
       "max_foot_speed", "impact_speed", "tau_base", "feasibility_margin",
       "episode_steps"},
      "env");
  auto range = [&](const char* key, Range& r) {
    if (!j.contains(key)) return;
    const auto v = j.at(key).get<std::vector<double>>();
    if (v.size() != 2 || !(v[0] <= v[1])) {
      throw std::invalid_argument(std::string("env.") + key + " must be [lo, hi]");
    }
    r = {v[0], v[1]};
  };
  Get(j, "dt", c.dt);
  if (j.contains("gaits")) {
    const auto& g = j.at("gaits");
    c.gaits.clear();
    if (g.is_string() && g.get<std::string>() == "all") {
      c.gaits.assign(kAllGaits.begin(), kAllGaits.end());
    } else {
      for (const auto& name : g) c.gaits.push_back(GaitFromName(name.get<std::string>()));
    }
  }
  Get(j, "heading_mode_prob", c.heading_mode_prob);
  range("stride", c.ranges.stride);
  range("stance", c.ranges.stance);
  range("yaw_rate", c.ranges.yaw_rate);
  range("offset", c.ranges.offset);
  range("duration", c.ranges.duration);
  Get(j, "r_leg", c.layout.r_leg);
  Get(j, "jitter_pos", c.jitter_pos);
  Get(j, "jitter_theta", c.jitter_theta);
  Get(j, "min_stance", c.min_stance);
  Get(j, "ballistic_flight", c.ballistic_flight);
  Get(j, "max_base_speed", c.max_base_speed);
  Get(j, "max_base_yaw_rate", c.max_base_yaw_rate);
  Get(j, "max_foot_speed", c.max_foot_speed);
  Get(j, "impact_speed", c.impact_speed);
  Get(j, "tau_base", c.tau_base);
  Get(j, "feasibility_margin", c.feasibility_margin);
  Get(j, "episode_steps", c.episode_steps);
}

std::span<const ObsField> LocoEnv::Layout() { return kLocoLayout; }

std::uint64_t LocoEnv::layout_hash() const { return LayoutHash("loco/v1", Layout()); }

LocoEnv::LocoEnv(LocoEnvConfig config, std::uint64_t seed)
    : config_(std::move(config)) {
  config_.Validate();
  Rng rng(seed);
  gait_ = config_.gaits[rng.Index(config_.gaits.size())];
  const int probe_steps = config_.episode_steps;
  for (int draw = 0;; ++draw) {
    if (draw >= config_.max_param_draws) {
      throw PlanInfeasibleError("LocoEnv: no feasible gait parameters found");
    }
    if (config_.fixed_params) {
      params_ = *config_.fixed_params;
    } else {
      const PathMode mode = rng.Uniform() < config_.heading_mode_prob
                                ? PathMode::kHeading
                                : PathMode::kYawRate;
      params_ = SampleGaitParams(rng.NextU64(), mode, config_.ranges);
    }
    horizon_ = HorizonFor(probe_steps, config_.dt, params_.duration);
    try {
      const ContactPlan plan = BuildPlan(gait_, params_, config_.layout, horizon_,
                                         config_.start, config_.terrain);
      CheckPlanFeasibility(gait_, params_, config_.layout, plan, config_.start,
                           config_.tau_base, config_.feasibility_margin);
      break;
    } catch (const PlanInfeasibleError&) {
      if (config_.fixed_params) throw;
      ++rejected_draws_;
    }
  }
  Reset(seed);
}

Vec2 LocoEnv::HipWorld(const Pose2& base, int foot) const {
  return base.Apply(config_.layout.hips[foot]);
}

std::vector<double> LocoEnv::Reset(std::uint64_t seed) {
  Rng rng(Rng::SplitMix(seed ^ 0x6c6f636fULL));
  LocoState s;
  s.base = config_.start;
  s.base.x += rng.Uniform(-config_.jitter_pos, config_.jitter_pos);
  s.base.y += rng.Uniform(-config_.jitter_pos, config_.jitter_pos);
  s.base.theta =
      WrapAngle(s.base.theta + rng.Uniform(-config_.jitter_theta, config_.jitter_theta));
  s.episode_start = s.base;
  auto plan = std::make_shared<const ContactPlan>(BuildPlan(
      gait_, params_, config_.layout, horizon_, s.base, config_.terrain));
  s.tracker = GoalTracker(plan);
  for (int f = 0; f < kNumFeet; ++f) {
    auto& foot = s.feet[f];
    const ContactGoal& g = plan->goal(f, 0);
    if (g.indicator == 1) {
      foot.position = g.point;
      foot.anchor = g.point;
      foot.attached = true;
    } else {
      foot.position = s.base.Apply(NominalFoot(params_, config_.layout, f));
    }
  }
  s.prev_action.assign(kActSize, 0.0);
  state_ = std::move(s);
  return Observation();
}

StepResult LocoEnv::Step(std::span<const double> raw_action) {
  const std::vector<double> a = CheckedAction(raw_action, kActSize);
  LocoState& s = state_;
  const double dt = config_.dt;
  const RewardConfig& rc = config_.reward;
  StepResult out;
  StepInfo& info = out.info;
  info.cmd_bits.resize(kNumFeet);
  info.act_bits.resize(kNumFeet);
  info.contact_made.assign(kNumFeet, 0);
  info.make_error.assign(kNumFeet, 0.0);

  std::array<GoalWindow, kNumFeet> windows;
  for (int f = 0; f < kNumFeet; ++f) {
    windows[f] = s.tracker.window(f);
    info.cmd_bits[f] = windows[f].current.indicator;
  }
  const double s_pre = s.tracker.s_remaining();

  const Twist2 cmd{a[0] * config_.max_base_speed, a[1] * config_.max_base_speed,
                   a[2] * config_.max_base_yaw_rate};
  std::array<Vec2, kNumFeet> before;
  for (int f = 0; f < kNumFeet; ++f) before[f] = s.feet[f].position;

  // Release, then move swing feet, then make contact at the new location.
  for (int f = 0; f < kNumFeet; ++f) {
    if (s.feet[f].attached && a[11 + f] < 0.0) s.feet[f].attached = false;
  }
  for (int f = 0; f < kNumFeet; ++f) {
    auto& foot = s.feet[f];
    if (foot.attached) continue;
    const Vec2 v(a[3 + 2 * f] * config_.max_foot_speed,
                 a[4 + 2 * f] * config_.max_foot_speed);
    foot.position += Rotate(s.base.theta, v) * dt;
  }
  for (int f = 0; f < kNumFeet; ++f) {
    auto& foot = s.feet[f];
    if (foot.attached || a[11 + f] <= 0.0) continue;
    if ((foot.position - HipWorld(s.base, f)).norm() > config_.layout.r_leg) continue;
    foot.attached = true;
    foot.anchor = foot.position;
    info.contact_made[f] = 1;
    info.make_error[f] = (foot.position - windows[f].current.point).norm();
    if ((foot.position - before[f]).norm() / dt > config_.impact_speed) {
      ++info.impact_events;
    }
  }

  int n_attached = 0;
  for (const auto& foot : s.feet) n_attached += foot.attached;
  Twist2 applied{};
  if (n_attached >= config_.min_stance) {
    applied = cmd;
    s.last_supported_twist = cmd;
    s.flight_time = 0.0;
  } else if (n_attached == 0 && config_.ballistic_flight &&
             s.flight_time + dt <= s.tracker.current_duration() + dt + 1e-12) {
    applied = s.last_supported_twist;
    s.flight_time += dt;
  } else {
    s.flight_time += dt;
  }
  s.base = s.base.Compose(ExpTwist(applied, dt));
  s.twist = applied;

  for (int f = 0; f < kNumFeet; ++f) {
    auto& foot = s.feet[f];
    const Vec2 hip = HipWorld(s.base, f);
    if (foot.attached) {
      if ((foot.anchor - hip).norm() > config_.layout.r_leg) {
        foot.attached = false;
        ++info.slip_events;
      } else {
        foot.position = foot.anchor;
      }
    }
    if (!foot.attached) {
      const Vec2 rel = foot.position - hip;
      const double n = rel.norm();
      if (n > config_.layout.r_leg) foot.position = hip + rel * (config_.layout.r_leg / n);
    }
  }

  std::array<EffectorSnapshot, kNumFeet> snaps;
  std::array<Vec2, kNumFeet> foot_vel;
  for (int f = 0; f < kNumFeet; ++f) {
    snaps[f] = {s.feet[f].position, s.feet[f].attached ? 1 : 0, windows[f], s_pre};
    info.act_bits[f] = snaps[f].i_act;
    foot_vel[f] = (s.feet[f].position - before[f]) / dt;
  }
  info.breakdown = TotalContactReward(snaps, std::nullopt, rc);

  std::array<bool, kNumFeet> active{};
  std::vector<Vec2> pts;
  for (int f = 0; f < kNumFeet; ++f) {
    active[f] = windows[f].current.indicator == 1;
    if (active[f]) pts.push_back(windows[f].current.point);
  }
  if (pts.empty()) {
    for (int f = 0; f < kNumFeet; ++f) pts.push_back(windows[f].current.point);
  }
  const Vec2 support =
      s.base.Apply(SupportCentroidLocal(params_, config_.layout, active));
  const bool achieved = AchievedLocomotion(support, pts, config_.tau_base);
  const std::array<bool, kNumFeet> ach = {achieved, achieved, achieved, achieved};
  TickResult tick = s.tracker.Tick(dt, ach);
  s.tracker = tick.tracker;
  info.advanced = tick.advanced;
  info.bonus_fired = tick.bonus_fired;
  info.plan_exhausted = tick.terminal;

  PenaltyInputs pin;
  pin.action = a;
  pin.prev_action = s.prev_action;
  pin.base_angular_velocity = applied.omega;
  pin.effector_velocities = foot_vel;
  pin.slip_events = info.slip_events;
  pin.impact_events = info.impact_events;
  info.breakdown.penalty = RegularizationPenalties(pin, rc);
  info.breakdown.bonus = BonusReward(tick.bonus_fired, rc);
  s.prev_action = a;
  ++s.step;

  info.divergence = !AllFinite(s) || std::abs(s.base.x) > 1e3 ||
                    std::abs(s.base.y) > 1e3;
  out.reward = info.breakdown.Total();
  out.done = info.plan_exhausted || info.divergence ||
             s.step >= config_.episode_steps;
  out.obs = Observation();
  return out;
}

std::vector<double> LocoEnv::Observation() const {
  const LocoState& s = state_;
  std::vector<double> o;
  o.reserve(kObsSize);
  o.insert(o.end(), {s.twist.vx, s.twist.vy, s.twist.omega});
  o.insert(o.end(), {std::cos(s.base.theta), std::sin(s.base.theta)});
  for (const auto& f : s.feet) {
    const Vec2 p = s.base.ApplyInverse(f.position);
    o.insert(o.end(), {p.x(), p.y()});
  }
  for (const auto& f : s.feet) o.push_back(f.attached ? 1.0 : 0.0);
  std::array<GoalWindow, kNumFeet> w;
  for (int f = 0; f < kNumFeet; ++f) w[f] = s.tracker.window(f);
  for (const auto& x : w) o.push_back(x.current.indicator);
  for (const auto& x : w) o.push_back(x.next.indicator);
  for (const auto& x : w) {
    const Vec2 p = s.base.ApplyInverse(x.current.point);
    o.insert(o.end(), {p.x(), p.y()});
  }
  for (const auto& x : w) {
    const Vec2 p = s.base.ApplyInverse(x.next.point);
    o.insert(o.end(), {p.x(), p.y()});
  }
  for (int f = 0; f < kNumFeet; ++f) {
    const Vec2 d = Rotate(-s.base.theta, w[f].current.point - s.feet[f].position);
    o.insert(o.end(), {d.x(), d.y()});
  }
  o.push_back(s.tracker.s_remaining());
  o.push_back(s.tracker.current_duration());
  return o;
}

std::unique_ptr<Env> LocoEnv::Clone() const { return std::make_unique<LocoEnv>(*this); }

}  // namespace cerl
