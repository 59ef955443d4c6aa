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

#include "cerl/manip_env.h"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "cerl/json_util.h"

namespace cerl {
namespace {

constexpr ObsField kManipLayout[] = {
    {"object_pose_xycs", 4},   {"object_twist", 3},
    {"hand_rel_object", 4},    {"hand_contact", 2},
    {"cmd_indicator_cur", 2},  {"cmd_indicator_next", 2},
    {"contact_cur_rel", 4},    {"contact_next_rel", 4},
    {"hand_to_contact", 4},    {"s_remaining", 1},
    {"duration", 1},           {"goal_pose_rel_object", 3},
    {"reach_phase", 2},        {"pose_goal_met", 1},
};

Vec2 ClampToTable(const Vec2& p, double half) {
  return {std::clamp(p.x(), -half, half), std::clamp(p.y(), -half, half)};
}

}  // namespace

const char* TaskName(ManipTask task) {
  return task == ManipTask::kRepose ? "repose" : "reorient";
}

ManipTask TaskFromName(const std::string& name) {
  if (name == "repose") return ManipTask::kRepose;
  if (name == "reorient") return ManipTask::kReorient;
  throw std::invalid_argument("unknown manipulation task '" + name + "'");
}

void ManipEnvConfig::Validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("env.dt must be > 0");
  if (tasks.empty()) throw std::invalid_argument("env.tasks must not be empty");
  object.Validate();
  if (n_targets < 1 || n_rotations < 1) {
    throw std::invalid_argument("env.n_targets and env.n_rotations must be >= 1");
  }
  if (!(eps_att > 0.0) || !(tau_p > 0.0) || !(tau_theta > 0.0)) {
    throw std::invalid_argument("env thresholds must be > 0");
  }
  if (episode_steps < 1) throw std::invalid_argument("env.episode_steps >= 1");
  reward.Validate();
}

void to_json(nlohmann::json& j, const ManipEnvConfig& c) {
  std::vector<std::string> tasks;
  for (auto t : c.tasks) tasks.push_back(TaskName(t));
  nlohmann::json obj = {{"shape", ShapeName(c.object.shape)},
                        {"half_extents", {c.object.half_extents.x(), c.object.half_extents.y()}},
                        {"radius", c.object.radius},
                        {"sides", c.object.sides},
                        {"apothem", c.object.apothem},
                        {"corner_radius", c.object.corner_radius}};
  j = {{"type", "manip"},
       {"dt", c.dt},
       {"object", obj},
       {"tasks", tasks},
       {"x", {c.ranges.x.lo, c.ranges.x.hi}},
       {"y", {c.ranges.y.lo, c.ranges.y.hi}},
       {"yaw", {c.ranges.yaw.lo, c.ranges.yaw.hi}},
       {"n_targets", c.n_targets},
       {"n_rotations", c.n_rotations},
       {"max_hand_speed", c.max_hand_speed},
       {"eps_att", c.eps_att},
       {"tau_p", c.tau_p},
       {"tau_theta", c.tau_theta},
       {"impact_speed", c.impact_speed},
       {"episode_steps", c.episode_steps},
       {"end_on_plan_exhausted", c.end_on_plan_exhausted}};
}

void from_json(const nlohmann::json& j, ManipEnvConfig& c) {
  using json_util::Get;
  json_util::RejectUnknown(
      j,
      {"type", "dt", "object", "tasks", "x", "y", "yaw", "ranges", "n_targets",
       "n_rotations", "max_hand_speed", "eps_att", "tau_p", "tau_theta",
       "impact_speed", "episode_steps", "end_on_plan_exhausted"},
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
  if (j.contains("object")) {
    const auto& o = j.at("object");
    json_util::RejectUnknown(o, {"shape", "half_extents", "radius", "sides",
                                 "apothem", "corner_radius"},
                             "env.object");
    if (o.contains("shape")) c.object.shape = ShapeFromName(o.at("shape").get<std::string>());
    if (o.contains("half_extents")) {
      const auto h = o.at("half_extents").get<std::vector<double>>();
      if (h.size() != 2) throw std::invalid_argument("env.object.half_extents is 2D");
      c.object.half_extents = {h[0], h[1]};
    }
    Get(o, "radius", c.object.radius);
    Get(o, "sides", c.object.sides);
    Get(o, "apothem", c.object.apothem);
    Get(o, "corner_radius", c.object.corner_radius);
  }
  if (j.contains("tasks")) {
    c.tasks.clear();
    for (const auto& t : j.at("tasks")) c.tasks.push_back(TaskFromName(t.get<std::string>()));
  }
  if (j.contains("ranges")) {
    const auto r = j.at("ranges").get<std::string>();
    if (r == "trained") {
      c.ranges = PoseRanges::Trained();
    } else if (r == "evaluated") {
      c.ranges = PoseRanges::Evaluated();
    } else {
      throw std::invalid_argument("env.ranges must be 'trained' or 'evaluated'");
    }
  }
  range("x", c.ranges.x);
  range("y", c.ranges.y);
  range("yaw", c.ranges.yaw);
  Get(j, "n_targets", c.n_targets);
  Get(j, "n_rotations", c.n_rotations);
  Get(j, "max_hand_speed", c.max_hand_speed);
  Get(j, "eps_att", c.eps_att);
  Get(j, "tau_p", c.tau_p);
  Get(j, "tau_theta", c.tau_theta);
  Get(j, "impact_speed", c.impact_speed);
  Get(j, "episode_steps", c.episode_steps);
  Get(j, "end_on_plan_exhausted", c.end_on_plan_exhausted);
}

Pose2 FitRigid(const Vec2& b0, const Vec2& b1, const Vec2& w0, const Vec2& w1,
               double fallback_theta) {
  const Vec2 db = b1 - b0, dw = w1 - w0;
  double theta = fallback_theta;
  if (dw.norm() > 1e-12 && db.norm() > 1e-12) {
    theta = WrapAngle(std::atan2(dw.y(), dw.x()) - std::atan2(db.y(), db.x()));
  }
  const Vec2 p = 0.5 * (w0 + w1) - Rotate(theta, 0.5 * (b0 + b1));
  return {p.x(), p.y(), theta};
}

std::span<const ObsField> ManipEnv::Layout() { return kManipLayout; }

std::uint64_t ManipEnv::layout_hash() const { return LayoutHash("manip/v1", Layout()); }

ManipEnv::ManipEnv(ManipEnvConfig config, std::uint64_t seed)
    : config_(std::move(config)) {
  config_.Validate();
  Reset(seed);
}

std::size_t ManipEnv::Slot() const {
  return std::min(state_.tracker.cursor(), state_.plan->plan.horizon() - 1);
}

SurfaceContact ManipEnv::CommandedContact(int hand) const {
  return state_.plan->contacts[Slot()][hand];
}

Vec2 ManipEnv::CommandedPoint(int hand) const {
  return SurfacePoint(config_.object, state_.object, CommandedContact(hand));
}

Pose2 ManipEnv::CurrentPoseGoal() const { return state_.plan->slot_goals[Slot()]; }

std::vector<double> ManipEnv::Reset(std::uint64_t seed) {
  Rng rng(Rng::SplitMix(seed ^ 0x6d616e69ULL));
  ManipState s;
  s.object = config_.start;
  s.task = config_.tasks[rng.Index(config_.tasks.size())];
  const std::uint64_t plan_seed = rng.NextU64();
  s.plan = std::make_shared<const ManipPlan>(
      s.task == ManipTask::kRepose
          ? ReposePlan(config_.object, s.object, config_.n_targets, config_.ranges,
                       plan_seed, config_.table)
          : ReorientPlan(config_.object, s.object, config_.n_rotations, plan_seed));
  s.tracker = GoalTracker(std::shared_ptr<const ContactPlan>(s.plan, &s.plan->plan));
  for (int h = 0; h < 2; ++h) s.hands[h].position = config_.hand_rest[h];
  s.prev_action.assign(kActSize, 0.0);
  state_ = std::move(s);
  return Observation();
}

StepResult ManipEnv::Step(std::span<const double> raw_action) {
  const std::vector<double> a = CheckedAction(raw_action, kActSize);
  ManipState& s = state_;
  const double dt = config_.dt;
  const RewardConfig& rc = config_.reward;
  StepResult out;
  StepInfo& info = out.info;
  info.cmd_bits.resize(2);
  info.act_bits.resize(2);
  info.contact_made.assign(2, 0);
  info.make_error.assign(2, 0.0);

  std::array<GoalWindow, 2> windows;
  for (int h = 0; h < 2; ++h) {
    windows[h] = s.tracker.window(h);
    info.cmd_bits[h] = windows[h].current.indicator;
  }
  const double s_pre = s.tracker.s_remaining();
  const std::size_t slot = Slot();
  const Pose2 goal = s.plan->slot_goals[slot];
  const Pose2 object_before = s.object;
  std::array<Vec2, 2> before;
  for (int h = 0; h < 2; ++h) before[h] = s.hands[h].position;

  for (int h = 0; h < 2; ++h) {
    if (s.hands[h].attached && a[4 + h] < 0.0) s.hands[h].attached = false;
  }
  std::array<Vec2, 2> target;
  for (int h = 0; h < 2; ++h) {
    target[h] = s.hands[h].position +
                Vec2(a[2 * h], a[2 * h + 1]) * (config_.max_hand_speed * dt);
  }
  const ObjectSpec& spec = config_.object;
  if (s.hands[0].attached && s.hands[1].attached) {
    const Vec2 b0 = SurfacePointLocal(spec, s.hands[0].contact);
    const Vec2 b1 = SurfacePointLocal(spec, s.hands[1].contact);
    Pose2 next = FitRigid(b0, b1, target[0], target[1], s.object.theta);
    const Vec2 clamped = ClampToTable(next.position(), config_.table.half_size);
    next.x = clamped.x();
    next.y = clamped.y();
    s.object = next;
  }
  for (int h = 0; h < 2; ++h) {
    auto& hand = s.hands[h];
    hand.position = hand.attached
                        ? SurfacePoint(spec, s.object, hand.contact)
                        : ClampToTable(target[h], config_.table.half_size);
  }
  for (int h = 0; h < 2; ++h) {
    auto& hand = s.hands[h];
    if (hand.attached || a[4 + h] <= 0.0) continue;
    const SurfaceContact c = s.plan->contacts[slot][h];
    const Vec2 p = SurfacePoint(spec, s.object, c);
    const double err = (hand.position - p).norm();
    if (err > config_.eps_att) continue;
    hand.attached = true;
    hand.contact = c;
    info.contact_made[h] = 1;
    info.make_error[h] = err;
    if ((hand.position - before[h]).norm() / dt > config_.impact_speed) {
      ++info.impact_events;
    }
    hand.position = p;
  }
  s.object_twist = {(s.object.x - object_before.x) / dt,
                    (s.object.y - object_before.y) / dt,
                    WrapAngle(s.object.theta - object_before.theta) / dt};

  std::array<EffectorSnapshot, 2> snaps;
  std::array<Vec2, 2> hand_vel;
  for (int h = 0; h < 2; ++h) {
    GoalWindow w = windows[h];
    w.current.point = SurfacePoint(spec, s.object, s.plan->contacts[slot][h]);
    snaps[h] = {s.hands[h].position, s.hands[h].attached ? 1 : 0, w, s_pre};
    info.act_bits[h] = snaps[h].i_act;
    hand_vel[h] = (s.hands[h].position - before[h]) / dt;
  }
  // A slot that commands no contact carries no manipulation goal.
  const bool free_slot =
      windows[0].current.indicator == 0 && windows[1].current.indicator == 0;
  std::optional<PoseErrors> pe;
  if (!free_slot) {
    pe = PoseErrors{(s.object.position() - goal.position()).norm(),
                    std::abs(WrapAngle(s.object.theta - goal.theta))};
  }
  info.breakdown = TotalContactReward(snaps, pe, rc);

  const bool achieved =
      free_slot || AchievedManipulation(s.object, goal, config_.tau_p, config_.tau_theta);
  const std::array<bool, 2> ach = {achieved, achieved};
  TickResult tick = s.tracker.Tick(dt, ach);
  s.tracker = tick.tracker;
  info.advanced = tick.advanced;
  info.bonus_fired = tick.bonus_fired;
  info.plan_exhausted = tick.terminal;

  PenaltyInputs pin;
  pin.action = a;
  pin.prev_action = s.prev_action;
  pin.effector_velocities = hand_vel;
  pin.impact_events = info.impact_events;
  info.breakdown.penalty = RegularizationPenalties(pin, rc);
  info.breakdown.bonus = BonusReward(tick.bonus_fired, rc);
  s.prev_action = a;
  ++s.step;

  info.divergence = !std::isfinite(s.object.x) || !std::isfinite(s.object.y) ||
                    !std::isfinite(s.object.theta);
  out.reward = info.breakdown.Total();
  out.done = (config_.end_on_plan_exhausted && info.plan_exhausted) || info.divergence ||
             s.step >= config_.episode_steps;
  out.obs = Observation();
  return out;
}

std::vector<double> ManipEnv::Observation() const {
  const ManipState& s = state_;
  const ObjectSpec& spec = config_.object;
  std::vector<double> o;
  o.reserve(kObsSize);
  o.insert(o.end(), {s.object.x, s.object.y, std::cos(s.object.theta),
                     std::sin(s.object.theta)});
  o.insert(o.end(), {s.object_twist.vx, s.object_twist.vy, s.object_twist.omega});
  const Vec2 c = s.object.position();
  for (const auto& h : s.hands) o.insert(o.end(), {h.position.x() - c.x(), h.position.y() - c.y()});
  for (const auto& h : s.hands) o.push_back(h.attached ? 1.0 : 0.0);
  const std::size_t slot = Slot();
  const std::size_t next = std::min(slot + 1, s.plan->plan.horizon() - 1);
  std::array<GoalWindow, 2> w = {s.tracker.window(0), s.tracker.window(1)};
  for (const auto& x : w) o.push_back(x.current.indicator);
  for (const auto& x : w) o.push_back(x.next.indicator);
  std::array<Vec2, 2> cur;
  for (int h = 0; h < 2; ++h) {
    cur[h] = SurfacePoint(spec, s.object, s.plan->contacts[slot][h]);
    o.insert(o.end(), {cur[h].x() - c.x(), cur[h].y() - c.y()});
  }
  for (int h = 0; h < 2; ++h) {
    const Vec2 p = SurfacePoint(spec, s.object, s.plan->contacts[next][h]);
    o.insert(o.end(), {p.x() - c.x(), p.y() - c.y()});
  }
  for (int h = 0; h < 2; ++h) {
    const Vec2 d = cur[h] - s.hands[h].position;
    o.insert(o.end(), {d.x(), d.y()});
  }
  o.push_back(s.tracker.s_remaining());
  o.push_back(s.tracker.current_duration());
  const Pose2 goal = s.plan->slot_goals[slot];
  const Vec2 g = s.object.ApplyInverse(goal.position());
  o.insert(o.end(), {g.x(), g.y(), WrapAngle(goal.theta - s.object.theta)});
  for (const auto& x : w) {
    o.push_back(x.current.indicator == 0 &&
                        s.tracker.s_remaining() <= config_.reward.delta
                    ? 1.0
                    : 0.0);
  }
  o.push_back(AchievedManipulation(s.object, goal, config_.tau_p, config_.tau_theta)
                  ? 1.0
                  : 0.0);
  return o;
}

std::unique_ptr<Env> ManipEnv::Clone() const { return std::make_unique<ManipEnv>(*this); }

}  // namespace cerl
