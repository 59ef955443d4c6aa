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

#include "cerl/contact.h"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace cerl {

bool ContactGoal::WellFormed() const {
  return duration > 0.0 && std::isfinite(duration) &&
         (indicator == 0 || indicator == 1) && point.allFinite();
}

const char* PhaseName(ContactPhase phase) {
  switch (phase) {
    case ContactPhase::kReach:
      return "reach";
    case ContactPhase::kHold:
      return "hold";
    case ContactPhase::kDetach:
      return "detach";
  }
  return "?";
}

ContactPlan::ContactPlan(std::vector<std::string> names,
                         std::vector<std::vector<ContactGoal>> goals)
    : names_(std::move(names)), goals_(std::move(goals)) {
  if (names_.size() != goals_.size()) {
    throw std::invalid_argument("ContactPlan: name count != effector count");
  }
  if (goals_.empty()) {
    throw std::invalid_argument("ContactPlan: no end-effectors");
  }
  const std::size_t t = goals_[0].size();
  if (t == 0) throw std::invalid_argument("ContactPlan: empty goal list");
  for (const auto& list : goals_) {
    if (list.size() != t) {
      throw std::invalid_argument("ContactPlan: ragged goal lists");
    }
    for (const auto& g : list) {
      if (!g.WellFormed()) {
        throw std::invalid_argument("ContactPlan: malformed goal");
      }
    }
  }
}

BitMatrix ContactPlan::ContactSequence() const {
  BitMatrix m(num_effectors(), horizon());
  for (std::size_t e = 0; e < m.rows; ++e) {
    for (std::size_t t = 0; t < m.cols; ++t) m.at(e, t) = goals_[e][t].indicator;
  }
  return m;
}

nlohmann::json PlanToJson(const ContactPlan& plan) {
  nlohmann::json goals = nlohmann::json::array();
  for (std::size_t e = 0; e < plan.num_effectors(); ++e) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& g : plan.goals(e)) {
      list.push_back({{"p", {g.point.x(), g.point.y()}},
                      {"i", g.indicator},
                      {"S", g.duration}});
    }
    goals.push_back(std::move(list));
  }
  return {{"end_effectors", plan.names()}, {"goals", std::move(goals)}};
}

ContactPlan PlanFromJson(const nlohmann::json& j) {
  try {
    auto names = j.at("end_effectors").get<std::vector<std::string>>();
    std::vector<std::vector<ContactGoal>> goals;
    for (const auto& list : j.at("goals")) {
      std::vector<ContactGoal> out;
      for (const auto& g : list) {
        const auto& p = g.at("p");
        if (p.size() != 2) throw std::invalid_argument("goal point must be 2D");
        ContactGoal goal;
        goal.point = {p[0].get<double>(), p[1].get<double>()};
        goal.indicator = g.at("i").get<int>();
        goal.duration = g.at("S").get<double>();
        out.push_back(goal);
      }
      goals.push_back(std::move(out));
    }
    return ContactPlan(std::move(names), std::move(goals));
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("ContactPlan JSON: ") + e.what());
  }
}

ContactPhase PhaseOf(int indicator, double s_remaining, double delta) {
  if (indicator != 0 && indicator != 1) {
    throw std::invalid_argument("PhaseOf: indicator must be 0 or 1");
  }
  if (!(s_remaining >= 0.0)) {
    throw std::invalid_argument("PhaseOf: negative remaining duration");
  }
  if (!(delta > 0.0)) throw std::invalid_argument("PhaseOf: delta must be > 0");
  if (indicator == 1) return ContactPhase::kHold;
  return s_remaining <= delta ? ContactPhase::kReach : ContactPhase::kDetach;
}

GoalTracker::GoalTracker(std::shared_ptr<const ContactPlan> plan)
    : plan_(std::move(plan)) {
  if (!plan_ || plan_->horizon() == 0) {
    throw std::invalid_argument("GoalTracker: empty plan");
  }
  s_remaining_ = current_duration();
}

double GoalTracker::current_duration() const {
  // Durations are shared across effectors at a slot; effector 0 is canonical.
  const std::size_t slot = terminal_ ? plan_->horizon() - 1 : cursor_;
  return plan_->goal(0, slot).duration;
}

GoalWindow GoalTracker::window(std::size_t effector) const {
  const std::size_t last = plan_->horizon() - 1;
  const std::size_t cur = std::min(cursor_, last);
  const std::size_t nxt = std::min(cur + 1, last);
  return {plan_->goal(effector, cur), plan_->goal(effector, nxt)};
}

TickResult GoalTracker::Tick(double dt, std::span<const bool> achieved) const {
  if (!(dt > 0.0)) throw std::invalid_argument("Tick: dt must be > 0");
  TickResult r;
  r.tracker = *this;
  if (terminal_) {
    r.terminal = true;
    return r;
  }
  GoalTracker& t = r.tracker;
  t.s_remaining_ -= dt;
  if (t.s_remaining_ > 0.0) return r;

  r.expired = true;
  const double overshoot = -t.s_remaining_;
  bool all = !achieved.empty();
  for (bool a : achieved) all = all && a;
  if (all) {
    r.advanced = true;
    r.bonus_fired = true;
    if (t.cursor_ + 1 >= plan_->horizon()) {
      t.cursor_ = plan_->horizon();
      t.terminal_ = true;
      t.s_remaining_ = 0.0;
      r.terminal = true;
      return r;
    }
    ++t.cursor_;
  }
  const double rearm = t.current_duration();
  if (overshoot > rearm) {
    throw std::invalid_argument("Tick: dt exceeds the command duration");
  }
  t.s_remaining_ = rearm - overshoot;
  return r;
}

bool AchievedLocomotion(const Vec2& base_xy, std::span<const Vec2> goal_points,
                        double tau_base) {
  if (goal_points.empty()) {
    throw std::invalid_argument("AchievedLocomotion: no active goal points");
  }
  Vec2 c = Vec2::Zero();
  for (const auto& p : goal_points) c += p;
  c /= static_cast<double>(goal_points.size());
  return (base_xy - c).norm() <= tau_base;
}

bool AchievedManipulation(const Pose2& pose, const Pose2& goal, double tau_p,
                          double tau_theta) {
  const double dp = (pose.position() - goal.position()).norm();
  const double dth = std::abs(WrapAngle(pose.theta - goal.theta));
  return dp <= tau_p && dth <= tau_theta;
}

HammingResult HammingDeviation(const BitMatrix& plan_bits,
                               const BitMatrix& actual_bits) {
  if (plan_bits.rows != actual_bits.rows || plan_bits.cols != actual_bits.cols ||
      plan_bits.bits.size() != actual_bits.bits.size()) {
    throw std::invalid_argument("HammingDeviation: shape mismatch");
  }
  HammingResult r;
  r.size = plan_bits.bits.size();
  for (std::size_t i = 0; i < r.size; ++i) {
    r.count += (plan_bits.bits[i] != 0) != (actual_bits.bits[i] != 0);
  }
  r.mean = r.size ? static_cast<double>(r.count) / static_cast<double>(r.size)
                  : 0.0;
  return r;
}

}  // namespace cerl
