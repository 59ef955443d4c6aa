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

#ifndef CERL_CONTACT_H_
#define CERL_CONTACT_H_

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cerl/geometry.h"
#include <nlohmann/json.hpp>

namespace cerl {

// Thrown by planners when a goal cannot be realized in the declared
// terrain bounds or leg workspace.
class PlanInfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One end-effector's commanded contact point, contact flag and the time
// allotted to the command.
struct ContactGoal {
  Vec2 point = Vec2::Zero();
  int indicator = 0;
  double duration = 1.0;

  bool WellFormed() const;
  bool operator==(const ContactGoal&) const = default;
};

// The two-switch lookahead an end-effector observes.
struct GoalWindow {
  ContactGoal current;
  ContactGoal next;
};

// Row-major binary matrix, rows are end-effectors and columns time steps.
struct BitMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<int> bits;

  BitMatrix() = default;
  BitMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), bits(r * c, 0) {}
  int& at(std::size_t r, std::size_t c) { return bits[r * cols + c]; }
  int at(std::size_t r, std::size_t c) const { return bits[r * cols + c]; }
  bool operator==(const BitMatrix&) const = default;
};

enum class ContactPhase { kReach, kHold, kDetach };

const char* PhaseName(ContactPhase phase);

// Per end-effector goal sequences of equal length.
class ContactPlan {
 public:
  ContactPlan() = default;
  ContactPlan(std::vector<std::string> names,
              std::vector<std::vector<ContactGoal>> goals);

  std::size_t num_effectors() const { return goals_.size(); }
  std::size_t horizon() const { return goals_.empty() ? 0 : goals_[0].size(); }
  const std::vector<std::string>& names() const { return names_; }
  const ContactGoal& goal(std::size_t effector, std::size_t slot) const {
    return goals_[effector][slot];
  }
  const std::vector<ContactGoal>& goals(std::size_t effector) const {
    return goals_[effector];
  }

  // E x T stacked indicators.
  BitMatrix ContactSequence() const;

  bool operator==(const ContactPlan&) const = default;

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<ContactGoal>> goals_;
};

nlohmann::json PlanToJson(const ContactPlan& plan);
ContactPlan PlanFromJson(const nlohmann::json& j);

// Phase of one effector. The boundary s == delta is Reach.
ContactPhase PhaseOf(int indicator, double s_remaining, double delta);

struct TickResult;

// Runtime cursor over a plan. All effectors share one cursor and one
// remaining-time clock; a goal set is replaced only as a whole.
class GoalTracker {
 public:
  GoalTracker() = default;
  explicit GoalTracker(std::shared_ptr<const ContactPlan> plan);

  // Advances the clock by dt. On expiry the cursor moves one switch iff
  // every entry of `achieved` is true; otherwise the same goals are rearmed.
  // Overshoot past zero is carried into the rearmed clock so total elapsed
  // time is conserved.
  TickResult Tick(double dt, std::span<const bool> achieved) const;

  const ContactPlan& plan() const { return *plan_; }
  std::shared_ptr<const ContactPlan> shared_plan() const { return plan_; }
  std::size_t cursor() const { return cursor_; }
  double s_remaining() const { return s_remaining_; }
  bool terminal() const { return terminal_; }
  GoalWindow window(std::size_t effector) const;
  double current_duration() const;

 private:
  std::shared_ptr<const ContactPlan> plan_;
  std::size_t cursor_ = 0;
  double s_remaining_ = 0.0;
  bool terminal_ = false;
};

struct TickResult {
  GoalTracker tracker;
  bool expired = false;
  bool advanced = false;
  bool bonus_fired = false;
  // Cursor moved past the last goal; the episode should end.
  bool terminal = false;
};

// Base (projected to the ground) within tau of the centroid of the active
// goal points.
bool AchievedLocomotion(const Vec2& base_xy, std::span<const Vec2> goal_points,
                        double tau_base);

bool AchievedManipulation(const Pose2& pose, const Pose2& goal, double tau_p,
                          double tau_theta);

struct HammingResult {
  std::size_t count = 0;
  std::size_t size = 0;
  double mean = 0.0;
};

HammingResult HammingDeviation(const BitMatrix& plan_bits,
                               const BitMatrix& actual_bits);

}  // namespace cerl

#endif  // CERL_CONTACT_H_
