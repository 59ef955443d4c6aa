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

#ifndef CERL_EVAL_H_
#define CERL_EVAL_H_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cerl/env.h"
#include "cerl/loco_env.h"
#include "cerl/manip_env.h"
#include "cerl/oracle.h"

namespace cerl {

struct StepRecord {
  std::vector<int> cmd_bits;
  std::vector<int> act_bits;
  std::vector<int> contact_made;
  std::vector<double> make_error;
  RewardBreakdown breakdown;
  double reward = 0.0;
};

struct EpisodeLog {
  std::uint64_t seed = 0;
  std::uint64_t config_digest = 0;
  int num_effectors = 0;
  std::vector<StepRecord> steps;
  double elapsed = 0.0;
  // Locomotion: base displacement over the episode.
  Vec2 displacement = Vec2::Zero();
  // Manipulation: error to the final pose target when the episode ended.
  std::optional<PoseErrors> terminal;
  bool plan_exhausted = false;
};

nlohmann::json EpisodeLogToJson(const EpisodeLog& log);
EpisodeLog EpisodeLogFromJson(const nlohmann::json& j);

EpisodeLog RunEpisode(Env& env, Controller& controller, std::uint64_t seed,
                      int max_steps = 100000);

// Mean distance at contact establishment; nullopt without any contact event.
std::optional<double> ContactTrackingError(const EpisodeLog& log);
// Per-step mean Hamming distance between commanded and actual contact bits.
double PlanDeviation(const EpisodeLog& log);

struct MetricCell {
  std::vector<double> axes;
  std::vector<std::string> labels;
  double mean = 0.0;
  double stderr_ = 0.0;
  int n = 0;
  bool flagged = false;
};

struct MetricTable {
  std::string name;
  std::vector<std::string> axis_names;
  std::vector<std::string> label_names;
  std::vector<MetricCell> cells;
  nlohmann::json metadata = nlohmann::json::object();
};

// Mean and standard error of the mean; n = values.size().
MetricCell Summarize(const std::vector<double>& values);

void WriteCsv(std::ostream& os, const MetricTable& t);
nlohmann::json TableToJson(const MetricTable& t);

using ControllerFactory = std::function<std::unique_ptr<Controller>()>;

std::vector<double> DefaultVelocityAxis();
std::vector<double> DefaultDurationAxis();

struct VelocityGridOptions {
  std::vector<double> vx = DefaultVelocityAxis();
  std::vector<double> vy = DefaultVelocityAxis();
  int episodes = 100;
  GaitType gait = GaitType::kTrot;
  double duration = 0.35;
  // Cells at or below this speed are flagged as inside the training range.
  double trained_speed = 0.65;
  std::uint64_t seed = 0;
};

// Velocity tracking error per (vx, vy) cell; infeasible cells keep n = 0.
MetricTable VelocityGridEval(const ControllerFactory& make, const LocoEnvConfig& base,
                             const VelocityGridOptions& opt);

struct DurationSweepOptions {
  std::vector<GaitType> gaits = {kAllGaits.begin(), kAllGaits.end()};
  std::vector<double> durations = DefaultDurationAxis();
  int episodes = 100;
  std::uint64_t seed = 0;
};

struct SweepTables {
  MetricTable tracking;  // contact_tracking_error (m)
  MetricTable hamming;   // plan_deviation
};

// Controllers are keyed by policy name; a null factory marks a missing
// checkpoint and yields n = 0 cells.
SweepTables DurationSweep(const std::vector<std::pair<std::string, ControllerFactory>>& policies,
                          const LocoEnvConfig& base, const DurationSweepOptions& opt);

struct PoseEvalOptions {
  ManipTask task = ManipTask::kRepose;
  PoseRanges ranges = PoseRanges::Evaluated();
  std::string ranges_name = "evaluated";
  int episodes = 100;
  std::uint64_t seed = 0;
};

// Rows: position (m) and rotation (rad) terminal errors.
MetricTable PoseErrorEval(const ControllerFactory& make, const ManipEnvConfig& base,
                          const PoseEvalOptions& opt);

// Expected |goal - start| when the object never moves and the goal offset is
// uniform over the ranges: {E position error, E rotation error}.
PoseErrors ZeroMotionBaseline(const PoseRanges& ranges);

}  // namespace cerl

#endif  // CERL_EVAL_H_
