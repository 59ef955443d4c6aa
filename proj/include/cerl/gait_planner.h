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

#ifndef CERL_GAIT_PLANNER_H_
#define CERL_GAIT_PLANNER_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "cerl/contact.h"
#include "cerl/geometry.h"

namespace cerl {

enum class GaitType { kTrot, kPace, kBound, kJump, kCrawl };

inline constexpr std::array<GaitType, 5> kAllGaits = {
    GaitType::kTrot, GaitType::kPace, GaitType::kBound, GaitType::kJump,
    GaitType::kCrawl};

// Foot order used everywhere: left-front, right-front, left-hind, right-hind.
enum Foot { kLF = 0, kRF = 1, kLH = 2, kRH = 3 };
inline constexpr int kNumFeet = 4;
inline constexpr std::array<const char*, kNumFeet> kFootNames = {"LF", "RF", "LH",
                                                                 "RH"};

const char* GaitName(GaitType gait);
GaitType GaitFromName(const std::string& name);

// Slots per gait cycle: 2, or 4 for the crawl.
int GaitPeriod(GaitType gait);

std::array<int, kNumFeet> GaitTemplate(GaitType gait, long slot);

enum class PathMode { kHeading, kYawRate };

struct GaitParams {
  // Indexed [front, hind].
  std::array<double, 2> stride_len = {0.0, 0.0};
  std::array<double, 2> stance_width = {0.2, 0.2};
  PathMode mode = PathMode::kHeading;
  // Direction of travel in the start frame (heading mode).
  double heading = 0.0;
  // Base turn rate along the path (yaw-rate mode).
  double yaw_rate = 0.0;
  std::array<Vec2, kNumFeet> offsets = {Vec2::Zero(), Vec2::Zero(),
                                        Vec2::Zero(), Vec2::Zero()};
  double duration = 0.35;

  // Both pairs advance by the mean of the sampled pair strides.
  double effective_stride() const { return 0.5 * (stride_len[0] + stride_len[1]); }
  bool Valid() const;
};

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

struct GaitRanges {
  Range stride = {0.0, 0.3};
  Range stance = {0.1, 0.3};
  Range heading = {-3.141592653589793, 3.141592653589793};
  Range yaw_rate = {-3.141592653589793, 3.141592653589793};
  Range offset = {-0.15, 0.15};
  Range duration = {0.34, 0.36};
};

GaitParams SampleGaitParams(std::uint64_t seed, PathMode mode,
                            const GaitRanges& ranges = {});

struct FootLayout {
  std::array<Vec2, kNumFeet> hips = {Vec2(0.2, 0.15), Vec2(0.2, -0.15),
                                     Vec2(-0.2, 0.15), Vec2(-0.2, -0.15)};
  double r_leg = 0.35;
};

struct TerrainBounds {
  double x_min = -25.0, x_max = 25.0;
  double y_min = -25.0, y_max = 25.0;
  bool Contains(const Vec2& p) const {
    return p.x() >= x_min && p.x() <= x_max && p.y() >= y_min && p.y() <= y_max;
  }
};

// Nominal foot position in the base frame: under the hip, laterally at half
// the pair's stance width, plus the per-foot offset.
Vec2 NominalFoot(const GaitParams& params, const FootLayout& layout, int foot);

// Constant body twist that advances the base by stride/period per slot.
Twist2 ReferenceTwist(const GaitParams& params, int steps_per_cycle);

// Reference base pose after `slot` command durations (fractional allowed).
Pose2 ReferencePose(const GaitParams& params, int steps_per_cycle,
                    const Pose2& start, double slot);

// Footfall of every foot for a base at the reference pose of `slot`.
// Throws PlanInfeasibleError when a footfall leaves the terrain.
std::array<Vec2, kNumFeet> FootfallLocations(const GaitParams& params,
                                             const FootLayout& layout,
                                             double slot, const Pose2& start,
                                             int steps_per_cycle,
                                             const TerrainBounds& terrain = {});

// Stance runs are pinned at the footfall of the reference pose at the middle
// of the run. Swing slots carry the next touchdown location.
ContactPlan BuildPlan(GaitType gait, const GaitParams& params,
                      const FootLayout& layout, int horizon, const Pose2& start,
                      const TerrainBounds& terrain = {});

// Checks that a base following the reference path keeps every planned
// stance foot inside its leg workspace (with `margin`) and that the
// support-projected base passes the advancement gate (tau_base - margin) at
// every slot end. Throws PlanInfeasibleError on the first violation.
void CheckPlanFeasibility(GaitType gait, const GaitParams& params,
                          const FootLayout& layout, const ContactPlan& plan,
                          const Pose2& start, double tau_base, double margin);

// Base-frame point the advancement gate compares against the centroid of the
// active goal points: the mean nominal foot of the active feet.
Vec2 SupportCentroidLocal(const GaitParams& params, const FootLayout& layout,
                          const std::array<bool, kNumFeet>& active);

struct VelocityCommand {
  GaitParams params;
  double requested_stride = 0.0;
  bool stride_capped = false;
};

// Heading from the commanded direction and stride = |v| * cycle time, so the
// reference base speed matches the command unless the stride cap binds.
VelocityCommand VelocityToParams(double vx, double vy, double duration,
                                 int cycle_slots = 2, double max_stride = 0.3);

}  // namespace cerl

#endif  // CERL_GAIT_PLANNER_H_
