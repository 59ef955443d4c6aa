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

#include "cerl/gait_planner.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "cerl/random.h"

namespace cerl {
namespace {

long Mod(long a, long n) { return ((a % n) + n) % n; }

int Bit(GaitType gait, int foot, long slot) {
  return GaitTemplate(gait, Mod(slot, GaitPeriod(gait)))[foot];
}

struct Run {
  long start;
  long length;
};

// Contact run containing `slot` (which must be a contact slot).
Run RunAt(GaitType gait, int foot, long slot) {
  long start = slot;
  while (Bit(gait, foot, start - 1) == 1) --start;
  long end = slot;
  while (Bit(gait, foot, end + 1) == 1) ++end;
  return {start, end - start + 1};
}

long NextTouchdown(GaitType gait, int foot, long slot) {
  long j = slot + 1;
  while (Bit(gait, foot, j) == 0) ++j;
  return j;
}

double RunMid(const Run& r) { return static_cast<double>(r.start) + 0.5 * r.length; }

}  // namespace

const char* GaitName(GaitType gait) {
  switch (gait) {
    case GaitType::kTrot:
      return "trot";
    case GaitType::kPace:
      return "pace";
    case GaitType::kBound:
      return "bound";
    case GaitType::kJump:
      return "jump";
    case GaitType::kCrawl:
      return "crawl";
  }
  return "?";
}

GaitType GaitFromName(const std::string& name) {
  for (GaitType g : kAllGaits) {
    if (name == GaitName(g)) return g;
  }
  throw std::invalid_argument("unknown gait '" + name + "'");
}

int GaitPeriod(GaitType gait) { return gait == GaitType::kCrawl ? 4 : 2; }

std::array<int, kNumFeet> GaitTemplate(GaitType gait, long slot) {
  if (slot < 0) throw std::invalid_argument("GaitTemplate: negative slot");
  const bool even = slot % 2 == 0;
  const int a = even ? 1 : 0, b = even ? 0 : 1;
  switch (gait) {
    case GaitType::kTrot:
      return {a, b, b, a};
    case GaitType::kPace:
      return {a, b, a, b};
    case GaitType::kBound:
      return {a, a, b, b};
    case GaitType::kJump:
      return {a, a, a, a};
    case GaitType::kCrawl: {
      // Swing order LF -> RH -> RF -> LH.
      static constexpr std::array<int, 4> kOrder = {kLF, kRH, kRF, kLH};
      std::array<int, kNumFeet> bits = {1, 1, 1, 1};
      bits[kOrder[slot % 4]] = 0;
      return bits;
    }
  }
  return {0, 0, 0, 0};
}

bool GaitParams::Valid() const {
  for (int p = 0; p < 2; ++p) {
    if (!(stride_len[p] >= 0.0 && stride_len[p] <= 0.3)) return false;
    if (!(stance_width[p] >= 0.1 && stance_width[p] <= 0.3)) return false;
  }
  for (const auto& o : offsets) {
    if (!(std::abs(o.x()) <= 0.15 && std::abs(o.y()) <= 0.15)) return false;
  }
  return duration > 0.0 && std::isfinite(heading) && std::isfinite(yaw_rate);
}

GaitParams SampleGaitParams(std::uint64_t seed, PathMode mode,
                            const GaitRanges& ranges) {
  Rng rng(seed);
  GaitParams p;
  p.mode = mode;
  for (int i = 0; i < 2; ++i) {
    p.stride_len[i] = rng.Uniform(ranges.stride.lo, ranges.stride.hi);
    p.stance_width[i] = rng.Uniform(ranges.stance.lo, ranges.stance.hi);
  }
  // Both angle draws are consumed so the remaining fields do not depend on
  // the mode.
  const double heading = rng.Uniform(ranges.heading.lo, ranges.heading.hi);
  const double yaw_rate = rng.Uniform(ranges.yaw_rate.lo, ranges.yaw_rate.hi);
  p.heading = mode == PathMode::kHeading ? heading : 0.0;
  p.yaw_rate = mode == PathMode::kYawRate ? yaw_rate : 0.0;
  for (auto& o : p.offsets) {
    o.x() = rng.Uniform(ranges.offset.lo, ranges.offset.hi);
    o.y() = rng.Uniform(ranges.offset.lo, ranges.offset.hi);
  }
  p.duration = rng.Uniform(ranges.duration.lo, ranges.duration.hi);
  return p;
}

Vec2 NominalFoot(const GaitParams& params, const FootLayout& layout, int foot) {
  const Vec2& hip = layout.hips[foot];
  const int pair = foot < 2 ? 0 : 1;
  const double side = hip.y() >= 0.0 ? 1.0 : -1.0;
  return Vec2(hip.x(), side * 0.5 * params.stance_width[pair]) +
         params.offsets[foot];
}

Twist2 ReferenceTwist(const GaitParams& params, int steps_per_cycle) {
  const double speed = params.effective_stride() /
                       (static_cast<double>(steps_per_cycle) * params.duration);
  if (params.mode == PathMode::kHeading) {
    return {speed * std::cos(params.heading), speed * std::sin(params.heading),
            0.0};
  }
  return {speed, 0.0, params.yaw_rate};
}

Pose2 ReferencePose(const GaitParams& params, int steps_per_cycle,
                    const Pose2& start, double slot) {
  return start.Compose(ExpTwist(ReferenceTwist(params, steps_per_cycle),
                                slot * params.duration));
}

std::array<Vec2, kNumFeet> FootfallLocations(const GaitParams& params,
                                             const FootLayout& layout,
                                             double slot, const Pose2& start,
                                             int steps_per_cycle,
                                             const TerrainBounds& terrain) {
  const Pose2 ref = ReferencePose(params, steps_per_cycle, start, slot);
  std::array<Vec2, kNumFeet> out;
  for (int f = 0; f < kNumFeet; ++f) {
    out[f] = ref.Apply(NominalFoot(params, layout, f));
    if (!terrain.Contains(out[f])) {
      std::ostringstream msg;
      msg << "footfall of " << kFootNames[f] << " at slot " << slot
          << " leaves the terrain bounds";
      throw PlanInfeasibleError(msg.str());
    }
  }
  return out;
}

ContactPlan BuildPlan(GaitType gait, const GaitParams& params,
                      const FootLayout& layout, int horizon, const Pose2& start,
                      const TerrainBounds& terrain) {
  if (horizon < 2) throw std::invalid_argument("BuildPlan: horizon must be >= 2");
  if (!(params.duration > 0.0)) {
    throw std::invalid_argument("BuildPlan: duration must be > 0");
  }
  const int period = GaitPeriod(gait);
  std::vector<std::vector<ContactGoal>> goals(kNumFeet);
  for (int f = 0; f < kNumFeet; ++f) {
    goals[f].reserve(horizon);
    for (long t = 0; t < horizon; ++t) {
      const int bit = Bit(gait, f, t);
      const long anchor_slot = bit ? t : NextTouchdown(gait, f, t);
      const Run run = RunAt(gait, f, anchor_slot);
      const auto feet =
          FootfallLocations(params, layout, RunMid(run), start, period, terrain);
      goals[f].push_back({feet[f], bit, params.duration});
    }
  }
  std::vector<std::string> names(kFootNames.begin(), kFootNames.end());
  return ContactPlan(std::move(names), std::move(goals));
}

Vec2 SupportCentroidLocal(const GaitParams& params, const FootLayout& layout,
                          const std::array<bool, kNumFeet>& active) {
  Vec2 c = Vec2::Zero();
  int n = 0;
  for (int f = 0; f < kNumFeet; ++f) {
    if (!active[f]) continue;
    c += NominalFoot(params, layout, f);
    ++n;
  }
  if (n == 0) {
    for (int f = 0; f < kNumFeet; ++f) c += NominalFoot(params, layout, f);
    n = kNumFeet;
  }
  return c / n;
}

void CheckPlanFeasibility(GaitType gait, const GaitParams& params,
                          const FootLayout& layout, const ContactPlan& plan,
                          const Pose2& start, double tau_base, double margin) {
  const int period = GaitPeriod(gait);
  const long horizon = static_cast<long>(plan.horizon());
  constexpr int kSamplesPerSlot = 16;
  for (int f = 0; f < kNumFeet; ++f) {
    for (long t = 0; t < horizon; ++t) {
      if (plan.goal(f, t).indicator != 1) continue;
      const Vec2& foot = plan.goal(f, t).point;
      for (int k = 0; k <= kSamplesPerSlot; ++k) {
        const double slot = t + static_cast<double>(k) / kSamplesPerSlot;
        const Pose2 ref = ReferencePose(params, period, start, slot);
        const double reach = (foot - ref.Apply(layout.hips[f])).norm();
        if (reach > layout.r_leg - margin) {
          std::ostringstream msg;
          msg << kFootNames[f] << " leaves its workspace at slot " << slot
              << " (" << reach << " m)";
          throw PlanInfeasibleError(msg.str());
        }
      }
    }
  }
  for (long t = 0; t < horizon; ++t) {
    std::array<bool, kNumFeet> active{};
    std::vector<Vec2> pts;
    for (int f = 0; f < kNumFeet; ++f) {
      active[f] = plan.goal(f, t).indicator == 1;
      if (active[f]) pts.push_back(plan.goal(f, t).point);
    }
    if (pts.empty()) {
      for (int f = 0; f < kNumFeet; ++f) pts.push_back(plan.goal(f, t).point);
    }
    const Pose2 ref = ReferencePose(params, period, start, t + 1.0);
    const Vec2 base = ref.Apply(SupportCentroidLocal(params, layout, active));
    if (!AchievedLocomotion(base, pts, tau_base - margin)) {
      std::ostringstream msg;
      msg << "reference path misses the advancement gate at slot " << t;
      throw PlanInfeasibleError(msg.str());
    }
  }
}

VelocityCommand VelocityToParams(double vx, double vy, double duration,
                                 int cycle_slots, double max_stride) {
  if (!(duration > 0.0)) {
    throw std::invalid_argument("VelocityToParams: duration must be > 0");
  }
  VelocityCommand cmd;
  const double speed = std::hypot(vx, vy);
  cmd.requested_stride = speed * cycle_slots * duration;
  cmd.stride_capped = cmd.requested_stride > max_stride;
  const double stride = std::min(cmd.requested_stride, max_stride);
  cmd.params.stride_len = {stride, stride};
  cmd.params.stance_width = {0.2, 0.2};
  cmd.params.mode = PathMode::kHeading;
  cmd.params.heading = speed > 0.0 ? std::atan2(vy, vx) : 0.0;
  cmd.params.duration = duration;
  return cmd;
}

}  // namespace cerl
