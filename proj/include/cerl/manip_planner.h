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

#ifndef CERL_MANIP_PLANNER_H_
#define CERL_MANIP_PLANNER_H_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "cerl/contact.h"
#include "cerl/gait_planner.h"
#include "cerl/geometry.h"

namespace cerl {

enum class ObjectShape { kBox, kDisc, kRoundedPolygon };

const char* ShapeName(ObjectShape shape);
ObjectShape ShapeFromName(const std::string& name);

// Planar object. Box faces are numbered +x, +y, -x, -y (outward normals at
// multiples of pi/2). A rounded polygon is a regular `sides`-gon with inner
// apothem `apothem` dilated by `corner_radius`; face i has its normal at
// 2*pi*i/sides. A disc has no faces and is contacted by rim angle.
struct ObjectSpec {
  ObjectShape shape = ObjectShape::kBox;
  Vec2 half_extents = Vec2(0.1, 0.1);
  double radius = 0.1;
  int sides = 6;
  double apothem = 0.07;
  double corner_radius = 0.02;

  int num_faces() const;
  void Validate() const;

  static ObjectSpec Box(double hx, double hy);
  static ObjectSpec Disc(double r);
  static ObjectSpec RoundedPolygon(int sides, double apothem, double corner);
};

struct SurfaceContact {
  // Face id, or -1 for a disc rim contact.
  int face = 0;
  // Offset along the face tangent (m), or rim angle (rad) for discs.
  double param = 0.0;

  bool operator==(const SurfaceContact&) const = default;
};

// Outward normal of a face (or rim point) in the object frame.
Vec2 SurfaceNormalLocal(const ObjectSpec& spec, const SurfaceContact& contact);
Vec2 SurfacePointLocal(const ObjectSpec& spec, const SurfaceContact& contact);
Vec2 SurfacePoint(const ObjectSpec& spec, const Pose2& pose,
                  const SurfaceContact& contact);

// Signed distance of an object-frame point to the boundary (negative inside).
double SignedDistanceLocal(const ObjectSpec& spec, const Vec2& p);

// Contacts whose world normals best align with the hands' approach axes:
// hand 0 approaches from +y, hand 1 from -y. Ties resolve to the lower face.
std::array<SurfaceContact, 2> SelectGrasp(const ObjectSpec& spec,
                                          const Pose2& pose);

struct PoseRanges {
  Range x = {0.0, 0.1};
  Range y = {-0.15, 0.15};
  Range yaw = {-0.6, 0.6};

  static PoseRanges Trained() { return {}; }
  static PoseRanges Evaluated() { return {{0.0, 0.2}, {-0.3, 0.3}, {-1.2, 1.2}}; }
};

struct TableBounds {
  double half_size = 0.6;
};

struct ManipPlan {
  ContactPlan plan;
  // Per slot: the surface contact each hand targets.
  std::vector<std::array<SurfaceContact, 2>> contacts;
  // Per slot: the object pose goal in force during that slot.
  std::vector<Pose2> slot_goals;
  // Distinct pose targets in order.
  std::vector<Pose2> pose_goals;
};

nlohmann::json ManipPlanToJson(const ManipPlan& plan);

inline constexpr double kManipDurationLo = 1.0;
inline constexpr double kManipDurationHi = 1.5;

// One reach slot followed by n_targets hold slots on opposing faces; pose
// goals are offsets from the start pose drawn from `ranges`.
ManipPlan ReposePlan(const ObjectSpec& spec, const Pose2& start, int n_targets,
                     const PoseRanges& ranges, std::uint64_t seed,
                     const TableBounds& table = {});

// Per rotation: reach, hold (goal advances by pi/4), detach. Grasp faces are
// reselected from the object pose at the start of each rotation.
ManipPlan ReorientPlan(const ObjectSpec& spec, const Pose2& start,
                       int n_rotations, std::uint64_t seed);

}  // namespace cerl

#endif  // CERL_MANIP_PLANNER_H_
