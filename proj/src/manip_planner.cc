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

#include "cerl/manip_planner.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "cerl/random.h"

namespace cerl {
namespace {

constexpr double kPi = std::numbers::pi;

double FaceAngle(const ObjectSpec& spec, int face) {
  const int n = spec.shape == ObjectShape::kBox ? 4 : spec.sides;
  return 2.0 * kPi * face / n;
}

double FaceDistance(const ObjectSpec& spec, int face) {
  if (spec.shape == ObjectShape::kBox) {
    return face % 2 == 0 ? spec.half_extents.x() : spec.half_extents.y();
  }
  return spec.apothem + spec.corner_radius;
}

double FaceHalfLength(const ObjectSpec& spec, int face) {
  if (spec.shape == ObjectShape::kBox) {
    return face % 2 == 0 ? spec.half_extents.y() : spec.half_extents.x();
  }
  return spec.apothem * std::tan(kPi / spec.sides);
}

void CheckContact(const ObjectSpec& spec, const SurfaceContact& c) {
  if (spec.shape == ObjectShape::kDisc) {
    if (c.face != -1 || !std::isfinite(c.param)) {
      throw std::invalid_argument("disc contacts use face -1 and a rim angle");
    }
    return;
  }
  if (c.face < 0 || c.face >= spec.num_faces()) {
    throw std::invalid_argument("surface contact: invalid face id");
  }
  if (!(std::abs(c.param) <= FaceHalfLength(spec, c.face))) {
    throw std::invalid_argument("surface contact: offset outside the face");
  }
}

Vec2 Unit(double a) { return {std::cos(a), std::sin(a)}; }

double UniformIn(Rng& rng, const Range& r) { return rng.Uniform(r.lo, r.hi); }

}  // namespace

const char* ShapeName(ObjectShape shape) {
  switch (shape) {
    case ObjectShape::kBox:
      return "box";
    case ObjectShape::kDisc:
      return "disc";
    case ObjectShape::kRoundedPolygon:
      return "rounded_polygon";
  }
  return "?";
}

ObjectShape ShapeFromName(const std::string& name) {
  for (auto s : {ObjectShape::kBox, ObjectShape::kDisc,
                 ObjectShape::kRoundedPolygon}) {
    if (name == ShapeName(s)) return s;
  }
  throw std::invalid_argument("unknown object shape '" + name + "'");
}

int ObjectSpec::num_faces() const {
  switch (shape) {
    case ObjectShape::kBox:
      return 4;
    case ObjectShape::kDisc:
      return 0;
    case ObjectShape::kRoundedPolygon:
      return sides;
  }
  return 0;
}

void ObjectSpec::Validate() const {
  switch (shape) {
    case ObjectShape::kBox:
      if (!(half_extents.x() > 0.0 && half_extents.y() > 0.0)) {
        throw std::invalid_argument("box half extents must be positive");
      }
      break;
    case ObjectShape::kDisc:
      if (!(radius > 0.0)) throw std::invalid_argument("disc radius must be > 0");
      break;
    case ObjectShape::kRoundedPolygon:
      if (sides < 3 || !(apothem > 0.0) || !(corner_radius >= 0.0)) {
        throw std::invalid_argument("rounded polygon needs >= 3 sides, apothem > 0");
      }
      break;
  }
}

ObjectSpec ObjectSpec::Box(double hx, double hy) {
  ObjectSpec s;
  s.shape = ObjectShape::kBox;
  s.half_extents = {hx, hy};
  return s;
}

ObjectSpec ObjectSpec::Disc(double r) {
  ObjectSpec s;
  s.shape = ObjectShape::kDisc;
  s.radius = r;
  return s;
}

ObjectSpec ObjectSpec::RoundedPolygon(int sides, double apothem, double corner) {
  ObjectSpec s;
  s.shape = ObjectShape::kRoundedPolygon;
  s.sides = sides;
  s.apothem = apothem;
  s.corner_radius = corner;
  return s;
}

Vec2 SurfaceNormalLocal(const ObjectSpec& spec, const SurfaceContact& contact) {
  CheckContact(spec, contact);
  if (spec.shape == ObjectShape::kDisc) return Unit(contact.param);
  return Unit(FaceAngle(spec, contact.face));
}

Vec2 SurfacePointLocal(const ObjectSpec& spec, const SurfaceContact& contact) {
  CheckContact(spec, contact);
  if (spec.shape == ObjectShape::kDisc) return spec.radius * Unit(contact.param);
  const double a = FaceAngle(spec, contact.face);
  const Vec2 n = Unit(a);
  const Vec2 t(-n.y(), n.x());
  return FaceDistance(spec, contact.face) * n + contact.param * t;
}

Vec2 SurfacePoint(const ObjectSpec& spec, const Pose2& pose,
                  const SurfaceContact& contact) {
  return pose.Apply(SurfacePointLocal(spec, contact));
}

double SignedDistanceLocal(const ObjectSpec& spec, const Vec2& p) {
  switch (spec.shape) {
    case ObjectShape::kBox: {
      const Vec2 q = p.cwiseAbs() - spec.half_extents;
      return q.cwiseMax(0.0).norm() + std::min(std::max(q.x(), q.y()), 0.0);
    }
    case ObjectShape::kDisc:
      return p.norm() - spec.radius;
    case ObjectShape::kRoundedPolygon: {
      // Exact distance to the inner regular polygon, then dilate.
      const int n = spec.sides;
      const double sector = 2.0 * kPi / n;
      const double ang = std::atan2(p.y(), p.x());
      const int k = static_cast<int>(std::lround(ang / sector));
      const Vec2 q = Rotate(-k * sector, p);  // face normal now along +x
      const double half = spec.apothem * std::tan(kPi / n);
      const double dx = q.x() - spec.apothem;
      const double dy = std::abs(q.y()) - half;
      // Inside the sector, |q.y| > half implies q.x > apothem (outside).
      const double inner = dy <= 0.0 ? dx : std::hypot(dx, dy);
      return inner - spec.corner_radius;
    }
  }
  return 0.0;
}

std::array<SurfaceContact, 2> SelectGrasp(const ObjectSpec& spec,
                                          const Pose2& pose) {
  if (spec.shape == ObjectShape::kDisc) {
    return {SurfaceContact{-1, WrapAngle(kPi / 2 - pose.theta)},
            SurfaceContact{-1, WrapAngle(-kPi / 2 - pose.theta)}};
  }
  std::array<SurfaceContact, 2> out;
  const std::array<Vec2, 2> axes = {Vec2(0.0, 1.0), Vec2(0.0, -1.0)};
  for (int h = 0; h < 2; ++h) {
    int best = -1;
    double best_dot = -2.0;
    for (int f = 0; f < spec.num_faces(); ++f) {
      if (h == 1 && f == out[0].face) continue;
      const double d = Rotate(pose.theta, Unit(FaceAngle(spec, f))).dot(axes[h]);
      if (d > best_dot + 1e-9) {
        best_dot = d;
        best = f;
      }
    }
    out[h] = {best, 0.0};
  }
  return out;
}

nlohmann::json ManipPlanToJson(const ManipPlan& plan) {
  nlohmann::json j = PlanToJson(plan.plan);
  nlohmann::json goals = nlohmann::json::array();
  for (const auto& g : plan.pose_goals) goals.push_back({g.x, g.y, g.theta});
  j["pose_goals"] = std::move(goals);
  nlohmann::json slots = nlohmann::json::array();
  for (std::size_t t = 0; t < plan.slot_goals.size(); ++t) {
    const auto& g = plan.slot_goals[t];
    slots.push_back({{"pose", {g.x, g.y, g.theta}},
                     {"faces", {plan.contacts[t][0].face, plan.contacts[t][1].face}},
                     {"params",
                      {plan.contacts[t][0].param, plan.contacts[t][1].param}}});
  }
  j["slots"] = std::move(slots);
  return j;
}

ManipPlan ReposePlan(const ObjectSpec& spec, const Pose2& start, int n_targets,
                     const PoseRanges& ranges, std::uint64_t seed,
                     const TableBounds& table) {
  if (n_targets < 1) throw std::invalid_argument("ReposePlan: n_targets >= 1");
  spec.Validate();
  for (const Range& r : {ranges.x, ranges.y}) {
    if (std::max(std::abs(start.x) + std::max(std::abs(r.lo), std::abs(r.hi)),
                 std::abs(start.y) + std::max(std::abs(r.lo), std::abs(r.hi))) >
        table.half_size) {
      throw PlanInfeasibleError("ReposePlan: pose ranges leave the table");
    }
  }
  Rng rng(seed);
  ManipPlan mp;
  const auto grasp = SelectGrasp(spec, start);
  std::vector<std::vector<ContactGoal>> goals(2);
  auto push = [&](const Pose2& goal, int indicator, double duration) {
    for (int h = 0; h < 2; ++h) {
      goals[h].push_back({SurfacePoint(spec, goal, grasp[h]), indicator, duration});
    }
    mp.contacts.push_back(grasp);
    mp.slot_goals.push_back(goal);
  };
  push(start, 0, rng.Uniform(kManipDurationLo, kManipDurationHi));
  for (int k = 0; k < n_targets; ++k) {
    Pose2 g;
    g.x = start.x + UniformIn(rng, ranges.x);
    g.y = start.y + UniformIn(rng, ranges.y);
    g.theta = WrapAngle(start.theta + UniformIn(rng, ranges.yaw));
    mp.pose_goals.push_back(g);
    push(g, 1, rng.Uniform(kManipDurationLo, kManipDurationHi));
  }
  mp.plan = ContactPlan({"left_hand", "right_hand"}, std::move(goals));
  return mp;
}

ManipPlan ReorientPlan(const ObjectSpec& spec, const Pose2& start,
                       int n_rotations, std::uint64_t seed) {
  if (n_rotations < 1) throw std::invalid_argument("ReorientPlan: n_rotations >= 1");
  spec.Validate();
  Rng rng(seed);
  ManipPlan mp;
  std::vector<std::vector<ContactGoal>> goals(2);
  auto push = [&](const Pose2& goal, const Pose2& at,
                  const std::array<SurfaceContact, 2>& grasp, int indicator) {
    const double duration = rng.Uniform(kManipDurationLo, kManipDurationHi);
    for (int h = 0; h < 2; ++h) {
      goals[h].push_back({SurfacePoint(spec, at, grasp[h]), indicator, duration});
    }
    mp.contacts.push_back(grasp);
    mp.slot_goals.push_back(goal);
  };
  Pose2 before = start;
  for (int k = 1; k <= n_rotations; ++k) {
    Pose2 after = start;
    after.theta = WrapAngle(start.theta + k * kPi / 4.0);
    mp.pose_goals.push_back(after);
    const auto grasp = SelectGrasp(spec, before);
    // Detach slots already point at the next grasp so the lookahead window
    // always carries the upcoming contact.
    const auto next = k < n_rotations ? SelectGrasp(spec, after) : grasp;
    push(before, before, grasp, 0);
    push(after, before, grasp, 1);
    push(after, after, next, 0);
    before = after;
  }
  mp.plan = ContactPlan({"left_hand", "right_hand"}, std::move(goals));
  return mp;
}

}  // namespace cerl
