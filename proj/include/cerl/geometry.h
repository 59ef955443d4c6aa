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

#ifndef CERL_GEOMETRY_H_
#define CERL_GEOMETRY_H_

#include <cmath>
#include <numbers>

#include <Eigen/Core>

namespace cerl {

using Vec2 = Eigen::Vector2d;

// Wraps an angle to (-pi, pi].
inline double WrapAngle(double a) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double w = std::fmod(a, kTwoPi);
  if (w <= -std::numbers::pi) w += kTwoPi;
  if (w > std::numbers::pi) w -= kTwoPi;
  return w;
}

inline Vec2 Rotate(double theta, const Vec2& v) {
  const double c = std::cos(theta), s = std::sin(theta);
  return {c * v.x() - s * v.y(), s * v.x() + c * v.y()};
}

// Planar rigid transform: position in world plus heading.
struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Vec2 position() const { return {x, y}; }

  // Maps a point from this frame into the parent frame.
  Vec2 Apply(const Vec2& local) const { return position() + Rotate(theta, local); }

  // Maps a parent-frame point into this frame.
  Vec2 ApplyInverse(const Vec2& world) const {
    return Rotate(-theta, world - position());
  }

  Pose2 Compose(const Pose2& other) const {
    const Vec2 p = Apply(other.position());
    return {p.x(), p.y(), WrapAngle(theta + other.theta)};
  }

  Pose2 Inverse() const {
    const Vec2 p = Rotate(-theta, -position());
    return {p.x(), p.y(), WrapAngle(-theta)};
  }
};

// Body-frame twist (vx, vy, omega).
struct Twist2 {
  double vx = 0.0;
  double vy = 0.0;
  double omega = 0.0;
};

// Exact SE(2) exponential of a body twist held for time t.
inline Pose2 ExpTwist(const Twist2& xi, double t) {
  const double th = xi.omega * t;
  double a, b;  // V = [[a, -b], [b, a]]
  if (std::abs(th) < 1e-9) {
    a = 1.0 - th * th / 6.0;
    b = 0.5 * th;
  } else {
    a = std::sin(th) / th;
    b = (1.0 - std::cos(th)) / th;
  }
  const double vx = xi.vx * t, vy = xi.vy * t;
  return {a * vx - b * vy, b * vx + a * vy, th};
}

// Inverse of ExpTwist for t = 1: the body twist carrying identity to `p`.
inline Twist2 LogPose(const Pose2& p) {
  const double th = p.theta;
  double a, b;
  if (std::abs(th) < 1e-9) {
    a = 1.0 - th * th / 6.0;
    b = 0.5 * th;
  } else {
    a = std::sin(th) / th;
    b = (1.0 - std::cos(th)) / th;
  }
  const double det = a * a + b * b;
  return {(a * p.x + b * p.y) / det, (-b * p.x + a * p.y) / det, th};
}

}  // namespace cerl

#endif  // CERL_GEOMETRY_H_
