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

#ifndef CERL_ORACLE_H_
#define CERL_ORACLE_H_

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "cerl/env.h"
#include "cerl/loco_env.h"
#include "cerl/manip_env.h"
#include "cerl/random.h"

namespace cerl {

// Anything that maps the current environment to an action.
class Controller {
 public:
  virtual ~Controller() = default;
  virtual void Reset(std::uint64_t /*seed*/) {}
  virtual std::vector<double> Act(const Env& env, std::span<const double> obs) = 0;
};

// Scripted controller with privileged access to the plan. Follows the
// reference base path and places each foot exactly on its commanded point.
std::vector<double> LocoOracleAction(const LocoEnv& env);

// Grasps the commanded surface points and carries the object to the slot
// pose goal, arriving when the slot expires.
std::vector<double> ManipOracleAction(const ManipEnv& env);

// Ticks left, including the current one, before the active goal expires.
int StepsToExpiry(double s_remaining, double dt);

class OracleController : public Controller {
 public:
  std::vector<double> Act(const Env& env, std::span<const double> obs) override;
};

class ZeroController : public Controller {
 public:
  std::vector<double> Act(const Env& env, std::span<const double> obs) override;
};

// Uniform actions in [-1, 1]; contact intents flip with probability 1/2.
class RandomController : public Controller {
 public:
  explicit RandomController(std::uint64_t seed) : rng_(seed) {}
  void Reset(std::uint64_t seed) override { rng_ = Rng(seed); }
  std::vector<double> Act(const Env& env, std::span<const double> obs) override;

 private:
  Rng rng_;
};

}  // namespace cerl

#endif  // CERL_ORACLE_H_
