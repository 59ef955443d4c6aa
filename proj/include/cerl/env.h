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

#ifndef CERL_ENV_H_
#define CERL_ENV_H_

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cerl/reward.h"

namespace cerl {

class EnvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Per-step diagnostics shared by all environments.
struct StepInfo {
  RewardBreakdown breakdown;
  // Commanded indicator of the goal active during the step, and the actual
  // contact state after it; one entry per end-effector.
  std::vector<int> cmd_bits;
  std::vector<int> act_bits;
  // Contact established this step and the distance to the commanded point
  // at that moment.
  std::vector<int> contact_made;
  std::vector<double> make_error;
  int slip_events = 0;
  int impact_events = 0;
  bool advanced = false;
  bool bonus_fired = false;
  bool plan_exhausted = false;
  bool divergence = false;
};

struct StepResult {
  std::vector<double> obs;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

// Fixed-layout observation description; the hash is embedded in checkpoints.
struct ObsField {
  const char* name;
  int size;
};

std::uint64_t LayoutHash(const std::string& tag, std::span<const ObsField> fields);
int LayoutSize(std::span<const ObsField> fields);

class Env {
 public:
  virtual ~Env() = default;

  virtual int obs_size() const = 0;
  virtual int act_size() const = 0;
  virtual int num_effectors() const = 0;
  virtual std::uint64_t layout_hash() const = 0;
  virtual double dt() const = 0;

  virtual std::vector<double> Reset(std::uint64_t seed) = 0;
  virtual StepResult Step(std::span<const double> action) = 0;
  virtual std::vector<double> Observation() const = 0;

  virtual std::unique_ptr<Env> Clone() const = 0;
};

// Throws EnvError on size mismatch or non-finite entries; returns the action
// clamped to [-1, 1].
std::vector<double> CheckedAction(std::span<const double> action, int size);

}  // namespace cerl

#endif  // CERL_ENV_H_
