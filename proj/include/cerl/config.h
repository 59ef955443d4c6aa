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

#ifndef CERL_CONFIG_H_
#define CERL_CONFIG_H_

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cerl/checkpoint.h"
#include "cerl/env.h"
#include "cerl/loco_env.h"
#include "cerl/manip_env.h"
#include "cerl/policy.h"
#include "cerl/ppo.h"
#include "cerl/reach_env.h"
#include "cerl/vec_env.h"

namespace cerl {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class EnvType { kLoco, kManip, kReach };

struct EvalSection {
  int episodes = 100;
  std::vector<double> vx = {-1.0, -0.75, -0.5, -0.25, 0.0, 0.25, 0.5, 0.75, 1.0};
  std::vector<double> vy = vx;
  std::vector<double> durations = {0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::vector<GaitType> gaits = {kAllGaits.begin(), kAllGaits.end()};
};

struct RunConfig {
  EnvType env_type = EnvType::kLoco;
  LocoEnvConfig loco;
  ManipEnvConfig manip;
  ReachEnvConfig reach;
  RewardConfig reward;
  PolicyArch policy;  // sizes and layout hash are filled from the env
  TrainConfig train;
  EvalSection eval;
  std::string output_dir = "runs/default";
  std::int64_t checkpoint_every = 0;  // env steps; 0 writes only the final one
  // Sequential collection regardless of CERL_THREADS.
  bool deterministic = true;

  void Validate() const;
};

// Strict parse: unknown keys anywhere raise ConfigError.
RunConfig RunConfigFromJson(const nlohmann::json& j);
RunConfig LoadRunConfig(const std::string& path);
// Every field with its effective value.
nlohmann::json ResolvedConfig(const RunConfig& c);
std::uint64_t ConfigDigest(const RunConfig& c);

const char* EnvTypeName(EnvType t);

// Environment instance seeded for index i of a run.
std::unique_ptr<Env> MakeEnv(const RunConfig& c, std::uint64_t seed);
VecEnv MakeVecEnv(const RunConfig& c);
// Policy architecture bound to the env's sizes and layout.
PolicyArch BoundArch(const RunConfig& c);

struct TrainOutcome {
  Checkpoint checkpoint;
  std::vector<IterationStats> stats;
};

// Builds the environments and the policy described by `c` and trains to
// train.total_steps, continuing from `resume` when given.
TrainOutcome RunTraining(const RunConfig& c,
                         const std::function<void(const IterationStats&,
                                                  const PpoTrainer&)>& on_iter = nullptr,
                         const Checkpoint* resume = nullptr);

}  // namespace cerl

#endif  // CERL_CONFIG_H_
