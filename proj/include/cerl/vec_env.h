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

#ifndef CERL_VEC_ENV_H_
#define CERL_VEC_ENV_H_

#include <cstdint>
#include <memory>
#include <vector>

#include "cerl/env.h"

namespace cerl {

struct BatchResult {
  std::vector<std::vector<double>> obs;
  std::vector<double> reward;
  std::vector<std::uint8_t> done;
  std::vector<StepInfo> info;
};

// Steps N independent environments. Output entry i is exactly what
// envs[i]->Step(actions[i]) returns; the worker count never changes results.
BatchResult BatchStep(std::span<const std::unique_ptr<Env>> envs,
                      std::span<const std::vector<double>> actions, int workers = 1);

// Worker count from the CERL_THREADS environment variable; 1 if unset.
int WorkersFromEnvironment();

// N environments with automatic reset. Each environment draws its episode
// seeds from its own stream, so results do not depend on batch composition.
class VecEnv {
 public:
  VecEnv(std::vector<std::unique_ptr<Env>> envs, std::uint64_t seed, int workers = 1);

  std::size_t size() const { return envs_.size(); }
  int obs_size() const { return envs_.front()->obs_size(); }
  int act_size() const { return envs_.front()->act_size(); }
  std::uint64_t layout_hash() const { return envs_.front()->layout_hash(); }

  const std::vector<std::vector<double>>& Reset();
  // When an environment finishes, its entry in the returned obs is the first
  // observation of the next episode; done marks the boundary.
  const BatchResult& Step(std::span<const std::vector<double>> actions);

  const std::vector<std::vector<double>>& observations() const { return obs_; }
  Env& env(std::size_t i) { return *envs_[i]; }
  const Env& env(std::size_t i) const { return *envs_[i]; }

 private:
  std::uint64_t NextSeed(std::size_t i);

  std::vector<std::unique_ptr<Env>> envs_;
  std::uint64_t seed_;
  int workers_;
  std::vector<std::uint64_t> episodes_;
  std::vector<std::vector<double>> obs_;
  BatchResult last_;
};

}  // namespace cerl

#endif  // CERL_VEC_ENV_H_
