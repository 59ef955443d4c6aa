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

#include "cerl/vec_env.h"

#include <algorithm>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>

#include "cerl/random.h"

namespace cerl {

BatchResult BatchStep(std::span<const std::unique_ptr<Env>> envs,
                      std::span<const std::vector<double>> actions, int workers) {
  const std::size_t n = envs.size();
  if (n == 0) throw std::invalid_argument("batch_step needs at least one environment");
  if (actions.size() != n) {
    throw std::invalid_argument("batch_step: " + std::to_string(actions.size()) +
                                " actions for " + std::to_string(n) + " environments");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (static_cast<int>(actions[i].size()) != envs[i]->act_size()) {
      throw std::invalid_argument("batch_step: ragged action at index " +
                                  std::to_string(i));
    }
  }
  BatchResult out;
  out.obs.resize(n);
  out.reward.resize(n);
  out.done.resize(n);
  out.info.resize(n);
  auto run = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      StepResult r = envs[i]->Step(actions[i]);
      out.obs[i] = std::move(r.obs);
      out.reward[i] = r.reward;
      out.done[i] = r.done;
      out.info[i] = std::move(r.info);
    }
  };
  const std::size_t w = std::clamp<std::size_t>(workers, 1, n);
  if (w == 1) {
    run(0, n);
    return out;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(w);
  for (std::size_t k = 0; k < w; ++k) {
    pool.emplace_back([&, k] {
      try {
        run(n * k / w, n * (k + 1) / w);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

int WorkersFromEnvironment() {
  const char* v = std::getenv("CERL_THREADS");
  if (v == nullptr) return 1;
  const int n = std::atoi(v);
  return n > 0 ? n : 1;
}

VecEnv::VecEnv(std::vector<std::unique_ptr<Env>> envs, std::uint64_t seed, int workers)
    : envs_(std::move(envs)), seed_(seed), workers_(workers) {
  if (envs_.empty()) throw std::invalid_argument("VecEnv needs at least one environment");
  for (const auto& e : envs_) {
    if (e->obs_size() != envs_.front()->obs_size() ||
        e->act_size() != envs_.front()->act_size() ||
        e->layout_hash() != envs_.front()->layout_hash()) {
      throw std::invalid_argument("VecEnv environments must share one layout");
    }
  }
  episodes_.assign(envs_.size(), 0);
  Reset();
}

std::uint64_t VecEnv::NextSeed(std::size_t i) {
  std::uint64_t h = Rng::SplitMix(seed_ ^ Rng::SplitMix(i + 1));
  h = Rng::SplitMix(h ^ episodes_[i]++);
  return h;
}

const std::vector<std::vector<double>>& VecEnv::Reset() {
  obs_.resize(envs_.size());
  for (std::size_t i = 0; i < envs_.size(); ++i) obs_[i] = envs_[i]->Reset(NextSeed(i));
  return obs_;
}

const BatchResult& VecEnv::Step(std::span<const std::vector<double>> actions) {
  last_ = BatchStep(envs_, actions, workers_);
  for (std::size_t i = 0; i < envs_.size(); ++i) {
    if (last_.done[i]) last_.obs[i] = envs_[i]->Reset(NextSeed(i));
  }
  obs_ = last_.obs;
  return last_;
}

}  // namespace cerl
