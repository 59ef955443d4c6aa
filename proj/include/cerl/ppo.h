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

#ifndef CERL_PPO_H_
#define CERL_PPO_H_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "cerl/oracle.h"
#include "cerl/policy.h"
#include "cerl/random.h"
#include "cerl/reward.h"
#include "cerl/vec_env.h"

namespace cerl {

class TrainAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainConfig {
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip = 0.2;
  int epochs = 5;
  int minibatches = 4;
  double learning_rate = 3e-4;
  double entropy_start = 0.01;
  double entropy_end = 0.001;
  double value_coef = 0.5;
  double max_grad_norm = 1.0;
  std::int64_t total_steps = 1'000'000;
  int num_envs = 256;
  int rollout_len = 24;
  // Rewards are multiplied by this before advantage estimation.
  double reward_scale = 1.0;
  std::uint64_t seed = 0;

  void Validate() const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

// Linear start -> end over total_steps, clamped at both ends.
double EntropySchedule(std::int64_t step, const TrainConfig& cfg);

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

// values has one more entry than rewards (the bootstrap value). done[t]
// cuts propagation from t+1 into t.
GaeResult Gae(std::span<const double> rewards, std::span<const double> values,
              std::span<const std::uint8_t> dones, double gamma, double lambda);

// Rollout of N environments over T steps. Column b of every matrix is
// environment b.
struct RolloutBatch {
  int T = 0;
  int N = 0;
  std::vector<Eigen::MatrixXd> obs;          // normalized, obs x N
  std::vector<Eigen::MatrixXd> u;            // pre-squash actions, act x N
  std::vector<Eigen::RowVectorXd> logp;      // pre-squash Gaussian log-prob
  std::vector<Eigen::RowVectorXd> value;
  std::vector<Eigen::RowVectorXd> reward;    // scaled
  std::vector<Eigen::RowVectorXd> done;
  Eigen::RowVectorXd last_value;
  Eigen::MatrixXd h0;
  std::vector<Eigen::RowVectorXd> advantages;
  std::vector<Eigen::RowVectorXd> returns;

  void ComputeAdvantages(double gamma, double lambda);
};

struct LossStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
  int samples = 0;
};

struct LossCoefs {
  double clip = 0.2;
  double value_coef = 0.5;
  double entropy_coef = 0.01;
};

// Clipped surrogate + value + entropy loss on the given environment columns
// of the batch, advantages normalized over the selection.
double PpoLoss(const Policy& policy, const RolloutBatch& batch,
               std::span<const int> columns, const LossCoefs& coefs,
               std::vector<double>* grad, LossStats* stats);

// max_i |g_i - g^_i| / max(1e-8, |g_i| + |g^_i|) with central differences.
double FiniteDiffCheck(const std::vector<double>& params,
                       const std::function<double(const std::vector<double>&)>& loss,
                       const std::vector<double>& analytic, double epsilon = 1e-5);

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t t = 0;
};

struct IterationStats {
  std::int64_t step = 0;
  double mean_reward = 0.0;
  RewardBreakdown breakdown;  // per-step means
  double entropy_coef = 0.0;
  LossStats loss;
  int episodes = 0;
};

// Collects rollouts from a VecEnv and runs clipped PPO updates.
class PpoTrainer {
 public:
  PpoTrainer(const TrainConfig& cfg, Policy policy, VecEnv* envs);

  IterationStats Iterate();
  // Runs until total_steps; `on_iter` sees every iteration's stats.
  void Train(const std::function<void(const IterationStats&)>& on_iter = nullptr);

  const Policy& policy() const { return policy_; }
  Policy& policy() { return policy_; }
  const AdamState& adam() const { return adam_; }
  void set_adam(AdamState a) { adam_ = std::move(a); }
  std::int64_t env_steps() const { return env_steps_; }
  void set_env_steps(std::int64_t s) { env_steps_ = s; }
  const TrainConfig& config() const { return cfg_; }

 private:
  RolloutBatch Collect(IterationStats* stats);
  void Update(const RolloutBatch& batch, IterationStats* stats);

  TrainConfig cfg_;
  Policy policy_;
  VecEnv* envs_;
  AdamState adam_;
  Rng rng_;
  std::int64_t env_steps_ = 0;
  Eigen::MatrixXd hidden_;
};

// Training log in CSV form.
void WriteLogHeader(std::ostream& os);
void WriteLogRow(std::ostream& os, const IterationStats& s);

// Deterministic action of the policy: tanh of the mean.
class PolicyController : public Controller {
 public:
  explicit PolicyController(const Policy* policy);
  void Reset(std::uint64_t seed) override;
  std::vector<double> Act(const Env& env, std::span<const double> obs) override;

 private:
  const Policy* policy_;
  Eigen::MatrixXd hidden_;
};

}  // namespace cerl

#endif  // CERL_PPO_H_
