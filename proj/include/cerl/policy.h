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

#ifndef CERL_POLICY_H_
#define CERL_POLICY_H_

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

namespace cerl {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PolicyArch {
  int obs_size = 0;
  int act_size = 0;
  std::vector<int> hidden = {64, 64};
  bool recurrent = false;
  int gru_size = 32;
  double init_log_std = -0.5;
  std::uint64_t layout_hash = 0;

  void Validate() const;
  int hidden_state_size() const { return recurrent ? gru_size : 0; }
};

void to_json(nlohmann::json& j, const PolicyArch& a);
void from_json(const nlohmann::json& j, PolicyArch& a);

struct TensorInfo {
  std::string name;
  int rows = 0;
  int cols = 0;
  std::size_t offset = 0;
};

// Running mean/variance of observations (parallel Welford merge).
struct ObsNormalizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd var;
  std::uint64_t count = 0;

  void Init(int size);
  void Update(const Eigen::MatrixXd& batch);  // columns are samples
  Eigen::MatrixXd Apply(const Eigen::MatrixXd& obs) const;
};

// Gradient of a per-step loss with respect to the network heads.
struct HeadGrad {
  Eigen::MatrixXd dmean;      // act x B
  Eigen::RowVectorXd dvalue;  // 1 x B
  Eigen::VectorXd dlog_std;   // act
};

// Per-step loss callback: receives the head outputs at time t and fills
// their gradients. Returns the loss contribution.
using HeadLoss = std::function<double(int t, const Eigen::MatrixXd& mean,
                                      const Eigen::RowVectorXd& value,
                                      const Eigen::VectorXd& log_std, HeadGrad* g)>;

// B parallel sequences of length T. keep[t](b) = 0 resets the hidden state
// of sequence b before step t.
struct SequenceInput {
  std::vector<Eigen::MatrixXd> obs;  // T entries, obs x B (normalized)
  std::vector<Eigen::RowVectorXd> keep;
  Eigen::MatrixXd h0;                // gru x B (empty if feed-forward)
};

// Diagonal Gaussian actor and a value critic, both MLPs with tanh hidden
// layers, optionally reading the state of a GRU cell run on the observation.
// Parameters live in one flat vector; tensors are views into it.
class Policy {
 public:
  Policy() = default;
  Policy(PolicyArch arch, std::uint64_t seed);

  struct Output {
    Eigen::MatrixXd mean;
    Eigen::RowVectorXd value;
    Eigen::MatrixXd hidden;
  };

  // obs is normalized, columns are samples. hidden' == hidden when the
  // recurrent cell is off.
  Output Forward(const Eigen::MatrixXd& obs, const Eigen::MatrixXd& hidden) const;

  // Total loss over the sequence; accumulates d loss / d params into grad
  // (resized and zeroed here) when it is not null.
  double Evaluate(const SequenceInput& in, const HeadLoss& head,
                  std::vector<double>* grad) const;

  const PolicyArch& arch() const { return arch_; }
  const std::vector<TensorInfo>& tensors() const { return tensors_; }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }
  Eigen::VectorXd log_std() const;
  ObsNormalizer& normalizer() { return normalizer_; }
  const ObsNormalizer& normalizer() const { return normalizer_; }

  // Throws CheckpointError when the environment layout differs.
  void CheckLayout(std::uint64_t layout_hash) const;
  // Rounds every parameter and normalizer statistic to float32.
  void Quantize();

 private:
  const TensorInfo& Tensor(const std::string& name) const;
  Eigen::Map<const Eigen::MatrixXd> View(const TensorInfo& t) const;

  PolicyArch arch_;
  std::vector<TensorInfo> tensors_;
  std::vector<double> params_;
  ObsNormalizer normalizer_;
  // Indices into tensors_.
  std::vector<int> actor_, critic_;
  int gru_wx_ = -1, gru_wh_ = -1, gru_bx_ = -1, gru_bh_ = -1, log_std_ = -1;
};

// log N(u; mean, exp(log_std)) summed over action dimensions, per column.
Eigen::RowVectorXd GaussianLogProb(const Eigen::MatrixXd& u, const Eigen::MatrixXd& mean,
                                   const Eigen::VectorXd& log_std);
// Entropy of the diagonal Gaussian before squashing.
double GaussianEntropy(const Eigen::VectorXd& log_std);
// log-probability of the squashed action a = tanh(u).
Eigen::RowVectorXd SquashedLogProb(const Eigen::MatrixXd& u, const Eigen::MatrixXd& mean,
                                   const Eigen::VectorXd& log_std);

}  // namespace cerl

#endif  // CERL_POLICY_H_
