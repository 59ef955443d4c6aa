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

#include "cerl/policy.h"

#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "cerl/ppo.h"
#include "cerl/random.h"

namespace cerl {
namespace {

using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

PolicyArch Tiny(bool recurrent = false) {
  PolicyArch a;
  a.obs_size = 2;
  a.act_size = 2;
  a.hidden = {2};
  a.recurrent = recurrent;
  a.gru_size = 3;
  a.layout_hash = 42;
  return a;
}

void SetTensor(Policy& p, const std::string& name, const std::vector<double>& col_major) {
  for (const TensorInfo& t : p.tensors()) {
    if (t.name != name) continue;
    ASSERT_EQ(col_major.size(), static_cast<std::size_t>(t.rows * t.cols));
    for (std::size_t i = 0; i < col_major.size(); ++i) p.params()[t.offset + i] = col_major[i];
    return;
  }
  FAIL() << "no tensor " << name;
}

TEST(PolicyTest, ZeroWeightsGiveZeroOutputs) {
  Policy p(Tiny(), 1);
  for (double& x : p.params()) x = 0.0;
  const auto out = p.Forward(MatrixXd::Random(2, 5), MatrixXd());
  EXPECT_EQ(out.mean.norm(), 0.0);
  EXPECT_EQ(out.value.norm(), 0.0);
}

TEST(PolicyTest, FeedForwardPassesHiddenThrough) {
  Policy p(Tiny(), 1);
  const MatrixXd h = MatrixXd::Random(4, 3);
  const auto out = p.Forward(MatrixXd::Random(2, 3), h);
  EXPECT_EQ(out.hidden, h);
}

TEST(PolicyTest, HandComputedForwardPass) {
  Policy p(Tiny(), 1);
  // W0 = [[1, 2], [3, 4]], b0 = [0.1, -0.1], W1 = [[1, -1], [0.5, 2]], b1 = [0, 1].
  SetTensor(p, "actor.l0.w", {1.0, 3.0, 2.0, 4.0});
  SetTensor(p, "actor.l0.b", {0.1, -0.1});
  SetTensor(p, "actor.l1.w", {1.0, 0.5, -1.0, 2.0});
  SetTensor(p, "actor.l1.b", {0.0, 1.0});
  SetTensor(p, "critic.l0.w", {1.0, 0.0, 0.0, 1.0});
  SetTensor(p, "critic.l0.b", {0.0, 0.0});
  SetTensor(p, "critic.l1.w", {2.0, -3.0});
  SetTensor(p, "critic.l1.b", {0.5});
  MatrixXd obs(2, 1);
  obs << 0.2, -0.3;
  const auto out = p.Forward(obs, MatrixXd());
  const double h0 = std::tanh(1.0 * 0.2 + 2.0 * -0.3 + 0.1);
  const double h1 = std::tanh(3.0 * 0.2 + 4.0 * -0.3 - 0.1);
  EXPECT_NEAR(out.mean(0, 0), h0 - h1, 1e-15);
  EXPECT_NEAR(out.mean(1, 0), 0.5 * h0 + 2.0 * h1 + 1.0, 1e-15);
  EXPECT_NEAR(out.value(0), 2.0 * std::tanh(0.2) - 3.0 * std::tanh(-0.3) + 0.5, 1e-15);
}

TEST(PolicyTest, RecurrentStateChangesAndDependsOnHistory) {
  Policy p(Tiny(true), 3);
  const MatrixXd obs = MatrixXd::Random(2, 1);
  const auto a = p.Forward(obs, MatrixXd::Zero(3, 1));
  const auto b = p.Forward(obs, a.hidden);
  EXPECT_GT((a.hidden - MatrixXd::Zero(3, 1)).norm(), 0.0);
  EXPECT_GT((a.mean - b.mean).norm(), 0.0);
}

TEST(PolicyTest, InitialisationIsSeeded) {
  Policy a(Tiny(), 5), b(Tiny(), 5), c(Tiny(), 6);
  EXPECT_EQ(a.params(), b.params());
  EXPECT_NE(a.params(), c.params());
  EXPECT_DOUBLE_EQ(a.log_std()(0), -0.5);
}

TEST(PolicyTest, CheckLayoutRejectsMismatch) {
  Policy p(Tiny(), 1);
  EXPECT_NO_THROW(p.CheckLayout(42));
  EXPECT_THROW(p.CheckLayout(43), CheckpointError);
}

TEST(PolicyTest, QuantizeRoundsToFloat) {
  Policy p(Tiny(true), 1);
  p.normalizer().Init(2);
  p.normalizer().mean << 0.1, 0.2;
  p.Quantize();
  for (double x : p.params()) EXPECT_EQ(x, static_cast<double>(static_cast<float>(x)));
  EXPECT_EQ(p.normalizer().mean(0), static_cast<double>(0.1f));
}

TEST(PolicyTest, EvaluateGradientMatchesFiniteDifference) {
  for (bool recurrent : {false, true}) {
    Policy p(Tiny(recurrent), 9);
    Rng rng(2);
    SequenceInput in;
    for (int t = 0; t < 4; ++t) {
      in.obs.push_back(MatrixXd::Random(2, 3));
      RowVectorXd keep = RowVectorXd::Ones(3);
      if (t == 2) keep(1) = 0.0;
      in.keep.push_back(keep);
    }
    in.h0 = recurrent ? MatrixXd(MatrixXd::Random(3, 3)) : MatrixXd();
    const MatrixXd target = MatrixXd::Random(2, 3);
    const HeadLoss head = [&](int, const MatrixXd& mean, const RowVectorXd& value,
                              const VectorXd& log_std, HeadGrad* g) {
      const MatrixXd d = mean - target;
      if (g) {
        g->dmean = d;
        g->dvalue = 2.0 * value;
        g->dlog_std = VectorXd::Constant(log_std.size(), 0.3);
      }
      return 0.5 * d.squaredNorm() + value.squaredNorm() + 0.3 * log_std.sum();
    };
    std::vector<double> grad;
    p.Evaluate(in, head, &grad);
    Policy probe = p;
    const double err = FiniteDiffCheck(
        p.params(),
        [&](const std::vector<double>& x) {
          probe.params() = x;
          return probe.Evaluate(in, head, nullptr);
        },
        grad);
    EXPECT_LT(err, 1e-6) << "recurrent=" << recurrent;
  }
}

TEST(GaussianTest, LogProbIntegratesToOne) {
  const MatrixXd mean = MatrixXd::Constant(1, 1, 0.3);
  const VectorXd log_std = VectorXd::Constant(1, -0.7);
  const int n = 20000;
  const double lo = -6.0, hi = 6.0, h = (hi - lo) / n;
  double total = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
    const MatrixXd u = MatrixXd::Constant(1, 1, lo + i * h);
    total += w * std::exp(GaussianLogProb(u, mean, log_std)(0));
  }
  EXPECT_NEAR(total * h, 1.0, 1e-8);
}

TEST(GaussianTest, SquashedLogProbIntegratesToOne) {
  const MatrixXd mean = MatrixXd::Constant(1, 1, -0.4);
  const VectorXd log_std = VectorXd::Constant(1, -0.5);
  // Integrate over a in (-1, 1) by substituting a = tanh(u).
  const int n = 20000;
  const double lo = -8.0, hi = 8.0, h = (hi - lo) / n;
  double total = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double u = lo + i * h;
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
    const double da_du = 1.0 - std::tanh(u) * std::tanh(u);
    const MatrixXd um = MatrixXd::Constant(1, 1, u);
    total += w * std::exp(SquashedLogProb(um, mean, log_std)(0)) * da_du;
  }
  EXPECT_NEAR(total * h, 1.0, 1e-6);
}

TEST(GaussianTest, EntropyClosedForm) {
  const VectorXd log_std = (VectorXd(2) << -0.5, 0.25).finished();
  const double per_dim = 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e);
  EXPECT_NEAR(GaussianEntropy(log_std), 2.0 * per_dim - 0.25, 1e-15);
}

TEST(ObsNormalizerTest, MergedStatsEqualBatchStats) {
  ObsNormalizer n;
  n.Init(3);
  MatrixXd all(3, 0);
  Rng rng(8);
  for (int k = 0; k < 5; ++k) {
    MatrixXd b(3, 7 + k);
    for (int i = 0; i < b.size(); ++i) b(i) = rng.Normal() * (k + 1) + k;
    n.Update(b);
    MatrixXd grown(3, all.cols() + b.cols());
    grown << all, b;
    all = grown;
  }
  const VectorXd mean = all.rowwise().mean();
  const VectorXd var = (all.colwise() - mean).array().square().rowwise().mean();
  EXPECT_LT((n.mean - mean).norm(), 1e-12);
  EXPECT_LT((n.var - var).norm(), 1e-12);
  EXPECT_EQ(n.count, static_cast<std::uint64_t>(all.cols()));
  const MatrixXd z = n.Apply(all);
  EXPECT_LT(z.rowwise().mean().norm(), 1e-9);
  EXPECT_LE(n.Apply(MatrixXd::Constant(3, 1, 1e9)).maxCoeff(), 10.0);
}

TEST(PolicyArchTest, JsonRoundTripAndValidation) {
  PolicyArch a = Tiny(true);
  nlohmann::json j = a;
  const PolicyArch b = j.get<PolicyArch>();
  EXPECT_EQ(b.hidden, a.hidden);
  EXPECT_EQ(b.recurrent, a.recurrent);
  EXPECT_EQ(b.layout_hash, a.layout_hash);
  j["activation"] = "relu";
  EXPECT_ANY_THROW(j.get<PolicyArch>());
}

}  // namespace
}  // namespace cerl
