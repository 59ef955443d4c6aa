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

#include "cerl/ppo.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

#include "cerl/json_util.h"

namespace cerl {

using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

void TrainConfig::Validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("train.gamma in (0, 1]");
  if (!(gae_lambda > 0.0 && gae_lambda <= 1.0)) {
    throw std::invalid_argument("train.gae_lambda in (0, 1]");
  }
  if (!(clip > 0.0)) throw std::invalid_argument("train.clip must be > 0");
  if (epochs < 1 || minibatches < 1) {
    throw std::invalid_argument("train.epochs and train.minibatches must be >= 1");
  }
  if (!(learning_rate > 0.0)) throw std::invalid_argument("train.learning_rate > 0");
  if (entropy_start < 0.0 || entropy_end < 0.0) {
    throw std::invalid_argument("train entropy coefficients must be >= 0");
  }
  if (!(max_grad_norm > 0.0)) throw std::invalid_argument("train.max_grad_norm > 0");
  if (total_steps < 1 || num_envs < 1 || rollout_len < 1) {
    throw std::invalid_argument("train.total_steps, num_envs, rollout_len >= 1");
  }
  if (minibatches > num_envs) {
    throw std::invalid_argument("train.minibatches must not exceed num_envs");
  }
  if (!(reward_scale > 0.0)) throw std::invalid_argument("train.reward_scale > 0");
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = {{"gamma", c.gamma},
       {"gae_lambda", c.gae_lambda},
       {"clip", c.clip},
       {"epochs", c.epochs},
       {"minibatches", c.minibatches},
       {"learning_rate", c.learning_rate},
       {"entropy_start", c.entropy_start},
       {"entropy_end", c.entropy_end},
       {"value_coef", c.value_coef},
       {"max_grad_norm", c.max_grad_norm},
       {"total_steps", c.total_steps},
       {"num_envs", c.num_envs},
       {"rollout_len", c.rollout_len},
       {"reward_scale", c.reward_scale},
       {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  using json_util::Get;
  json_util::RejectUnknown(
      j,
      {"gamma", "gae_lambda", "clip", "epochs", "minibatches", "learning_rate",
       "entropy_start", "entropy_end", "value_coef", "max_grad_norm", "total_steps",
       "num_envs", "rollout_len", "reward_scale", "seed"},
      "train");
  Get(j, "gamma", c.gamma);
  Get(j, "gae_lambda", c.gae_lambda);
  Get(j, "clip", c.clip);
  Get(j, "epochs", c.epochs);
  Get(j, "minibatches", c.minibatches);
  Get(j, "learning_rate", c.learning_rate);
  Get(j, "entropy_start", c.entropy_start);
  Get(j, "entropy_end", c.entropy_end);
  Get(j, "value_coef", c.value_coef);
  Get(j, "max_grad_norm", c.max_grad_norm);
  Get(j, "total_steps", c.total_steps);
  Get(j, "num_envs", c.num_envs);
  Get(j, "rollout_len", c.rollout_len);
  Get(j, "reward_scale", c.reward_scale);
  Get(j, "seed", c.seed);
  c.Validate();
}

double EntropySchedule(std::int64_t step, const TrainConfig& cfg) {
  const double f = std::clamp(static_cast<double>(step) / cfg.total_steps, 0.0, 1.0);
  return cfg.entropy_start + (cfg.entropy_end - cfg.entropy_start) * f;
}

GaeResult Gae(std::span<const double> rewards, std::span<const double> values,
              std::span<const std::uint8_t> dones, double gamma, double lambda) {
  const std::size_t T = rewards.size();
  if (values.size() != T + 1 || dones.size() != T) {
    throw std::invalid_argument("gae: values needs T+1 entries and dones T");
  }
  GaeResult r;
  r.advantages.assign(T, 0.0);
  r.returns.assign(T, 0.0);
  double next = 0.0;
  for (std::size_t k = T; k-- > 0;) {
    const double keep = dones[k] ? 0.0 : 1.0;
    const double delta = rewards[k] + gamma * values[k + 1] * keep - values[k];
    next = delta + gamma * lambda * keep * next;
    r.advantages[k] = next;
    r.returns[k] = next + values[k];
  }
  return r;
}

void RolloutBatch::ComputeAdvantages(double gamma, double lambda) {
  advantages.assign(T, RowVectorXd::Zero(N));
  returns.assign(T, RowVectorXd::Zero(N));
  std::vector<double> r(T), v(T + 1);
  std::vector<std::uint8_t> d(T);
  for (int b = 0; b < N; ++b) {
    for (int t = 0; t < T; ++t) {
      r[t] = reward[t](b);
      v[t] = value[t](b);
      d[t] = done[t](b) != 0.0;
    }
    v[T] = last_value(b);
    const GaeResult g = Gae(r, v, d, gamma, lambda);
    for (int t = 0; t < T; ++t) {
      advantages[t](b) = g.advantages[t];
      returns[t](b) = g.returns[t];
    }
  }
}

double PpoLoss(const Policy& policy, const RolloutBatch& batch,
               std::span<const int> columns, const LossCoefs& coefs,
               std::vector<double>* grad, LossStats* stats) {
  const int T = batch.T;
  const int B = static_cast<int>(columns.size());
  const double M = static_cast<double>(T) * B;
  auto pick = [&](const auto& m) {
    std::decay_t<decltype(m)> out(m.rows(), B);
    for (int i = 0; i < B; ++i) out.col(i) = m.col(columns[i]);
    return out;
  };

  SequenceInput in;
  std::vector<MatrixXd> u(T);
  std::vector<RowVectorXd> logp_old(T), adv(T), ret(T);
  double sum = 0.0, sq = 0.0;
  for (int t = 0; t < T; ++t) {
    in.obs.push_back(pick(batch.obs[t]));
    RowVectorXd keep = RowVectorXd::Ones(B);
    if (t > 0) keep -= pick(batch.done[t - 1]);
    in.keep.push_back(keep);
    u[t] = pick(batch.u[t]);
    logp_old[t] = pick(batch.logp[t]);
    adv[t] = pick(batch.advantages[t]);
    ret[t] = pick(batch.returns[t]);
    sum += adv[t].sum();
    sq += adv[t].squaredNorm();
  }
  if (policy.arch().recurrent) in.h0 = pick(batch.h0);
  const double mean = sum / M;
  const double sd = std::sqrt(std::max(0.0, sq / M - mean * mean));
  for (auto& a : adv) a = ((a.array() - mean) / (sd + 1e-8)).matrix();

  LossStats st;
  st.samples = static_cast<int>(M);
  auto head = [&](int t, const MatrixXd& mu, const RowVectorXd& value,
                  const VectorXd& log_std, HeadGrad* g) {
    const RowVectorXd logp = GaussianLogProb(u[t], mu, log_std);
    const Eigen::ArrayXXd ratio = (logp - logp_old[t]).array().exp();
    const Eigen::ArrayXXd a = adv[t].array();
    const Eigen::ArrayXXd clipped = ratio.min(1.0 + coefs.clip).max(1.0 - coefs.clip);
    const Eigen::ArrayXXd surr = (ratio * a).min(clipped * a);
    const double pl = -surr.sum() / M;
    const Eigen::ArrayXXd verr = value.array() - ret[t].array();
    const double vl = 0.5 * verr.square().sum() / M;
    double loss = pl + coefs.value_coef * vl;
    const double ent = GaussianEntropy(log_std);
    if (t == 0) loss -= coefs.entropy_coef * ent;

    st.policy_loss += pl;
    st.value_loss += vl;
    st.entropy = ent;
    st.clip_fraction += ((ratio - 1.0).abs() > coefs.clip).cast<double>().sum() / M;
    st.approx_kl += ((ratio - 1.0) - ratio.log()).sum() / M;
    if (g == nullptr) return loss;

    // The unclipped branch is the active one unless the ratio has left the
    // trust region in the direction the advantage favours.
    const Eigen::ArrayXXd active =
        ((a >= 0.0 && ratio > 1.0 + coefs.clip) || (a < 0.0 && ratio < 1.0 - coefs.clip))
            .select(Eigen::ArrayXXd::Zero(1, B), Eigen::ArrayXXd::Ones(1, B));
    const RowVectorXd dlogp = (-(a * ratio * active) / M).matrix();
    const VectorXd inv_var = (-2.0 * log_std.array()).exp();
    const MatrixXd diff = u[t] - mu;
    g->dmean = (diff.array().colwise() * inv_var.array()).matrix();
    g->dmean = (g->dmean.array().rowwise() * dlogp.array()).matrix();
    const MatrixXd zsq = (diff.array().square().colwise() * inv_var.array()).matrix();
    g->dlog_std = (zsq.array() - 1.0).matrix() * dlogp.transpose();
    if (t == 0) g->dlog_std.array() -= coefs.entropy_coef;
    g->dvalue = (coefs.value_coef * verr / M).matrix();
    return loss;
  };
  const double loss = policy.Evaluate(in, head, grad);
  if (stats) *stats = st;
  return loss;
}

double FiniteDiffCheck(const std::vector<double>& params,
                       const std::function<double(const std::vector<double>&)>& loss,
                       const std::vector<double>& analytic, double epsilon) {
  if (analytic.size() != params.size()) {
    throw std::invalid_argument("finite_diff_check: gradient size mismatch");
  }
  std::vector<double> p = params;
  double worst = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double x = p[i];
    p[i] = x + epsilon;
    const double up = loss(p);
    p[i] = x - epsilon;
    const double dn = loss(p);
    p[i] = x;
    const double fd = (up - dn) / (2.0 * epsilon);
    const double err =
        std::abs(fd - analytic[i]) / std::max(1e-8, std::abs(fd) + std::abs(analytic[i]));
    worst = std::max(worst, err);
  }
  return worst;
}

PpoTrainer::PpoTrainer(const TrainConfig& cfg, Policy policy, VecEnv* envs)
    : cfg_(cfg), policy_(std::move(policy)), envs_(envs),
      rng_(Rng::SplitMix(cfg.seed ^ 0x70706fULL)) {
  cfg_.Validate();
  if (static_cast<int>(envs_->size()) != cfg_.num_envs) {
    throw std::invalid_argument("trainer: VecEnv size differs from train.num_envs");
  }
  policy_.CheckLayout(envs_->layout_hash());
  if (policy_.arch().obs_size != envs_->obs_size() ||
      policy_.arch().act_size != envs_->act_size()) {
    throw std::invalid_argument("trainer: policy and environment sizes differ");
  }
  adam_.m.assign(policy_.params().size(), 0.0);
  adam_.v.assign(policy_.params().size(), 0.0);
  hidden_ = MatrixXd::Zero(policy_.arch().hidden_state_size(), cfg_.num_envs);
}

RolloutBatch PpoTrainer::Collect(IterationStats* stats) {
  const int N = cfg_.num_envs;
  const int T = cfg_.rollout_len;
  const int O = envs_->obs_size();
  const int A = envs_->act_size();
  RolloutBatch b;
  b.T = T;
  b.N = N;
  b.h0 = hidden_;
  const VectorXd log_std = policy_.log_std();
  const VectorXd sigma = log_std.array().exp();
  MatrixXd raw_all(O, static_cast<Eigen::Index>(T) * N);
  std::vector<std::vector<double>> actions(N, std::vector<double>(A));
  double rsum = 0.0;
  RewardBreakdown bsum;
  for (int t = 0; t < T; ++t) {
    MatrixXd raw(O, N);
    const auto& obs = envs_->observations();
    for (int i = 0; i < N; ++i) raw.col(i) = Eigen::Map<const VectorXd>(obs[i].data(), O);
    raw_all.middleCols(static_cast<Eigen::Index>(t) * N, N) = raw;
    MatrixXd x = policy_.normalizer().Apply(raw);
    Policy::Output out = policy_.Forward(x, hidden_);
    MatrixXd u(A, N);
    for (int i = 0; i < N; ++i) {
      for (int k = 0; k < A; ++k) u(k, i) = out.mean(k, i) + sigma(k) * rng_.Normal();
    }
    for (int i = 0; i < N; ++i) {
      for (int k = 0; k < A; ++k) actions[i][k] = std::tanh(u(k, i));
    }
    b.obs.push_back(std::move(x));
    b.logp.push_back(GaussianLogProb(u, out.mean, log_std));
    b.u.push_back(std::move(u));
    b.value.push_back(out.value);
    hidden_ = out.hidden;

    const BatchResult& r = envs_->Step(actions);
    RowVectorXd rew(N), done(N);
    for (int i = 0; i < N; ++i) {
      rew(i) = r.reward[i] * cfg_.reward_scale;
      done(i) = r.done[i] ? 1.0 : 0.0;
      rsum += r.reward[i];
      bsum += r.info[i].breakdown;
      if (r.done[i]) {
        ++stats->episodes;
        if (hidden_.rows() > 0) hidden_.col(i).setZero();
      }
    }
    b.reward.push_back(rew);
    b.done.push_back(done);
  }
  {
    MatrixXd raw(O, N);
    const auto& obs = envs_->observations();
    for (int i = 0; i < N; ++i) raw.col(i) = Eigen::Map<const VectorXd>(obs[i].data(), O);
    b.last_value = policy_.Forward(policy_.normalizer().Apply(raw), hidden_).value;
  }
  policy_.normalizer().Update(raw_all);
  policy_.Quantize();
  const double n = static_cast<double>(T) * N;
  env_steps_ += static_cast<std::int64_t>(n);
  stats->mean_reward = rsum / n;
  auto& bd = stats->breakdown;
  bd.reach = bsum.reach / n;
  bd.hold = bsum.hold / n;
  bd.detach = bsum.detach / n;
  bd.pose = bsum.pose / n;
  bd.bonus = bsum.bonus / n;
  bd.penalty = bsum.penalty / n;
  return b;
}

void PpoTrainer::Update(const RolloutBatch& batch, IterationStats* stats) {
  const LossCoefs coefs{cfg_.clip, cfg_.value_coef, stats->entropy_coef};
  std::vector<int> cols(batch.N);
  std::iota(cols.begin(), cols.end(), 0);
  std::vector<double> grad;
  LossStats acc;
  int updates = 0;
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
    for (int i = batch.N - 1; i > 0; --i) {
      std::swap(cols[i], cols[rng_.Index(static_cast<std::size_t>(i) + 1)]);
    }
    for (int mb = 0; mb < cfg_.minibatches; ++mb) {
      const int lo = batch.N * mb / cfg_.minibatches;
      const int hi = batch.N * (mb + 1) / cfg_.minibatches;
      LossStats st;
      const double loss = PpoLoss(policy_, batch,
                                  std::span<const int>(cols.data() + lo, hi - lo), coefs,
                                  &grad, &st);
      double gn = 0.0;
      for (double g : grad) gn += g * g;
      gn = std::sqrt(gn);
      if (!std::isfinite(loss) || !std::isfinite(gn)) {
        std::ostringstream os;
        os << "non-finite loss at env step " << env_steps_ << ": loss=" << loss
           << " grad_norm=" << gn << " policy_loss=" << st.policy_loss
           << " value_loss=" << st.value_loss << " entropy=" << st.entropy;
        throw TrainAbort(os.str());
      }
      const double scale = gn > cfg_.max_grad_norm ? cfg_.max_grad_norm / gn : 1.0;
      ++adam_.t;
      const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(adam_.t));
      const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(adam_.t));
      auto& p = policy_.params();
      for (std::size_t k = 0; k < p.size(); ++k) {
        const double g = grad[k] * scale;
        const double m = static_cast<float>(kBeta1 * adam_.m[k] + (1.0 - kBeta1) * g);
        const double v = static_cast<float>(kBeta2 * adam_.v[k] + (1.0 - kBeta2) * g * g);
        adam_.m[k] = m;
        adam_.v[k] = v;
        p[k] -= cfg_.learning_rate * (m / c1) / (std::sqrt(v / c2) + kEps);
      }
      policy_.Quantize();
      acc.policy_loss += st.policy_loss;
      acc.value_loss += st.value_loss;
      acc.entropy += st.entropy;
      acc.clip_fraction += st.clip_fraction;
      acc.approx_kl += st.approx_kl;
      acc.samples += st.samples;
      ++updates;
    }
  }
  acc.policy_loss /= updates;
  acc.value_loss /= updates;
  acc.entropy /= updates;
  acc.clip_fraction /= updates;
  acc.approx_kl /= updates;
  stats->loss = acc;
}

IterationStats PpoTrainer::Iterate() {
  IterationStats stats;
  stats.entropy_coef = EntropySchedule(env_steps_, cfg_);
  RolloutBatch batch = Collect(&stats);
  batch.ComputeAdvantages(cfg_.gamma, cfg_.gae_lambda);
  Update(batch, &stats);
  stats.step = env_steps_;
  return stats;
}

void PpoTrainer::Train(const std::function<void(const IterationStats&)>& on_iter) {
  while (env_steps_ < cfg_.total_steps) {
    const IterationStats s = Iterate();
    if (on_iter) on_iter(s);
  }
}

void WriteLogHeader(std::ostream& os) {
  os << "step,mean_reward,reach,hold,detach,pose,bonus,penalty,entropy_coef,"
        "clip_fraction,approx_kl\n";
}

void WriteLogRow(std::ostream& os, const IterationStats& s) {
  const auto& b = s.breakdown;
  os << s.step << ',' << s.mean_reward << ',' << b.reach << ',' << b.hold << ','
     << b.detach << ',' << b.pose << ',' << b.bonus << ',' << b.penalty << ','
     << s.entropy_coef << ',' << s.loss.clip_fraction << ',' << s.loss.approx_kl << '\n';
}

PolicyController::PolicyController(const Policy* policy) : policy_(policy) { Reset(0); }

void PolicyController::Reset(std::uint64_t) {
  hidden_ = MatrixXd::Zero(policy_->arch().hidden_state_size(), 1);
}

std::vector<double> PolicyController::Act(const Env& env, std::span<const double> obs) {
  if (static_cast<int>(obs.size()) != policy_->arch().obs_size) {
    throw std::invalid_argument("policy controller: observation size mismatch");
  }
  (void)env;
  const MatrixXd raw = Eigen::Map<const VectorXd>(obs.data(), obs.size());
  const Policy::Output out = policy_->Forward(policy_->normalizer().Apply(raw), hidden_);
  hidden_ = out.hidden;
  std::vector<double> a(out.mean.rows());
  for (std::size_t k = 0; k < a.size(); ++k) a[k] = std::tanh(out.mean(k, 0));
  return a;
}

}  // namespace cerl
