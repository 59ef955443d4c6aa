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

#include "cerl/json_util.h"
#include "cerl/random.h"

namespace cerl {
namespace {

using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

constexpr double kHalfLog2Pi = 0.91893853320467274178;

MatrixXd Sigmoid(const MatrixXd& x) {
  return (1.0 / (1.0 + (-x.array()).exp())).matrix();
}

struct GruCache {
  MatrixXd h_in, r, z, n, hn;
};

struct MlpCache {
  std::vector<MatrixXd> acts;  // input followed by every layer output
};

}  // namespace

void PolicyArch::Validate() const {
  if (obs_size < 1 || act_size < 1) {
    throw std::invalid_argument("policy: obs_size and act_size must be >= 1");
  }
  for (int h : hidden) {
    if (h < 1) throw std::invalid_argument("policy: hidden sizes must be >= 1");
  }
  if (recurrent && gru_size < 1) throw std::invalid_argument("policy: gru_size >= 1");
  if (!std::isfinite(init_log_std)) throw std::invalid_argument("policy: init_log_std");
}

void to_json(nlohmann::json& j, const PolicyArch& a) {
  j = {{"obs_size", a.obs_size},       {"act_size", a.act_size},
       {"hidden", a.hidden},           {"activation", "tanh"},
       {"recurrent", a.recurrent},     {"gru_size", a.gru_size},
       {"init_log_std", a.init_log_std}, {"layout_hash", a.layout_hash}};
}

void from_json(const nlohmann::json& j, PolicyArch& a) {
  json_util::RejectUnknown(j,
                           {"obs_size", "act_size", "hidden", "activation", "recurrent",
                            "gru_size", "init_log_std", "layout_hash"},
                           "policy");
  json_util::Get(j, "obs_size", a.obs_size);
  json_util::Get(j, "act_size", a.act_size);
  json_util::Get(j, "hidden", a.hidden);
  if (j.contains("activation") && j.at("activation") != "tanh") {
    throw std::invalid_argument("policy.activation: only 'tanh' is supported");
  }
  json_util::Get(j, "recurrent", a.recurrent);
  json_util::Get(j, "gru_size", a.gru_size);
  json_util::Get(j, "init_log_std", a.init_log_std);
  json_util::Get(j, "layout_hash", a.layout_hash);
}

void ObsNormalizer::Init(int size) {
  mean = VectorXd::Zero(size);
  var = VectorXd::Ones(size);
  count = 0;
}

void ObsNormalizer::Update(const MatrixXd& batch) {
  const auto n = static_cast<double>(batch.cols());
  if (n == 0) return;
  const VectorXd bm = batch.rowwise().mean();
  const VectorXd bv = (batch.colwise() - bm).array().square().rowwise().mean();
  const double c = static_cast<double>(count);
  const double tot = c + n;
  const VectorXd d = bm - mean;
  mean += d * (n / tot);
  var = ((var * c + bv * n).array() + d.array().square() * (c * n / tot)).matrix() / tot;
  count += batch.cols();
}

MatrixXd ObsNormalizer::Apply(const MatrixXd& obs) const {
  const VectorXd inv = (var.array() + 1e-8).rsqrt();
  MatrixXd out = (obs.colwise() - mean).array().colwise() * inv.array();
  return out.cwiseMax(-10.0).cwiseMin(10.0);
}

Policy::Policy(PolicyArch arch, std::uint64_t seed) : arch_(std::move(arch)) {
  arch_.Validate();
  std::size_t off = 0;
  auto add = [&](const std::string& name, int rows, int cols) {
    tensors_.push_back({name, rows, cols, off});
    off += static_cast<std::size_t>(rows) * cols;
    return static_cast<int>(tensors_.size()) - 1;
  };
  const int h = arch_.gru_size;
  if (arch_.recurrent) {
    gru_wx_ = add("gru.wx", 3 * h, arch_.obs_size);
    gru_wh_ = add("gru.wh", 3 * h, h);
    gru_bx_ = add("gru.bx", 3 * h, 1);
    gru_bh_ = add("gru.bh", 3 * h, 1);
  }
  const int in = arch_.obs_size + arch_.hidden_state_size();
  for (const char* head : {"actor", "critic"}) {
    auto& idx = std::string(head) == "actor" ? actor_ : critic_;
    int prev = in;
    std::vector<int> sizes = arch_.hidden;
    sizes.push_back(std::string(head) == "actor" ? arch_.act_size : 1);
    for (std::size_t l = 0; l < sizes.size(); ++l) {
      const std::string p = std::string(head) + ".l" + std::to_string(l);
      idx.push_back(add(p + ".w", sizes[l], prev));
      idx.push_back(add(p + ".b", sizes[l], 1));
      prev = sizes[l];
    }
  }
  log_std_ = add("log_std", arch_.act_size, 1);
  params_.assign(off, 0.0);

  Rng rng(Rng::SplitMix(seed ^ 0x706f6c69ULL));
  if (arch_.recurrent) {
    const double k = 1.0 / std::sqrt(static_cast<double>(h));
    for (int t : {gru_wx_, gru_wh_}) {
      const auto& ti = tensors_[t];
      for (int i = 0; i < ti.rows * ti.cols; ++i) params_[ti.offset + i] = rng.Uniform(-k, k);
    }
  }
  for (auto* idx : {&actor_, &critic_}) {
    for (std::size_t l = 0; l < idx->size(); l += 2) {
      const auto& w = tensors_[(*idx)[l]];
      const bool last = l + 2 == idx->size();
      const double gain = last ? (idx == &actor_ ? 0.01 : 1.0) : std::sqrt(2.0);
      const double sd = gain / std::sqrt(static_cast<double>(w.cols));
      for (int i = 0; i < w.rows * w.cols; ++i) params_[w.offset + i] = sd * rng.Normal();
    }
  }
  const auto& ls = tensors_[log_std_];
  for (int i = 0; i < ls.rows; ++i) params_[ls.offset + i] = arch_.init_log_std;
  normalizer_.Init(arch_.obs_size);
  Quantize();
}

const TensorInfo& Policy::Tensor(const std::string& name) const {
  for (const auto& t : tensors_) {
    if (t.name == name) return t;
  }
  throw std::out_of_range("no tensor named " + name);
}

Eigen::Map<const MatrixXd> Policy::View(const TensorInfo& t) const {
  return {params_.data() + t.offset, t.rows, t.cols};
}

VectorXd Policy::log_std() const { return View(tensors_[log_std_]); }

void Policy::CheckLayout(std::uint64_t layout_hash) const {
  if (layout_hash != arch_.layout_hash) {
    throw CheckpointError("observation layout mismatch: policy expects hash " +
                          std::to_string(arch_.layout_hash) + ", environment has " +
                          std::to_string(layout_hash));
  }
}

void Policy::Quantize() {
  for (auto& p : params_) p = static_cast<float>(p);
  for (auto& m : normalizer_.mean) m = static_cast<float>(m);
  for (auto& v : normalizer_.var) v = static_cast<float>(v);
}

Policy::Output Policy::Forward(const MatrixXd& obs, const MatrixXd& hidden) const {
  SequenceInput in;
  in.obs = {obs};
  in.h0 = hidden;
  Output out;
  out.hidden = hidden;
  Evaluate(in,
           [&](int, const MatrixXd& mean, const RowVectorXd& value, const VectorXd&,
               HeadGrad*) {
             out.mean = mean;
             out.value = value;
             return 0.0;
           },
           nullptr);
  if (arch_.recurrent) {
    // Re-run the cell to expose the new state.
    const int h = arch_.gru_size;
    const MatrixXd gx = (View(tensors_[gru_wx_]) * obs).colwise() +
                        VectorXd(View(tensors_[gru_bx_]));
    const MatrixXd gh = (View(tensors_[gru_wh_]) * hidden).colwise() +
                        VectorXd(View(tensors_[gru_bh_]));
    const MatrixXd r = Sigmoid(gx.topRows(h) + gh.topRows(h));
    const MatrixXd z = Sigmoid(gx.middleRows(h, h) + gh.middleRows(h, h));
    const MatrixXd n =
        (gx.bottomRows(h).array() + r.array() * gh.bottomRows(h).array()).tanh().matrix();
    out.hidden = ((1.0 - z.array()) * n.array() + z.array() * hidden.array()).matrix();
  }
  return out;
}

double Policy::Evaluate(const SequenceInput& in, const HeadLoss& head,
                        std::vector<double>* grad) const {
  const int T = static_cast<int>(in.obs.size());
  if (T == 0) return 0.0;
  const int B = static_cast<int>(in.obs[0].cols());
  const int H = arch_.gru_size;
  const bool rec = arch_.recurrent;
  if (grad) grad->assign(params_.size(), 0.0);
  auto G = [&](int t) -> Eigen::Map<MatrixXd> {
    const auto& ti = tensors_[t];
    return {grad->data() + ti.offset, ti.rows, ti.cols};
  };
  const VectorXd ls = log_std();

  auto mlp_forward = [&](const std::vector<int>& idx, const MatrixXd& x, MlpCache* c) {
    c->acts.clear();
    c->acts.push_back(x);
    for (std::size_t l = 0; l < idx.size(); l += 2) {
      MatrixXd z = (View(tensors_[idx[l]]) * c->acts.back()).colwise() +
                   VectorXd(View(tensors_[idx[l + 1]]));
      if (l + 2 < idx.size()) z = z.array().tanh().matrix();
      c->acts.push_back(std::move(z));
    }
  };
  auto mlp_backward = [&](const std::vector<int>& idx, const MlpCache& c, MatrixXd d) {
    const int L = static_cast<int>(idx.size() / 2);
    for (int l = L - 1; l >= 0; --l) {
      if (l < L - 1) d = (d.array() * (1.0 - c.acts[l + 1].array().square())).matrix();
      G(idx[2 * l]) += d * c.acts[l].transpose();
      G(idx[2 * l + 1]) += d.rowwise().sum();
      d = View(tensors_[idx[2 * l]]).transpose() * d;
    }
    return d;
  };

  std::vector<GruCache> gru(rec ? T : 0);
  std::vector<MatrixXd> dh_head(rec ? T : 0);
  MatrixXd h = rec ? in.h0 : MatrixXd();
  double loss = 0.0;
  MlpCache ca, cc;
  for (int t = 0; t < T; ++t) {
    MatrixXd x = in.obs[t];
    if (rec) {
      GruCache& g = gru[t];
      g.h_in = h;
      if (!in.keep.empty()) g.h_in = (h.array().rowwise() * in.keep[t].array()).matrix();
      const MatrixXd gx = (View(tensors_[gru_wx_]) * x).colwise() +
                          VectorXd(View(tensors_[gru_bx_]));
      const MatrixXd gh = (View(tensors_[gru_wh_]) * g.h_in).colwise() +
                          VectorXd(View(tensors_[gru_bh_]));
      g.r = Sigmoid(gx.topRows(H) + gh.topRows(H));
      g.z = Sigmoid(gx.middleRows(H, H) + gh.middleRows(H, H));
      g.hn = gh.bottomRows(H);
      g.n = (gx.bottomRows(H).array() + g.r.array() * g.hn.array()).tanh().matrix();
      h = ((1.0 - g.z.array()) * g.n.array() + g.z.array() * g.h_in.array()).matrix();
      MatrixXd xh(x.rows() + H, B);
      xh << x, h;
      x = std::move(xh);
    }
    mlp_forward(actor_, x, &ca);
    mlp_forward(critic_, x, &cc);
    HeadGrad hg;
    loss += head(t, ca.acts.back(), cc.acts.back().row(0), ls, grad ? &hg : nullptr);
    if (!grad) continue;
    G(log_std_) += hg.dlog_std;
    MatrixXd dx = mlp_backward(actor_, ca, hg.dmean);
    dx += mlp_backward(critic_, cc, MatrixXd(hg.dvalue));
    if (rec) dh_head[t] = dx.bottomRows(H);
  }
  if (grad && rec) {
    MatrixXd dh = MatrixXd::Zero(H, B);
    for (int t = T - 1; t >= 0; --t) {
      const GruCache& g = gru[t];
      dh += dh_head[t];
      const MatrixXd dn = (dh.array() * (1.0 - g.z.array())).matrix();
      const MatrixXd dz = (dh.array() * (g.h_in.array() - g.n.array())).matrix();
      MatrixXd dh_prev = (dh.array() * g.z.array()).matrix();
      const MatrixXd dan = (dn.array() * (1.0 - g.n.array().square())).matrix();
      const MatrixXd dar =
          (dan.array() * g.hn.array() * g.r.array() * (1.0 - g.r.array())).matrix();
      const MatrixXd daz = (dz.array() * g.z.array() * (1.0 - g.z.array())).matrix();
      MatrixXd dgx(3 * H, B), dgh(3 * H, B);
      dgx << dar, daz, dan;
      dgh << dar, daz, (dan.array() * g.r.array()).matrix();
      G(gru_wx_) += dgx * in.obs[t].transpose();
      G(gru_bx_) += dgx.rowwise().sum();
      G(gru_wh_) += dgh * g.h_in.transpose();
      G(gru_bh_) += dgh.rowwise().sum();
      dh_prev += View(tensors_[gru_wh_]).transpose() * dgh;
      if (!in.keep.empty()) dh_prev = (dh_prev.array().rowwise() * in.keep[t].array()).matrix();
      dh = std::move(dh_prev);
    }
  }
  return loss;
}

RowVectorXd GaussianLogProb(const MatrixXd& u, const MatrixXd& mean, const VectorXd& log_std) {
  const VectorXd inv = (-log_std.array()).exp();
  const MatrixXd z = ((u - mean).array().colwise() * inv.array()).matrix();
  const double norm = log_std.sum() + kHalfLog2Pi * static_cast<double>(log_std.size());
  return (-0.5 * z.array().square().colwise().sum() - norm).matrix();
}

double GaussianEntropy(const VectorXd& log_std) {
  return log_std.sum() + (0.5 + kHalfLog2Pi) * static_cast<double>(log_std.size());
}

RowVectorXd SquashedLogProb(const MatrixXd& u, const MatrixXd& mean, const VectorXd& log_std) {
  // log(1 - tanh(u)^2) = 2 (log 2 - u - softplus(-2u)), stable for large |u|.
  const Eigen::ArrayXXd a = u.array();
  const Eigen::ArrayXXd sp = (-2.0 * a).max(0.0) + (-(2.0 * a).abs()).exp().log1p();
  const Eigen::ArrayXXd corr = 2.0 * (std::numbers::ln2 - a - sp);
  return GaussianLogProb(u, mean, log_std) - corr.matrix().colwise().sum();
}

}  // namespace cerl
