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

#include "cerl/self_check.h"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "cerl/eval.h"
#include "cerl/oracle.h"
#include "cerl/policy.h"
#include "cerl/ppo.h"
#include "cerl/random.h"

namespace cerl {
namespace {

// Contact rewards written out term by term from their definitions.
struct Transcribed {
  double reach, hold, detach;
};

Transcribed Transcribe(double px, double py, double qx, double qy, int ind, int act,
                       double s, const RewardConfig& c) {
  const double d2 = (px - qx) * (px - qx) + (py - qy) * (py - qy);
  const double d = c.squared_distance ? d2 : std::sqrt(d2);
  const double k = std::exp(-d / c.sigma_sq);
  Transcribed t{0.0, 0.0, 0.0};
  if (ind == 0 && s <= c.delta) t.reach = k;
  if (ind == 1 && act == 1) t.hold = 1.0 + c.alpha_hold * k;
  if (ind == 0 && act == 0 && s > c.delta) t.detach = 1.0;
  return t;
}

std::string Fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

}  // namespace

CheckTargets MutatedTargets(const std::string& mutation) {
  CheckTargets t;
  if (mutation.empty() || mutation == "none") return t;
  if (mutation == "hold-sign") {
    t.hold = [](const EffectorSnapshot& s, const RewardConfig& c) { return -HoldReward(s, c); };
  } else if (mutation == "phase-boundary") {
    t.phase = [](int ind, double s, double delta) {
      if (ind == 1) return ContactPhase::kHold;
      return s < delta ? ContactPhase::kReach : ContactPhase::kDetach;
    };
  } else {
    throw std::invalid_argument("unknown mutation '" + mutation +
                                "' (expected hold-sign or phase-boundary)");
  }
  return t;
}

CheckResult RewardOracleCheck(const CheckTargets& t, int samples, std::uint64_t seed) {
  Rng rng(seed);
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    RewardConfig c;
    c.sigma_sq = rng.Uniform(0.05, 1.0);
    c.alpha_hold = rng.Uniform(0.0, 2.0);
    c.delta = rng.Uniform(0.05, 0.5);
    c.squared_distance = rng.Uniform() < 0.3;
    c.c_pos = rng.Uniform(0.1, 1.0);
    c.c_rot = rng.Uniform(0.1, 1.0);
    c.eps_pos = rng.Uniform(0.01, 0.2);
    c.eps_rot = rng.Uniform(0.01, 0.2);
    EffectorSnapshot s;
    s.p_act = Vec2(rng.Uniform(-1, 1), rng.Uniform(-1, 1));
    s.i_act = rng.Uniform() < 0.5 ? 1 : 0;
    const double S = rng.Uniform(0.2, 1.5);
    s.window.current = {Vec2(rng.Uniform(-1, 1), rng.Uniform(-1, 1)),
                        rng.Uniform() < 0.5 ? 1 : 0, S};
    s.window.next = s.window.current;
    s.s_remaining = rng.Uniform() < 0.1 ? c.delta : rng.Uniform(0.0, S);
    const Transcribed o = Transcribe(s.p_act.x(), s.p_act.y(), s.window.current.point.x(),
                                     s.window.current.point.y(), s.window.current.indicator,
                                     s.i_act, s.s_remaining, c);
    const double dp = rng.Uniform(0.0, 1.0);
    const double dth = rng.Uniform(0.0, std::numbers::pi);
    const double pose = c.c_pos / (c.eps_pos + dp) + c.c_rot / (c.eps_rot + dth);
    worst = std::max({worst, std::abs(t.reach(s, c) - o.reach),
                      std::abs(t.hold(s, c) - o.hold), std::abs(t.detach(s, c) - o.detach),
                      std::abs(t.pose(dp, dth, c) - pose)});
    const RewardBreakdown b =
        TotalContactReward(std::span<const EffectorSnapshot>(&s, 1), PoseErrors{dp, dth}, c);
    worst = std::max(worst, std::abs(b.Total() - (o.reach + o.hold + o.detach + pose)));
  }
  CheckResult r;
  r.name = "reward_oracle";
  r.measured = worst;
  r.tolerance = 1e-12;
  r.pass = worst <= r.tolerance;
  r.detail = std::to_string(samples) + " snapshots, max |engine - oracle| = " + Fmt(worst);
  return r;
}

CheckResult PhaseGridCheck(const CheckTargets& t) {
  int cases = 0, bad = 0;
  for (double delta : {0.05, 0.15, 0.3}) {
    for (double S : {0.35, 1.0}) {
      const double eps = 1e-9;
      for (int ind : {0, 1}) {
        for (double s : {0.0, delta / 2, delta, delta + eps, S}) {
          ContactPhase want;
          if (ind == 1) {
            want = ContactPhase::kHold;
          } else if (s <= delta) {
            want = ContactPhase::kReach;
          } else {
            want = ContactPhase::kDetach;
          }
          ++cases;
          if (t.phase(ind, s, delta) != want) ++bad;
        }
      }
    }
  }
  CheckResult r;
  r.name = "phase_grid";
  r.measured = bad;
  r.tolerance = 0;
  r.pass = bad == 0;
  r.detail = std::to_string(cases - bad) + "/" + std::to_string(cases) + " cases";
  return r;
}

CheckResult FiniteDiffGradientCheck(int networks, std::uint64_t seed) {
  Rng rng(seed);
  double worst = 0.0;
  for (int k = 0; k < networks; ++k) {
    PolicyArch arch;
    arch.obs_size = 3;
    arch.act_size = 2;
    arch.hidden = k % 3 == 0 ? std::vector<int>{5} : std::vector<int>{5, 4};
    arch.recurrent = k % 2 == 1;
    arch.gru_size = 3;
    arch.init_log_std = rng.Uniform(-1.0, 0.0);
    Policy policy(arch, rng.NextU64());
    // Bigger weights than the training init so every layer matters.
    for (auto& p : policy.params()) p += rng.Normal() * 0.3;

    RolloutBatch b;
    b.T = 3;
    b.N = 4;
    Eigen::MatrixXd h0(arch.hidden_state_size(), b.N);
    for (int i = 0; i < h0.size(); ++i) h0(i) = rng.Normal() * 0.5;
    b.h0 = h0;
    for (int t = 0; t < b.T; ++t) {
      Eigen::MatrixXd o(arch.obs_size, b.N), u(arch.act_size, b.N);
      for (int i = 0; i < o.size(); ++i) o(i) = rng.Normal();
      for (int i = 0; i < u.size(); ++i) u(i) = rng.Normal();
      Eigen::RowVectorXd adv(b.N), ret(b.N), done(b.N);
      for (int i = 0; i < b.N; ++i) {
        adv(i) = rng.Normal();
        ret(i) = rng.Normal();
        done(i) = rng.Uniform() < 0.2 ? 1.0 : 0.0;
      }
      b.obs.push_back(o);
      b.u.push_back(u);
      b.advantages.push_back(adv);
      b.returns.push_back(ret);
      b.done.push_back(done);
    }
    // Old log-probs near the current ones so most ratios are inside the clip.
    SequenceInput in;
    in.obs = b.obs;
    in.h0 = b.h0;
    in.keep.push_back(Eigen::RowVectorXd::Ones(b.N));
    for (int t = 1; t < b.T; ++t) in.keep.push_back(Eigen::RowVectorXd::Ones(b.N) - b.done[t - 1]);
    b.logp.resize(b.T);
    policy.Evaluate(in,
                    [&](int t, const Eigen::MatrixXd& mean, const Eigen::RowVectorXd&,
                        const Eigen::VectorXd& ls, HeadGrad*) {
                      b.logp[t] = GaussianLogProb(b.u[t], mean, ls);
                      for (int i = 0; i < b.N; ++i) b.logp[t](i) += rng.Normal() * 0.1;
                      return 0.0;
                    },
                    nullptr);
    std::vector<int> cols = {0, 1, 2, 3};
    const LossCoefs coefs{0.2, 0.5, 0.01};
    std::vector<double> grad;
    PpoLoss(policy, b, cols, coefs, &grad, nullptr);
    Policy probe = policy;
    auto loss = [&](const std::vector<double>& p) {
      probe.params() = p;
      return PpoLoss(probe, b, cols, coefs, nullptr, nullptr);
    };
    worst = std::max(worst, FiniteDiffCheck(policy.params(), loss, grad, 1e-5));
  }
  CheckResult r;
  r.name = "ppo_finite_difference";
  r.measured = worst;
  r.tolerance = 1e-4;
  r.pass = worst <= r.tolerance;
  r.detail = std::to_string(networks) + " networks, max relative error " + Fmt(worst);
  return r;
}

CheckResult GaeOracleCheck(std::uint64_t seed) {
  Rng rng(seed);
  double worst = 0.0;
  int cases = 0;
  for (int T = 1; T <= 10; ++T) {
    for (int rep = 0; rep < 20; ++rep) {
      const double gamma = rng.Uniform(0.5, 1.0);
      const double lambda = rep % 4 == 0 ? 1.0 : rng.Uniform(0.0, 1.0);
      const bool no_dones = rep % 2 == 0;
      std::vector<double> r(T), v(T + 1);
      std::vector<std::uint8_t> d(T, 0);
      for (auto& x : r) x = rng.Normal();
      for (auto& x : v) x = rng.Normal();
      if (!no_dones) {
        for (auto& x : d) x = rng.Uniform() < 0.3;
      }
      const GaeResult g = Gae(r, v, d, gamma, lambda);
      for (int t = 0; t < T; ++t) {
        // Sum of discounted TD errors until the first episode boundary.
        double a = 0.0, w = 1.0;
        for (int k = t; k < T; ++k) {
          const double delta = r[k] + gamma * v[k + 1] * (d[k] ? 0.0 : 1.0) - v[k];
          a += w * delta;
          if (d[k]) break;
          w *= gamma * lambda;
        }
        worst = std::max({worst, std::abs(a - g.advantages[t]),
                          std::abs(a + v[t] - g.returns[t])});
        if (lambda == 1.0 && no_dones) {
          double mc = 0.0, disc = 1.0;
          for (int k = t; k < T; ++k) {
            mc += disc * r[k];
            disc *= gamma;
          }
          mc += disc * v[T] - v[t];
          worst = std::max(worst, std::abs(mc - g.advantages[t]));
        }
      }
      ++cases;
    }
  }
  CheckResult res;
  res.name = "gae_oracle";
  res.measured = worst;
  res.tolerance = 1e-10;
  res.pass = worst <= res.tolerance;
  res.detail = std::to_string(cases) + " cases with T <= 10, max error " + Fmt(worst);
  return res;
}

CheckResult OraclePipelineCheck(int seeds_per_task, std::uint64_t seed) {
  double worst_dev = 0.0, worst_err = 0.0;
  int episodes = 0, contacts = 0;
  OracleController oracle;
  auto record = [&](const EpisodeLog& log) {
    worst_dev = std::max(worst_dev, PlanDeviation(log));
    for (const auto& s : log.steps) {
      for (std::size_t e = 0; e < s.contact_made.size(); ++e) {
        if (!s.contact_made[e]) continue;
        ++contacts;
        worst_err = std::max(worst_err, s.make_error[e]);
      }
    }
    ++episodes;
  };
  for (GaitType g : kAllGaits) {
    LocoEnvConfig cfg;
    cfg.gaits = {g};
    for (int i = 0; i < seeds_per_task; ++i) {
      const std::uint64_t s = Rng::SplitMix(seed + 1000 * static_cast<int>(g) + i);
      LocoEnv env(cfg, s);
      record(RunEpisode(env, oracle, s));
    }
  }
  for (ManipTask task : {ManipTask::kRepose, ManipTask::kReorient}) {
    ManipEnvConfig cfg;
    cfg.tasks = {task};
    for (int i = 0; i < seeds_per_task; ++i) {
      const std::uint64_t s = Rng::SplitMix(seed + 7000 + 1000 * static_cast<int>(task) + i);
      ManipEnv env(cfg, s);
      record(RunEpisode(env, oracle, s));
    }
  }
  CheckResult r;
  r.name = "oracle_pipeline";
  r.measured = worst_dev;
  r.tolerance = 0.0;
  r.pass = worst_dev == 0.0 && worst_err <= 1e-6 && contacts > 0;
  r.detail = std::to_string(episodes) + " episodes, " + std::to_string(contacts) +
             " contacts, max plan deviation " + Fmt(worst_dev) + ", max tracking error " +
             Fmt(worst_err) + " m";
  return r;
}

std::vector<CheckResult> RunAllChecks(const CheckTargets& t, bool quick) {
  return {RewardOracleCheck(t, quick ? 1000 : 10000), PhaseGridCheck(t),
          FiniteDiffGradientCheck(quick ? 3 : 10), GaeOracleCheck(),
          OraclePipelineCheck(quick ? 5 : 100)};
}

}  // namespace cerl
