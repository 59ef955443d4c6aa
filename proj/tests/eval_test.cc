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

#include "cerl/eval.h"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "cerl/oracle.h"
#include "cerl/random.h"

namespace cerl {
namespace {

StepRecord Record(std::vector<int> cmd, std::vector<int> act) {
  StepRecord r;
  r.cmd_bits = std::move(cmd);
  r.act_bits = std::move(act);
  r.contact_made.assign(r.cmd_bits.size(), 0);
  r.make_error.assign(r.cmd_bits.size(), 0.0);
  return r;
}

TEST(ContactTrackingErrorTest, Examples) {
  EpisodeLog log;
  log.num_effectors = 2;
  log.steps.push_back(Record({1, 0}, {1, 0}));
  EXPECT_FALSE(ContactTrackingError(log).has_value());
  log.steps[0].contact_made[0] = 1;
  EXPECT_DOUBLE_EQ(*ContactTrackingError(log), 0.0);
  log.steps[0].make_error[0] = 0.05;
  EXPECT_DOUBLE_EQ(*ContactTrackingError(log), 0.05);
  log.steps[0].make_error[0] = 0.02;
  log.steps.push_back(Record({1, 1}, {1, 1}));
  log.steps[1].contact_made[1] = 1;
  log.steps[1].make_error[1] = 0.04;
  EXPECT_NEAR(*ContactTrackingError(log), 0.03, 1e-15);
}

TEST(PlanDeviationTest, Examples) {
  EpisodeLog log;
  log.num_effectors = 4;
  for (int t = 0; t < 10; ++t) {
    const int b = t % 2;
    log.steps.push_back(Record({b, 1 - b, 1 - b, b}, {b, 1 - b, 1 - b, b}));
  }
  EXPECT_EQ(PlanDeviation(log), 0.0);
  for (auto& s : log.steps) s.act_bits[2] = 1 - s.act_bits[2];
  EXPECT_DOUBLE_EQ(PlanDeviation(log), 0.25);
}

TEST(PlanDeviationTest, RandomPolicyMatchesBernoulliOracle) {
  LocoEnvConfig cfg;
  double measured = 0.0, oracle = 0.0;
  const int episodes = 100;
  for (int e = 0; e < episodes; ++e) {
    LocoEnv env(cfg, 100 + e);
    RandomController rc(e);
    const EpisodeLog log = RunEpisode(env, rc, 7 + e);
    measured += PlanDeviation(log);
    // Independent oracle: actual bits as Bernoulli(p) with p the empirical
    // contact rate, compared against the commanded bits.
    double ones = 0.0, n = 0.0;
    for (const auto& s : log.steps) {
      for (int b : s.act_bits) ones += b;
      n += s.act_bits.size();
    }
    const double p = ones / n;
    double expect = 0.0;
    for (const auto& s : log.steps) {
      for (int c : s.cmd_bits) expect += c ? 1.0 - p : p;
    }
    oracle += expect / n;
  }
  measured /= episodes;
  oracle /= episodes;
  EXPECT_NEAR(measured, oracle, 0.03);
  EXPECT_NEAR(measured, 0.5, 0.1);
}

TEST(RunEpisodeTest, OracleExecutesPlanExactly) {
  for (GaitType g : kAllGaits) {
    LocoEnvConfig cfg;
    cfg.gaits = {g};
    LocoEnv env(cfg, 3);
    OracleController oc;
    const EpisodeLog log = RunEpisode(env, oc, 11);
    EXPECT_EQ(PlanDeviation(log), 0.0) << GaitName(g);
    ASSERT_TRUE(ContactTrackingError(log).has_value());
    EXPECT_LE(*ContactTrackingError(log), 1e-6) << GaitName(g);
  }
}

TEST(EpisodeLogTest, MetricsRecomputedFromJsonAgree) {
  LocoEnv env(LocoEnvConfig{}, 5);
  RandomController rc(2);
  const EpisodeLog log = RunEpisode(env, rc, 9);
  const EpisodeLog back =
      EpisodeLogFromJson(nlohmann::json::parse(EpisodeLogToJson(log).dump()));
  EXPECT_NEAR(PlanDeviation(back), PlanDeviation(log), 1e-12);
  ASSERT_EQ(ContactTrackingError(back).has_value(), ContactTrackingError(log).has_value());
  if (ContactTrackingError(log)) {
    EXPECT_NEAR(*ContactTrackingError(back), *ContactTrackingError(log), 1e-12);
  }
  EXPECT_EQ(back.steps.size(), log.steps.size());
}

TEST(SummarizeTest, MeanAndStandardError) {
  const MetricCell c = Summarize({1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(c.mean, 2.5);
  // Sample standard deviation sqrt(5/3) over sqrt(4).
  EXPECT_NEAR(c.stderr_, std::sqrt(5.0 / 3.0) / 2.0, 1e-15);
  EXPECT_EQ(c.n, 4);
  // Permutation of the episode order changes nothing.
  const MetricCell p = Summarize({3.0, 1.0, 4.0, 2.0});
  EXPECT_DOUBLE_EQ(p.mean, c.mean);
  EXPECT_DOUBLE_EQ(p.stderr_, c.stderr_);
}

TEST(VelocityGridTest, DefaultGridHasEightyOneCells) {
  EXPECT_EQ(DefaultVelocityAxis().size() * DefaultVelocityAxis().size(), 81u);
  const auto d = DefaultDurationAxis();
  EXPECT_DOUBLE_EQ(d.front(), 0.2);
  EXPECT_DOUBLE_EQ(d.back(), 0.9);
}

TEST(VelocityGridTest, StandingPolicyAtZeroCommand) {
  VelocityGridOptions opt;
  opt.vx = {0.0, 0.5};
  opt.vy = {0.0};
  opt.episodes = 3;
  const MetricTable t = VelocityGridEval(
      [] { return std::make_unique<ZeroController>(); }, LocoEnvConfig{}, opt);
  ASSERT_EQ(t.cells.size(), 2u);
  EXPECT_EQ(t.cells[0].n, 3);
  EXPECT_NEAR(t.cells[0].mean, 0.0, 1e-12);
  EXPECT_TRUE(t.cells[0].flagged);
  EXPECT_NEAR(t.cells[1].mean, 0.5, 1e-9);
  std::ostringstream csv;
  WriteCsv(csv, t);
  EXPECT_NE(csv.str().find("mean"), std::string::npos);
}

TEST(DurationSweepTest, MissingPolicyYieldsEmptyCells) {
  DurationSweepOptions opt;
  opt.gaits = {GaitType::kTrot};
  opt.durations = {0.35};
  opt.episodes = 2;
  const SweepTables t = DurationSweep(
      {{"oracle", [] { return std::make_unique<OracleController>(); }},
       {"missing", nullptr}},
      LocoEnvConfig{}, opt);
  ASSERT_EQ(t.hamming.cells.size(), 2u);
  int filled = 0, empty = 0;
  for (const MetricCell& c : t.hamming.cells) {
    if (c.n == 0) {
      ++empty;
    } else {
      ++filled;
      EXPECT_EQ(c.mean, 0.0);
    }
  }
  EXPECT_EQ(filled, 1);
  EXPECT_EQ(empty, 1);
}

// Monte-Carlo estimate of E|goal - start| for uniform goal offsets.
PoseErrors MonteCarloBaseline(const PoseRanges& r, int n, std::uint64_t seed) {
  Rng rng(seed);
  double p = 0.0, q = 0.0;
  for (int i = 0; i < n; ++i) {
    p += std::hypot(rng.Uniform(r.x.lo, r.x.hi), rng.Uniform(r.y.lo, r.y.hi));
    q += std::abs(rng.Uniform(r.yaw.lo, r.yaw.hi));
  }
  return {p / n, q / n};
}

TEST(ZeroMotionBaselineTest, ClosedFormMatchesMonteCarlo) {
  for (const PoseRanges& r : {PoseRanges::Trained(), PoseRanges::Evaluated()}) {
    const PoseErrors exact = ZeroMotionBaseline(r);
    const PoseErrors mc = MonteCarloBaseline(r, 400000, 3);
    EXPECT_NEAR(exact.dp, mc.dp, 1e-3);
    EXPECT_NEAR(exact.dtheta, mc.dtheta, 2e-3);
  }
  EXPECT_NEAR(ZeroMotionBaseline(PoseRanges::Trained()).dtheta, 0.3, 1e-12);
}

TEST(PoseErrorEvalTest, ZeroMotionEqualsBaselineAndOracleBeatsIt) {
  ManipEnvConfig cfg;
  cfg.tasks = {ManipTask::kRepose};
  cfg.n_targets = 1;
  PoseEvalOptions opt;
  opt.ranges = PoseRanges::Trained();
  opt.episodes = 40;
  const MetricTable zero = PoseErrorEval(
      [] { return std::make_unique<ZeroController>(); }, cfg, opt);
  const MetricTable oracle = PoseErrorEval(
      [] { return std::make_unique<OracleController>(); }, cfg, opt);
  ASSERT_EQ(zero.cells.size(), 2u);
  const PoseErrors base = ZeroMotionBaseline(opt.ranges);
  EXPECT_NEAR(zero.cells[0].mean, base.dp, 4.0 * zero.cells[0].stderr_);
  EXPECT_NEAR(zero.cells[1].mean, base.dtheta, 4.0 * zero.cells[1].stderr_);
  EXPECT_LE(oracle.cells[0].mean, cfg.tau_p);
  EXPECT_LE(oracle.cells[1].mean, cfg.tau_theta);
}

}  // namespace
}  // namespace cerl
