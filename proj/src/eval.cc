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

#include <cmath>
#include <numbers>
#include <ostream>

#include "cerl/random.h"

namespace cerl {
namespace {

std::uint64_t EpisodeSeed(std::uint64_t base, std::uint64_t i) {
  return Rng::SplitMix(base ^ Rng::SplitMix(i + 0x9e37ULL));
}

// Antiderivative F with d2F/dxdy = sqrt(x^2 + y^2).
double RadialPrimitive(double x, double y) {
  const double r = std::hypot(x, y);
  double f = 2.0 * x * y * r;
  if (x != 0.0) f += x * x * x * std::log(y + r);
  if (y != 0.0) f += y * y * y * std::log(x + r);
  return f / 6.0;
}

// E|U| for U uniform on [lo, hi].
double MeanAbsUniform(double lo, double hi) {
  if (hi == lo) return std::abs(lo);
  if (lo >= 0.0) return 0.5 * (lo + hi);
  if (hi <= 0.0) return -0.5 * (lo + hi);
  return (hi * hi + lo * lo) / (2.0 * (hi - lo));
}

}  // namespace

nlohmann::json EpisodeLogToJson(const EpisodeLog& log) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : log.steps) {
    const auto& b = s.breakdown;
    steps.push_back({{"cmd", s.cmd_bits},
                     {"act", s.act_bits},
                     {"made", s.contact_made},
                     {"make_error", s.make_error},
                     {"breakdown", {b.reach, b.hold, b.detach, b.pose, b.bonus, b.penalty}},
                     {"reward", s.reward}});
  }
  nlohmann::json j = {{"seed", log.seed},
                      {"config_digest", log.config_digest},
                      {"num_effectors", log.num_effectors},
                      {"elapsed", log.elapsed},
                      {"displacement", {log.displacement.x(), log.displacement.y()}},
                      {"plan_exhausted", log.plan_exhausted},
                      {"steps", steps}};
  if (log.terminal) j["terminal"] = {log.terminal->dp, log.terminal->dtheta};
  return j;
}

EpisodeLog EpisodeLogFromJson(const nlohmann::json& j) {
  EpisodeLog log;
  log.seed = j.at("seed").get<std::uint64_t>();
  log.config_digest = j.at("config_digest").get<std::uint64_t>();
  log.num_effectors = j.at("num_effectors").get<int>();
  log.elapsed = j.at("elapsed").get<double>();
  const auto d = j.at("displacement").get<std::vector<double>>();
  log.displacement = Vec2(d.at(0), d.at(1));
  log.plan_exhausted = j.at("plan_exhausted").get<bool>();
  for (const auto& s : j.at("steps")) {
    StepRecord r;
    r.cmd_bits = s.at("cmd").get<std::vector<int>>();
    r.act_bits = s.at("act").get<std::vector<int>>();
    r.contact_made = s.at("made").get<std::vector<int>>();
    r.make_error = s.at("make_error").get<std::vector<double>>();
    const auto b = s.at("breakdown").get<std::vector<double>>();
    r.breakdown = {b.at(0), b.at(1), b.at(2), b.at(3), b.at(4), b.at(5)};
    r.reward = s.at("reward").get<double>();
    log.steps.push_back(std::move(r));
  }
  if (j.contains("terminal")) {
    const auto t = j.at("terminal").get<std::vector<double>>();
    log.terminal = PoseErrors{t.at(0), t.at(1)};
  }
  return log;
}

EpisodeLog RunEpisode(Env& env, Controller& controller, std::uint64_t seed, int max_steps) {
  EpisodeLog log;
  log.seed = seed;
  log.num_effectors = env.num_effectors();
  std::vector<double> obs = env.Reset(seed);
  controller.Reset(seed);
  Pose2 base0;
  const auto* loco = dynamic_cast<const LocoEnv*>(&env);
  if (loco) base0 = loco->state().base;
  for (int t = 0; t < max_steps; ++t) {
    const std::vector<double> a = controller.Act(env, obs);
    StepResult r = env.Step(a);
    StepRecord rec;
    rec.cmd_bits = std::move(r.info.cmd_bits);
    rec.act_bits = std::move(r.info.act_bits);
    rec.contact_made = std::move(r.info.contact_made);
    rec.make_error = std::move(r.info.make_error);
    rec.breakdown = r.info.breakdown;
    rec.reward = r.reward;
    log.steps.push_back(std::move(rec));
    obs = std::move(r.obs);
    if (r.done) {
      log.plan_exhausted = r.info.plan_exhausted;
      break;
    }
  }
  log.elapsed = static_cast<double>(log.steps.size()) * env.dt();
  if (loco) log.displacement = loco->state().base.position() - base0.position();
  if (const auto* manip = dynamic_cast<const ManipEnv*>(&env)) {
    const Pose2 goal = manip->state().plan->pose_goals.back();
    const Pose2 obj = manip->state().object;
    log.terminal = PoseErrors{(obj.position() - goal.position()).norm(),
                              std::abs(WrapAngle(obj.theta - goal.theta))};
  }
  return log;
}

std::optional<double> ContactTrackingError(const EpisodeLog& log) {
  double sum = 0.0;
  int n = 0;
  for (const auto& s : log.steps) {
    for (std::size_t e = 0; e < s.contact_made.size(); ++e) {
      if (!s.contact_made[e]) continue;
      sum += s.make_error[e];
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

double PlanDeviation(const EpisodeLog& log) {
  const std::size_t rows = log.num_effectors;
  const std::size_t cols = log.steps.size();
  BitMatrix cmd(rows, cols), act(rows, cols);
  for (std::size_t t = 0; t < cols; ++t) {
    for (std::size_t e = 0; e < rows; ++e) {
      cmd.at(e, t) = log.steps[t].cmd_bits.at(e);
      act.at(e, t) = log.steps[t].act_bits.at(e);
    }
  }
  return HammingDeviation(cmd, act).mean;
}

MetricCell Summarize(const std::vector<double>& values) {
  MetricCell c;
  c.n = static_cast<int>(values.size());
  if (c.n == 0) {
    c.mean = std::nan("");
    c.stderr_ = std::nan("");
    return c;
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  c.mean = sum / c.n;
  double ss = 0.0;
  for (double v : values) ss += (v - c.mean) * (v - c.mean);
  c.stderr_ = c.n > 1 ? std::sqrt(ss / (c.n - 1) / c.n) : 0.0;
  return c;
}

void WriteCsv(std::ostream& os, const MetricTable& t) {
  for (const auto& a : t.label_names) os << a << ',';
  for (const auto& a : t.axis_names) os << a << ',';
  os << "mean,stderr,n,flagged\n";
  for (const auto& c : t.cells) {
    for (const auto& l : c.labels) os << l << ',';
    for (double a : c.axes) os << a << ',';
    if (c.n > 0) {
      os << c.mean << ',' << c.stderr_;
    } else {
      os << ',';
    }
    os << ',' << c.n << ',' << (c.flagged ? 1 : 0) << '\n';
  }
}

nlohmann::json TableToJson(const MetricTable& t) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : t.cells) {
    nlohmann::json j = {{"axes", c.axes}, {"labels", c.labels}, {"n", c.n},
                        {"flagged", c.flagged}};
    if (c.n > 0) {
      j["mean"] = c.mean;
      j["stderr"] = c.stderr_;
    } else {
      j["mean"] = nullptr;
      j["stderr"] = nullptr;
    }
    cells.push_back(std::move(j));
  }
  return {{"name", t.name},
          {"axes", t.axis_names},
          {"labels", t.label_names},
          {"metadata", t.metadata},
          {"cells", cells}};
}

std::vector<double> DefaultVelocityAxis() {
  std::vector<double> v;
  for (int i = -4; i <= 4; ++i) v.push_back(0.25 * i);
  return v;
}

std::vector<double> DefaultDurationAxis() {
  std::vector<double> v;
  for (int i = 0; i <= 7; ++i) v.push_back(0.2 + 0.1 * i);
  return v;
}

MetricTable VelocityGridEval(const ControllerFactory& make, const LocoEnvConfig& base,
                             const VelocityGridOptions& opt) {
  MetricTable t;
  t.name = "velocity_tracking_error";
  t.axis_names = {"vx", "vy"};
  t.metadata = {{"gait", GaitName(opt.gait)},
                {"duration", opt.duration},
                {"episodes", opt.episodes},
                {"trained_speed", opt.trained_speed},
                {"estimator", "displacement / episode time"}};
  int capped = 0;
  for (double vx : opt.vx) {
    for (double vy : opt.vy) {
      LocoEnvConfig cfg = base;
      cfg.gaits = {opt.gait};
      const VelocityCommand cmd = VelocityToParams(vx, vy, opt.duration, GaitPeriod(opt.gait));
      capped += cmd.stride_capped;
      cfg.fixed_params = cmd.params;
      std::vector<double> errs;
      for (int e = 0; e < opt.episodes; ++e) {
        const std::uint64_t s = EpisodeSeed(opt.seed, e);
        std::unique_ptr<LocoEnv> env;
        try {
          env = std::make_unique<LocoEnv>(cfg, s);
        } catch (const PlanInfeasibleError&) {
          break;
        }
        auto ctrl = make();
        const EpisodeLog log = RunEpisode(*env, *ctrl, s);
        const Vec2 v = log.displacement / log.elapsed;
        errs.push_back((v - Vec2(vx, vy)).norm());
      }
      MetricCell c = Summarize(errs);
      c.axes = {vx, vy};
      c.flagged = std::hypot(vx, vy) <= opt.trained_speed + 1e-12;
      t.cells.push_back(c);
    }
  }
  t.metadata["stride_capped_cells"] = capped;
  return t;
}

SweepTables DurationSweep(const std::vector<std::pair<std::string, ControllerFactory>>& policies,
                          const LocoEnvConfig& base, const DurationSweepOptions& opt) {
  SweepTables out;
  for (MetricTable* t : {&out.tracking, &out.hamming}) {
    t->label_names = {"policy", "gait"};
    t->axis_names = {"duration"};
    t->metadata = {{"episodes", opt.episodes},
                   {"hamming_normalization", "per-step mean over effectors"}};
  }
  out.tracking.name = "contact_tracking_error";
  out.hamming.name = "plan_deviation";
  for (const auto& [name, make] : policies) {
    for (GaitType g : opt.gaits) {
      for (double d : opt.durations) {
        std::vector<double> l2, ham;
        for (int e = 0; make && e < opt.episodes; ++e) {
          const std::uint64_t s = EpisodeSeed(opt.seed, e);
          LocoEnvConfig cfg = base;
          cfg.gaits = {g};
          cfg.ranges.duration = {d, d};
          LocoEnv env(cfg, s);
          auto ctrl = make();
          const EpisodeLog log = RunEpisode(env, *ctrl, s);
          if (auto err = ContactTrackingError(log)) l2.push_back(*err);
          ham.push_back(PlanDeviation(log));
        }
        MetricCell a = Summarize(l2), b = Summarize(ham);
        a.labels = b.labels = {name, GaitName(g)};
        a.axes = b.axes = {d};
        out.tracking.cells.push_back(a);
        out.hamming.cells.push_back(b);
      }
    }
  }
  return out;
}

MetricTable PoseErrorEval(const ControllerFactory& make, const ManipEnvConfig& base,
                          const PoseEvalOptions& opt) {
  ManipEnvConfig cfg = base;
  cfg.tasks = {opt.task};
  cfg.ranges = opt.ranges;
  std::vector<double> pos, rot;
  for (int e = 0; e < opt.episodes; ++e) {
    const std::uint64_t s = EpisodeSeed(opt.seed, e);
    ManipEnv env(cfg, s);
    auto ctrl = make();
    const EpisodeLog log = RunEpisode(env, *ctrl, s);
    pos.push_back(log.terminal->dp);
    rot.push_back(log.terminal->dtheta);
  }
  MetricTable t;
  t.name = "pose_error";
  t.label_names = {"task", "ranges", "metric"};
  MetricCell p = Summarize(pos), r = Summarize(rot);
  p.labels = {TaskName(opt.task), opt.ranges_name, "position_m"};
  r.labels = {TaskName(opt.task), opt.ranges_name, "rotation_rad"};
  t.cells = {p, r};
  t.metadata = {{"episodes", opt.episodes},
                {"x", {opt.ranges.x.lo, opt.ranges.x.hi}},
                {"y", {opt.ranges.y.lo, opt.ranges.y.hi}},
                {"yaw", {opt.ranges.yaw.lo, opt.ranges.yaw.hi}}};
  if (opt.task == ManipTask::kRepose) {
    const PoseErrors z = ZeroMotionBaseline(opt.ranges);
    t.metadata["zero_motion_baseline"] = {{"position_m", z.dp}, {"rotation_rad", z.dtheta}};
  } else {
    t.metadata["zero_motion_baseline"] = {
        {"position_m", 0.0},
        {"rotation_rad", std::abs(WrapAngle(cfg.n_rotations * std::numbers::pi / 4.0))}};
  }
  return t;
}

PoseErrors ZeroMotionBaseline(const PoseRanges& ranges) {
  const Range& x = ranges.x;
  const Range& y = ranges.y;
  PoseErrors z;
  const double area = (x.hi - x.lo) * (y.hi - y.lo);
  if (area > 0.0) {
    const double integral = RadialPrimitive(x.hi, y.hi) - RadialPrimitive(x.lo, y.hi) -
                            RadialPrimitive(x.hi, y.lo) + RadialPrimitive(x.lo, y.lo);
    z.dp = integral / area;
  } else {
    // Degenerate range: fall back to a dense midpoint rule along the open axis.
    constexpr int kN = 4096;
    double sum = 0.0;
    for (int i = 0; i < kN; ++i) {
      const double f = (i + 0.5) / kN;
      sum += std::hypot(x.lo + f * (x.hi - x.lo), y.lo + f * (y.hi - y.lo));
    }
    z.dp = sum / kN;
  }
  z.dtheta = MeanAbsUniform(ranges.yaw.lo, ranges.yaw.hi);
  return z;
}

}  // namespace cerl
