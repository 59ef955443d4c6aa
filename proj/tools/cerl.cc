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

// Command-line entry point.
//
// Exit codes: 0 ok, 1 check failure or infeasible plan, 2 usage or config
// error, 3 training aborted, 4 artifact mismatch (layout or config digest).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cerl/checkpoint.h"
#include "cerl/config.h"
#include "cerl/eval.h"
#include "cerl/gait_planner.h"
#include "cerl/manip_planner.h"
#include "cerl/self_check.h"

namespace fs = std::filesystem;
using namespace cerl;

namespace {

constexpr int kOk = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;
constexpr int kAbort = 3;
constexpr int kMismatch = 4;

std::string Hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t FileHash(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return Fnv1a(bytes.data(), bytes.size());
}

void WriteText(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
}

// ---------------------------------------------------------------- plan

struct PlanArgs {
  std::string gait, task;
  double vx = 0.0, vy = 0.0, duration = 0.35;
  int horizon = 8;
  std::uint64_t seed = 1;
  int rotations = 2, targets = 3;
  std::string ranges = "trained";
  std::string out;
};

int CmdPlan(const PlanArgs& a) {
  if (a.gait.empty() == a.task.empty()) {
    std::cerr << "plan: give exactly one of --gait or --task\n";
    return kUsage;
  }
  nlohmann::json j;
  try {
    if (!a.gait.empty()) {
      const GaitType g = GaitFromName(a.gait);
      const VelocityCommand cmd = VelocityToParams(a.vx, a.vy, a.duration, GaitPeriod(g));
      const FootLayout layout;
      const ContactPlan plan = BuildPlan(g, cmd.params, layout, a.horizon, Pose2{}, {});
      CheckPlanFeasibility(g, cmd.params, layout, plan, Pose2{}, 0.1, 0.0);
      j = PlanToJson(plan);
      j["gait"] = a.gait;
      j["seed"] = a.seed;
      j["stride_capped"] = cmd.stride_capped;
      if (cmd.stride_capped) {
        std::cerr << "plan: requested stride " << cmd.requested_stride
                  << " m exceeds the cap; velocity reduced\n";
      }
    } else {
      const ManipTask task = TaskFromName(a.task);
      const ObjectSpec spec = ObjectSpec::Box(0.12, 0.08);
      if (task == ManipTask::kRepose) {
        PoseRanges r;
        if (a.ranges == "trained") {
          r = PoseRanges::Trained();
        } else if (a.ranges == "evaluated") {
          r = PoseRanges::Evaluated();
        } else {
          std::cerr << "plan: --ranges must be trained or evaluated\n";
          return kUsage;
        }
        j = ManipPlanToJson(ReposePlan(spec, Pose2{}, a.targets, r, a.seed, {}));
      } else {
        j = ManipPlanToJson(ReorientPlan(spec, Pose2{}, a.rotations, a.seed));
      }
      j["task"] = a.task;
      j["seed"] = a.seed;
    }
  } catch (const PlanInfeasibleError& e) {
    std::cerr << "plan infeasible: " << e.what() << "\n";
    return kFail;
  } catch (const std::invalid_argument& e) {
    std::cerr << "plan: " << e.what() << "\n";
    return kUsage;
  }
  const std::string text = j.dump(2) + "\n";
  if (a.out.empty()) {
    std::cout << text;
  } else {
    WriteText(a.out, text);
  }
  return kOk;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string config, out, resume;
};

int CmdTrain(const TrainArgs& a) {
  RunConfig cfg = LoadRunConfig(a.config);
  if (!a.out.empty()) cfg.output_dir = a.out;
  const fs::path dir = cfg.output_dir;
  fs::create_directories(dir);
  const std::uint64_t digest = ConfigDigest(cfg);
  WriteText(dir / "resolved_config.json", ResolvedConfig(cfg).dump(2) + "\n");

  std::optional<Checkpoint> resume;
  if (!a.resume.empty()) {
    try {
      resume = LoadCheckpoint(a.resume, cfg.policy.layout_hash, digest);
    } catch (const CheckpointError& e) {
      std::cerr << "train: cannot resume: " << e.what() << "\n";
      return kMismatch;
    }
  }
  std::ofstream log(dir / "train_log.csv", resume ? std::ios::app : std::ios::trunc);
  if (!resume) WriteLogHeader(log);
  std::int64_t next_ckpt = cfg.checkpoint_every > 0
                               ? (resume ? resume->step : 0) + cfg.checkpoint_every
                               : -1;
  IterationStats last;
  try {
    TrainOutcome out = RunTraining(
        cfg,
        [&](const IterationStats& s, const PpoTrainer& tr) {
          last = s;
          WriteLogRow(log, s);
          log.flush();
          std::cerr << "step " << s.step << " reward " << s.mean_reward << "\n";
          if (next_ckpt > 0 && s.step >= next_ckpt) {
            SaveCheckpoint({tr.policy(), tr.adam(), tr.env_steps(), digest},
                           (dir / ("ckpt_" + std::to_string(s.step) + ".cfg1")).string());
            next_ckpt += cfg.checkpoint_every;
          }
        },
        resume ? &*resume : nullptr);
    SaveCheckpoint(out.checkpoint, (dir / "final.cfg1").string());
  } catch (const TrainAbort& e) {
    std::ostringstream diag;
    diag << "training aborted: " << e.what() << "\nlast completed iteration: step "
         << last.step << " mean_reward " << last.mean_reward << " approx_kl "
         << last.loss.approx_kl << "\n";
    WriteText(dir / "abort_diagnostics.txt", diag.str());
    std::cerr << diag.str();
    return kAbort;
  }
  std::cout << "wrote " << (dir / "final.cfg1").string() << "\n";
  return kOk;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::string config, checkpoint, out = "eval_out", ranges = "evaluated", task = "repose";
  std::vector<std::string> policies;
  std::string gaits = "all";
  int episodes = 0;
  std::uint64_t seed = 0;
};

RunConfig EvalConfig(const EvalArgs& a) {
  return a.config.empty() ? RunConfig{} : LoadRunConfig(a.config);
}

ControllerFactory FactoryFor(const Checkpoint& ck) {
  auto policy = std::make_shared<Policy>(ck.policy);
  return [policy] { return std::make_unique<PolicyController>(policy.get()); };
}

void Emit(const fs::path& stem, const MetricTable& t, const nlohmann::json& extra) {
  std::ostringstream csv;
  WriteCsv(csv, t);
  WriteText(stem.string() + ".csv", csv.str());
  nlohmann::json j = TableToJson(t);
  j["metadata"].update(extra);
  WriteText(stem.string() + ".json", j.dump(2) + "\n");
  std::cout << "wrote " << stem.string() << ".{csv,json}\n";
}

int CmdEvalVelocity(const EvalArgs& a) {
  RunConfig cfg = EvalConfig(a);
  const Checkpoint ck = LoadCheckpoint(a.checkpoint, LocoEnv(cfg.loco, 0).layout_hash());
  VelocityGridOptions opt;
  opt.vx = cfg.eval.vx;
  opt.vy = cfg.eval.vy;
  opt.episodes = a.episodes > 0 ? a.episodes : cfg.eval.episodes;
  opt.seed = a.seed;
  opt.duration = 0.5 * (cfg.loco.ranges.duration.lo + cfg.loco.ranges.duration.hi);
  const MetricTable t = VelocityGridEval(FactoryFor(ck), cfg.loco, opt);
  const std::string tag = Hex(ConfigDigest(cfg)) + "_" + Hex(FileHash(a.checkpoint));
  Emit(fs::path(a.out) / ("velocity_grid_" + tag), t, {{"checkpoint", a.checkpoint}});
  return kOk;
}

int CmdEvalSweep(const EvalArgs& a) {
  RunConfig cfg = EvalConfig(a);
  const std::uint64_t layout = LocoEnv(cfg.loco, 0).layout_hash();
  std::vector<std::pair<std::string, ControllerFactory>> policies;
  nlohmann::json sources = nlohmann::json::object();
  std::uint64_t combined = 0;
  for (const auto& spec : a.policies) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) throw CLI::ValidationError("--policy expects name=path");
    const std::string name = spec.substr(0, eq), path = spec.substr(eq + 1);
    sources[name] = path;
    if (!fs::exists(path)) {
      std::cerr << "eval: missing checkpoint " << path << " for " << name << "\n";
      policies.emplace_back(name, nullptr);
      continue;
    }
    combined ^= FileHash(path);
    policies.emplace_back(name, FactoryFor(LoadCheckpoint(path, layout)));
  }
  DurationSweepOptions opt;
  if (a.gaits != "all") {
    opt.gaits.clear();
    std::stringstream ss(a.gaits);
    for (std::string g; std::getline(ss, g, ',');) opt.gaits.push_back(GaitFromName(g));
  } else {
    opt.gaits = cfg.eval.gaits;
  }
  opt.durations = cfg.eval.durations;
  opt.episodes = a.episodes > 0 ? a.episodes : cfg.eval.episodes;
  opt.seed = a.seed;
  const SweepTables t = DurationSweep(policies, cfg.loco, opt);
  const std::string tag = Hex(ConfigDigest(cfg)) + "_" + Hex(combined);
  Emit(fs::path(a.out) / ("duration_sweep_l2_" + tag), t.tracking, {{"policies", sources}});
  Emit(fs::path(a.out) / ("duration_sweep_hamming_" + tag), t.hamming, {{"policies", sources}});
  return kOk;
}

int CmdEvalPose(const EvalArgs& a) {
  RunConfig cfg = EvalConfig(a);
  const Checkpoint ck = LoadCheckpoint(a.checkpoint, ManipEnv(cfg.manip, 0).layout_hash());
  PoseEvalOptions opt;
  opt.task = TaskFromName(a.task);
  if (a.ranges == "trained") {
    opt.ranges = PoseRanges::Trained();
  } else if (a.ranges == "evaluated") {
    opt.ranges = PoseRanges::Evaluated();
  } else {
    throw CLI::ValidationError("--ranges must be trained or evaluated");
  }
  opt.ranges_name = a.ranges;
  opt.episodes = a.episodes > 0 ? a.episodes : cfg.eval.episodes;
  opt.seed = a.seed;
  const MetricTable t = PoseErrorEval(FactoryFor(ck), cfg.manip, opt);
  const std::string tag = Hex(ConfigDigest(cfg)) + "_" + Hex(FileHash(a.checkpoint));
  Emit(fs::path(a.out) / ("pose_" + a.task + "_" + a.ranges + "_" + tag), t,
       {{"checkpoint", a.checkpoint}});
  return kOk;
}

// ---------------------------------------------------------------- check

int CmdCheck(const std::string& inject, bool quick) {
  const CheckTargets targets = MutatedTargets(inject);
  bool all = true;
  for (const CheckResult& r : RunAllChecks(targets, quick)) {
    std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
    all = all && r.pass;
  }
  return all ? kOk : kFail;
}

int CmdInspect(const std::string& path) {
  const Checkpoint ck = LoadCheckpoint(path);
  nlohmann::json tensors = nlohmann::json::array();
  for (const auto& t : ck.policy.tensors()) tensors.push_back({t.name, t.rows, t.cols});
  const nlohmann::json j = {{"magic", "CFG1"},
                            {"version", kCheckpointVersion},
                            {"layout_hash", Hex(ck.policy.arch().layout_hash)},
                            {"config_digest", Hex(ck.config_digest)},
                            {"step", ck.step},
                            {"optimizer_steps", ck.adam.t},
                            {"parameters", ck.policy.params().size()},
                            {"architecture", ck.policy.arch()},
                            {"tensors", tensors},
                            {"file_hash", Hex(FileHash(path))}};
  std::cout << j.dump(2) << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contact-goal RL toolkit: planning, training, evaluation and checks.\n"
               "Thread count for batch stepping: CERL_THREADS (non-deterministic runs)."};
  app.require_subcommand(1);

  PlanArgs pa;
  auto* plan = app.add_subcommand("plan", "Emit a contact plan as JSON");
  plan->add_option("--gait", pa.gait, "trot, pace, bound, jump or crawl");
  plan->add_option("--task", pa.task, "repose or reorient");
  plan->add_option("--vx", pa.vx, "Commanded x velocity (m/s)");
  plan->add_option("--vy", pa.vy, "Commanded y velocity (m/s)");
  plan->add_option("--duration", pa.duration, "Command duration S (s)");
  plan->add_option("--horizon", pa.horizon, "Number of contact switches");
  plan->add_option("--seed", pa.seed, "Plan seed");
  plan->add_option("--rotations", pa.rotations, "Reorient: number of 45 degree turns");
  plan->add_option("--targets", pa.targets, "Repose: number of pose targets");
  plan->add_option("--ranges", pa.ranges, "Repose sampling ranges: trained|evaluated");
  plan->add_option("-o,--out", pa.out, "Output file (default stdout)");

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Train a policy from a run config");
  train->add_option("--config", ta.config, "Run config JSON")->required();
  train->add_option("--out", ta.out, "Output directory (overrides output.dir)");
  train->add_option("--resume", ta.resume, "Checkpoint to continue from");

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Evaluate checkpoints");
  eval->require_subcommand(1);
  auto common = [&](CLI::App* c) {
    c->add_option("--config", ea.config, "Run config JSON (environment settings)");
    c->add_option("--episodes", ea.episodes, "Episodes per cell (default from config)");
    c->add_option("--seed", ea.seed, "Evaluation seed");
    c->add_option("--out", ea.out, "Output directory");
  };
  auto* vgrid = eval->add_subcommand("velocity-grid", "Velocity tracking error grid");
  common(vgrid);
  vgrid->add_option("--checkpoint", ea.checkpoint, "Locomotion checkpoint")->required();
  auto* sweep = eval->add_subcommand("duration-sweep", "Command duration sweep");
  common(sweep);
  sweep->add_option("--policy", ea.policies, "name=checkpoint (repeatable)")->required();
  sweep->add_option("--gaits", ea.gaits, "Comma list or 'all'");
  auto* pose = eval->add_subcommand("pose", "Terminal object pose errors");
  common(pose);
  pose->add_option("--checkpoint", ea.checkpoint, "Manipulation checkpoint")->required();
  pose->add_option("--ranges", ea.ranges, "trained|evaluated");
  pose->add_option("--task", ea.task, "repose|reorient");

  std::string inject;
  bool quick = false;
  auto* check = app.add_subcommand("check", "Run the built-in verification checks");
  check->add_option("--inject", inject, "Simulated defect: hold-sign|phase-boundary");
  check->add_flag("--quick", quick, "Smaller sample counts");

  std::string inspect_path;
  auto* inspect = app.add_subcommand("inspect-checkpoint", "Print checkpoint metadata");
  inspect->add_option("path", inspect_path, "Checkpoint file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*plan) return CmdPlan(pa);
    if (*train) return CmdTrain(ta);
    if (*vgrid) return CmdEvalVelocity(ea);
    if (*sweep) return CmdEvalSweep(ea);
    if (*pose) return CmdEvalPose(ea);
    if (*check) return CmdCheck(inject, quick);
    if (*inspect) return CmdInspect(inspect_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const CheckpointError& e) {
    std::cerr << "checkpoint error: " << e.what() << "\n";
    return kMismatch;
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFail;
  }
  return kUsage;
}
