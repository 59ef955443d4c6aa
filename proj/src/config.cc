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

#include "cerl/config.h"

#include <fstream>
#include <functional>

#include "cerl/json_util.h"
#include "cerl/random.h"

namespace cerl {

const char* EnvTypeName(EnvType t) {
  switch (t) {
    case EnvType::kLoco:
      return "loco";
    case EnvType::kManip:
      return "manip";
    case EnvType::kReach:
      return "reach";
  }
  return "?";
}

void RunConfig::Validate() const {
  switch (env_type) {
    case EnvType::kLoco:
      loco.Validate();
      break;
    case EnvType::kManip:
      manip.Validate();
      break;
    case EnvType::kReach:
      reach.Validate();
      break;
  }
  policy.Validate();
  train.Validate();
  if (eval.episodes < 1) throw std::invalid_argument("eval.episodes must be >= 1");
  if (checkpoint_every < 0) throw std::invalid_argument("output.checkpoint_every >= 0");
}

RunConfig RunConfigFromJson(const nlohmann::json& j) {
  RunConfig c;
  try {
    json_util::RejectUnknown(j, {"env", "reward", "policy", "train", "eval", "output",
                                 "deterministic"},
                             "config");
    if (j.contains("env")) {
      const auto& e = j.at("env");
      const std::string type = e.value("type", "loco");
      if (type == "loco") {
        c.env_type = EnvType::kLoco;
        e.get_to(c.loco);
      } else if (type == "manip") {
        c.env_type = EnvType::kManip;
        e.get_to(c.manip);
      } else if (type == "reach") {
        c.env_type = EnvType::kReach;
        e.get_to(c.reach);
      } else {
        throw std::invalid_argument("env.type must be loco, manip or reach");
      }
    }
    if (c.env_type == EnvType::kReach) c.reward = c.reach.reward;
    if (j.contains("reward")) j.at("reward").get_to(c.reward);
    c.loco.reward = c.manip.reward = c.reach.reward = c.reward;
    if (j.contains("policy")) {
      const auto& p = j.at("policy");
      json_util::RejectUnknown(p, {"hidden", "recurrent", "gru_size", "init_log_std"},
                               "policy");
      json_util::Get(p, "hidden", c.policy.hidden);
      json_util::Get(p, "recurrent", c.policy.recurrent);
      json_util::Get(p, "gru_size", c.policy.gru_size);
      json_util::Get(p, "init_log_std", c.policy.init_log_std);
    }
    if (j.contains("train")) j.at("train").get_to(c.train);
    if (j.contains("eval")) {
      const auto& e = j.at("eval");
      json_util::RejectUnknown(e, {"episodes", "vx", "vy", "durations", "gaits"}, "eval");
      json_util::Get(e, "episodes", c.eval.episodes);
      json_util::Get(e, "vx", c.eval.vx);
      json_util::Get(e, "vy", c.eval.vy);
      json_util::Get(e, "durations", c.eval.durations);
      if (e.contains("gaits")) {
        c.eval.gaits.clear();
        for (const auto& g : e.at("gaits")) c.eval.gaits.push_back(GaitFromName(g));
      }
    }
    if (j.contains("output")) {
      const auto& o = j.at("output");
      json_util::RejectUnknown(o, {"dir", "checkpoint_every"}, "output");
      json_util::Get(o, "dir", c.output_dir);
      json_util::Get(o, "checkpoint_every", c.checkpoint_every);
    }
    json_util::Get(j, "deterministic", c.deterministic);
    c.policy = BoundArch(c);
    c.Validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return c;
}

RunConfig LoadRunConfig(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return RunConfigFromJson(j);
}

nlohmann::json ResolvedConfig(const RunConfig& c) {
  nlohmann::json env;
  switch (c.env_type) {
    case EnvType::kLoco:
      env = c.loco;
      break;
    case EnvType::kManip:
      env = c.manip;
      break;
    case EnvType::kReach:
      env = c.reach;
      break;
  }
  std::vector<std::string> gaits;
  for (auto g : c.eval.gaits) gaits.push_back(GaitName(g));
  return {{"env", env},
          {"reward", c.reward},
          {"policy",
           {{"hidden", c.policy.hidden},
            {"recurrent", c.policy.recurrent},
            {"gru_size", c.policy.gru_size},
            {"init_log_std", c.policy.init_log_std}}},
          {"train", c.train},
          {"eval",
           {{"episodes", c.eval.episodes},
            {"vx", c.eval.vx},
            {"vy", c.eval.vy},
            {"durations", c.eval.durations},
            {"gaits", gaits}}},
          {"output", {{"dir", c.output_dir}, {"checkpoint_every", c.checkpoint_every}}},
          {"deterministic", c.deterministic}};
}

std::uint64_t ConfigDigest(const RunConfig& c) {
  const std::string s = ResolvedConfig(c).dump();
  return Fnv1a(s.data(), s.size());
}

std::unique_ptr<Env> MakeEnv(const RunConfig& c, std::uint64_t seed) {
  switch (c.env_type) {
    case EnvType::kLoco:
      return std::make_unique<LocoEnv>(c.loco, seed);
    case EnvType::kManip:
      return std::make_unique<ManipEnv>(c.manip, seed);
    case EnvType::kReach:
      return std::make_unique<ReachEnv>(c.reach, seed);
  }
  throw ConfigError("unknown env type");
}

VecEnv MakeVecEnv(const RunConfig& c) {
  std::vector<std::unique_ptr<Env>> envs;
  for (int i = 0; i < c.train.num_envs; ++i) {
    envs.push_back(MakeEnv(c, Rng::SplitMix(c.train.seed * 0x100000001b3ULL + i)));
  }
  const int workers = c.deterministic ? 1 : WorkersFromEnvironment();
  return VecEnv(std::move(envs), Rng::SplitMix(c.train.seed ^ 0x76656eULL), workers);
}

PolicyArch BoundArch(const RunConfig& c) {
  PolicyArch a = c.policy;
  const auto env = MakeEnv(c, 0);
  a.obs_size = env->obs_size();
  a.act_size = env->act_size();
  a.layout_hash = env->layout_hash();
  return a;
}

TrainOutcome RunTraining(
    const RunConfig& c,
    const std::function<void(const IterationStats&, const PpoTrainer&)>& on_iter,
    const Checkpoint* resume) {
  VecEnv envs = MakeVecEnv(c);
  PpoTrainer trainer(c.train, Policy(c.policy, c.train.seed), &envs);
  if (resume) {
    resume->policy.CheckLayout(envs.layout_hash());
    trainer.policy() = resume->policy;
    trainer.set_adam(resume->adam);
    trainer.set_env_steps(resume->step);
  }
  TrainOutcome out;
  trainer.Train([&](const IterationStats& s) {
    out.stats.push_back(s);
    if (on_iter) on_iter(s, trainer);
  });
  out.checkpoint = {trainer.policy(), trainer.adam(), trainer.env_steps(), ConfigDigest(c)};
  return out;
}

}  // namespace cerl
