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

#ifndef CERL_SELF_CHECK_H_
#define CERL_SELF_CHECK_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cerl/contact.h"
#include "cerl/reward.h"

namespace cerl {

struct CheckResult {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

// The functions under test. Defaults are the library implementations;
// replacing one simulates a defect.
struct CheckTargets {
  std::function<double(const EffectorSnapshot&, const RewardConfig&)> reach = ReachReward;
  std::function<double(const EffectorSnapshot&, const RewardConfig&)> hold = HoldReward;
  std::function<double(const EffectorSnapshot&, const RewardConfig&)> detach = DetachReward;
  std::function<double(double, double, const RewardConfig&)> pose = PoseReward;
  std::function<ContactPhase(int, double, double)> phase = PhaseOf;
};

// Named defects for demonstrating that the checks bite: "hold-sign",
// "phase-boundary". Throws std::invalid_argument on an unknown name.
CheckTargets MutatedTargets(const std::string& mutation);

// Engine versus a direct transcription of the contact rewards on random
// snapshots; measured = max absolute difference.
CheckResult RewardOracleCheck(const CheckTargets& t, int samples = 10000,
                              std::uint64_t seed = 1);
// Phase rules on indicator x s in {0, d/2, d, d+eps, S}; measured = mismatches.
CheckResult PhaseGridCheck(const CheckTargets& t);
// Full PPO loss on random tiny networks; measured = worst relative error.
CheckResult FiniteDiffGradientCheck(int networks = 10, std::uint64_t seed = 7);
// GAE against the brute-force discounted sum; measured = worst abs error.
CheckResult GaeOracleCheck(std::uint64_t seed = 11);
// Scripted oracle in both environments; measured = worst plan deviation,
// detail carries the worst tracking error.
CheckResult OraclePipelineCheck(int seeds_per_task = 100, std::uint64_t seed = 3);

std::vector<CheckResult> RunAllChecks(const CheckTargets& t, bool quick = false);

}  // namespace cerl

#endif  // CERL_SELF_CHECK_H_
