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

#ifndef CERL_CHECKPOINT_H_
#define CERL_CHECKPOINT_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cerl/policy.h"
#include "cerl/ppo.h"

namespace cerl {

inline constexpr char kCheckpointMagic[4] = {'C', 'F', 'G', '1'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  Policy policy;
  AdamState adam;
  std::int64_t step = 0;
  std::uint64_t config_digest = 0;
};

std::vector<std::uint8_t> SerializeCheckpoint(const Checkpoint& ck);

// Throws CheckpointError on bad magic, version, checksum, truncation or a
// mismatching layout hash / config digest when those are given.
Checkpoint DeserializeCheckpoint(const std::vector<std::uint8_t>& bytes,
                                 std::optional<std::uint64_t> layout_hash = std::nullopt,
                                 std::optional<std::uint64_t> config_digest = std::nullopt);

void SaveCheckpoint(const Checkpoint& ck, const std::string& path);
Checkpoint LoadCheckpoint(const std::string& path,
                          std::optional<std::uint64_t> layout_hash = std::nullopt,
                          std::optional<std::uint64_t> config_digest = std::nullopt);

}  // namespace cerl

#endif  // CERL_CHECKPOINT_H_
