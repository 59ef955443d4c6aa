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

#include "cerl/env.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "cerl/random.h"

namespace cerl {

std::uint64_t LayoutHash(const std::string& tag, std::span<const ObsField> fields) {
  std::string desc = tag;
  for (const auto& f : fields) {
    desc += ';';
    desc += f.name;
    desc += ':';
    desc += std::to_string(f.size);
  }
  return Fnv1a(desc.data(), desc.size());
}

int LayoutSize(std::span<const ObsField> fields) {
  int n = 0;
  for (const auto& f : fields) n += f.size;
  return n;
}

std::vector<double> CheckedAction(std::span<const double> action, int size) {
  if (static_cast<int>(action.size()) != size) {
    throw EnvError("action has " + std::to_string(action.size()) +
                   " entries, expected " + std::to_string(size));
  }
  std::vector<double> a(action.begin(), action.end());
  for (double& x : a) {
    if (!std::isfinite(x)) throw EnvError("non-finite action entry");
    x = std::clamp(x, -1.0, 1.0);
  }
  return a;
}

}  // namespace cerl
