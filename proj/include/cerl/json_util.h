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

#ifndef CERL_JSON_UTIL_H_
#define CERL_JSON_UTIL_H_

#include <set>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

namespace cerl::json_util {

inline void RejectUnknown(const nlohmann::json& j,
                          const std::set<std::string>& keys,
                          const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument(where + ": expected an object");
  for (const auto& [k, v] : j.items()) {
    if (!keys.count(k)) {
      throw std::invalid_argument(where + ": unknown key '" + k + "'");
    }
  }
}

template <typename T>
void Get(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace cerl::json_util

#endif  // CERL_JSON_UTIL_H_
