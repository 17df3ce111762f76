/*
 * Copyright 2026 The boxq Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "boxq/synthetic.h"

#include <algorithm>
#include <string>

namespace boxq {

SyntheticKind ParseSyntheticKind(std::string_view name) {
  if (name == "chain") return SyntheticKind::kChain;
  if (name == "tree") return SyntheticKind::kTree;
  if (name == "bipartite") return SyntheticKind::kBipartite;
  throw ArgumentError("unknown synthetic graph '" + std::string(name) +
                      "' (chain|tree|bipartite)");
}

std::vector<NamedTriple> SynthesizeKg(SyntheticKind kind, std::size_t n) {
  if (n < 2) throw ArgumentError("synthetic graph needs at least 2 entities");
  std::vector<NamedTriple> out;
  auto node = [](const char* prefix, std::size_t i) {
    return prefix + std::to_string(i);
  };
  switch (kind) {
    case SyntheticKind::kChain:
      for (std::size_t i = 0; i + 1 < n; ++i) {
        out.push_back({node("n", i), "next", node("n", i + 1)});
      }
      break;
    case SyntheticKind::kTree:
      for (std::size_t i = 1; i < n; ++i) {
        out.push_back({node("n", (i - 1) / 3), "child", node("n", i)});
      }
      break;
    case SyntheticKind::kBipartite: {
      const std::size_t half = n / 2;
      const std::size_t right = n - half;
      for (std::size_t i = 0; i < half; ++i) {
        out.push_back({node("l", i), "pair", node("r", i)});
      }
      const std::size_t hubs = std::max<std::size_t>(1, half / 10);
      for (std::size_t i = 0; i < hubs; ++i) {
        for (std::size_t j = 0; j < right; ++j) {
          out.push_back({node("l", i), "fan", node("r", j)});
        }
      }
      break;
    }
  }
  return out;
}

}  // namespace boxq
