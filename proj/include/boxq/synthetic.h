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

#ifndef BOXQ_SYNTHETIC_H_
#define BOXQ_SYNTHETIC_H_

#include <cstddef>
#include <string_view>
#include <vector>

#include "boxq/knowledge_graph.h"

namespace boxq {

enum class SyntheticKind { kChain, kTree, kBipartite };

SyntheticKind ParseSyntheticKind(std::string_view name);

// Small deterministic graphs with n entities:
//   chain      n0 -next-> n1 -next-> ... -next-> n{n-1}
//   tree       complete ternary tree, node i -child-> 3i+1, 3i+2, 3i+3
//   bipartite  halves l* and r*; "pair" is the bijection l_i -> r_i and
//              "fan" links the first tenth of l* (at least one) to all of r*
std::vector<NamedTriple> SynthesizeKg(SyntheticKind kind, std::size_t n);

}  // namespace boxq

#endif  // BOXQ_SYNTHETIC_H_
