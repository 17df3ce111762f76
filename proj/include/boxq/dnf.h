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

#ifndef BOXQ_DNF_H_
#define BOXQ_DNF_H_

#include <cstddef>
#include <vector>

#include "boxq/computation_graph.h"

namespace boxq {

struct DnfResult {
  // Union-free graphs whose answer sets, unioned, equal the input's.
  std::vector<ComputationGraph> branches;
  std::size_t count = 0;
};

// Moves every union to the final step. For each combination of one parent
// per union node (enumerated lexicographically by union-node id, then parent
// id) the union edges are dropped and each union node is merged into its
// chosen parent, which keeps its id. Nodes that no longer reach the target
// are pruned. Slot vectors are copied unchanged so bindings stay valid.
DnfResult ToDnf(const ComputationGraph& g);

}  // namespace boxq

#endif  // BOXQ_DNF_H_
