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

#include "boxq/dnf.h"

#include <algorithm>
#include <map>
#include <set>

namespace boxq {

DnfResult ToDnf(const ComputationGraph& g) {
  std::map<int, std::vector<int>> parents;  // union node -> sorted parents
  for (const Edge& e : g.edges) {
    if (e.op == EdgeOp::kUnion) parents[e.dst].push_back(e.src);
  }
  if (parents.empty()) return {{g}, 1};
  for (auto& [node, p] : parents) {
    std::sort(p.begin(), p.end());
    p.erase(std::unique(p.begin(), p.end()), p.end());
  }
  std::vector<int> union_nodes;
  std::size_t total = 1;
  for (const auto& [node, p] : parents) {
    union_nodes.push_back(node);
    total *= p.size();
  }

  DnfResult result;
  result.count = total;
  result.branches.reserve(total);
  // Odometer over parent choices; the first union node is the most
  // significant digit.
  std::vector<std::size_t> digit(union_nodes.size(), 0);
  for (std::size_t b = 0; b < total; ++b) {
    std::map<int, int> chosen;
    for (std::size_t u = 0; u < union_nodes.size(); ++u) {
      chosen[union_nodes[u]] = parents[union_nodes[u]][digit[u]];
    }
    auto rep = [&chosen](int id) {
      for (auto it = chosen.find(id); it != chosen.end();
           it = chosen.find(id)) {
        id = it->second;
      }
      return id;
    };

    ComputationGraph branch;
    branch.anchors = g.anchors;
    branch.relations = g.relations;
    std::set<int> targets;
    for (const Node& n : g.nodes) {
      if (n.kind == NodeKind::kTarget) targets.insert(rep(n.id));
    }
    for (const Edge& e : g.edges) {
      if (e.op == EdgeOp::kUnion) continue;
      Edge moved = e;
      moved.src = rep(e.src);
      moved.dst = rep(e.dst);
      branch.edges.push_back(moved);
    }
    // Keep only nodes that still reach the target.
    std::set<int> alive(targets.begin(), targets.end());
    for (bool grew = true; grew;) {
      grew = false;
      for (const Edge& e : branch.edges) {
        if (alive.contains(e.dst) && alive.insert(e.src).second) grew = true;
      }
    }
    std::erase_if(branch.edges, [&alive](const Edge& e) {
      return !alive.contains(e.src) || !alive.contains(e.dst);
    });
    for (const Node& n : g.nodes) {
      if (chosen.contains(n.id) || !alive.contains(n.id)) continue;
      Node kept = n;
      if (targets.contains(n.id)) kept.kind = NodeKind::kTarget;
      branch.nodes.push_back(kept);
    }
    result.branches.push_back(std::move(branch));

    for (std::size_t u = union_nodes.size(); u-- > 0;) {
      if (++digit[u] < parents[union_nodes[u]].size()) break;
      digit[u] = 0;
    }
  }
  return result;
}

}  // namespace boxq
