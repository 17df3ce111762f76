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

#include "boxq/computation_graph.h"

#include <algorithm>
#include <charconv>
#include <map>
#include <set>

namespace boxq {

const Node* ComputationGraph::FindNode(int id) const {
  for (const Node& n : nodes) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

std::vector<const Edge*> ComputationGraph::InEdges(int id) const {
  std::vector<const Edge*> out;
  for (const Edge& e : edges) {
    if (e.dst == id) out.push_back(&e);
  }
  return out;
}

std::vector<const Edge*> ComputationGraph::OutEdges(int id) const {
  std::vector<const Edge*> out;
  for (const Edge& e : edges) {
    if (e.src == id) out.push_back(&e);
  }
  return out;
}

bool ComputationGraph::HasUnion() const {
  return std::any_of(edges.begin(), edges.end(),
                     [](const Edge& e) { return e.op == EdgeOp::kUnion; });
}

bool ComputationGraph::Grounded() const {
  auto bound = [](const auto& slot) { return slot.has_value(); };
  return std::all_of(anchors.begin(), anchors.end(), bound) &&
         std::all_of(relations.begin(), relations.end(), bound);
}

int ComputationGraph::Target() const {
  for (const Node& n : nodes) {
    if (n.kind == NodeKind::kTarget) return n.id;
  }
  return -1;
}

std::vector<int> ComputationGraph::TopologicalOrder() const {
  std::map<int, int> indegree;
  for (const Node& n : nodes) indegree[n.id] = 0;
  for (const Edge& e : edges) {
    if (indegree.contains(e.dst) && indegree.contains(e.src)) ++indegree[e.dst];
  }
  // Kahn's algorithm with a sorted frontier so the order is deterministic.
  std::set<int> ready;
  for (const auto& [id, deg] : indegree) {
    if (deg == 0) ready.insert(id);
  }
  std::vector<int> order;
  while (!ready.empty()) {
    const int id = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(id);
    for (const Edge& e : edges) {
      if (e.src != id || !indegree.contains(e.dst)) continue;
      if (--indegree[e.dst] == 0) ready.insert(e.dst);
    }
  }
  if (order.size() != nodes.size()) {
    throw ContractViolation("computation graph is not acyclic");
  }
  return order;
}

EntityId ComputationGraph::AnchorEntity(const Node& node) const {
  if (node.kind != NodeKind::kAnchor || node.anchor_slot < 0 ||
      static_cast<std::size_t>(node.anchor_slot) >= anchors.size() ||
      !anchors[node.anchor_slot]) {
    throw ContractViolation("anchor node " + std::to_string(node.id) +
                            " is not bound");
  }
  return *anchors[node.anchor_slot];
}

RelationId ComputationGraph::EdgeRelation(const Edge& edge) const {
  if (edge.op != EdgeOp::kProjection || edge.relation_slot < 0 ||
      static_cast<std::size_t>(edge.relation_slot) >= relations.size() ||
      !relations[edge.relation_slot]) {
    throw ContractViolation("projection edge " + std::to_string(edge.src) +
                            "->" + std::to_string(edge.dst) + " is not bound");
  }
  return *relations[edge.relation_slot];
}

std::vector<std::string> ValidateDag(const ComputationGraph& g) {
  std::vector<std::string> violations;
  std::set<int> ids;
  for (const Node& n : g.nodes) {
    if (!ids.insert(n.id).second) {
      violations.push_back("duplicate node id " + std::to_string(n.id));
    }
    if (n.kind == NodeKind::kAnchor &&
        (n.anchor_slot < 0 ||
         static_cast<std::size_t>(n.anchor_slot) >= g.anchors.size())) {
      violations.push_back("bad slot: anchor node " + std::to_string(n.id));
    }
  }
  bool dangling = false;
  for (const Edge& e : g.edges) {
    if (!ids.contains(e.src) || !ids.contains(e.dst)) {
      violations.push_back("dangling edge " + std::to_string(e.src) + "->" +
                           std::to_string(e.dst));
      dangling = true;
    }
    if (e.op == EdgeOp::kProjection &&
        (e.relation_slot < 0 ||
         static_cast<std::size_t>(e.relation_slot) >= g.relations.size())) {
      violations.push_back("bad slot: projection edge " +
                           std::to_string(e.src) + "->" +
                           std::to_string(e.dst));
    }
  }
  if (!dangling) {
    try {
      g.TopologicalOrder();
    } catch (const ContractViolation&) {
      violations.push_back("not acyclic");
    }
  }

  std::vector<int> sinks;
  for (const Node& n : g.nodes) {
    const auto in = g.InEdges(n.id);
    const auto out = g.OutEdges(n.id);
    if (out.empty()) sinks.push_back(n.id);
    if (in.empty() && n.kind != NodeKind::kAnchor) {
      violations.push_back("source is not an anchor: node " +
                           std::to_string(n.id));
    }
    if (!in.empty() && n.kind == NodeKind::kAnchor) {
      violations.push_back("source is not an anchor: anchor node " +
                           std::to_string(n.id) + " has in-edges");
    }
    std::size_t unions = 0;
    for (const Edge* e : in) unions += e->op == EdgeOp::kUnion;
    if (unions > 0 && unions < in.size()) {
      violations.push_back("mixed in-edge types at node " +
                           std::to_string(n.id));
    } else if (unions > 0) {
      std::set<int> parents;
      for (const Edge* e : in) parents.insert(e->src);
      if (parents.size() < 2) {
        violations.push_back("union node has fewer than 2 parents: node " +
                             std::to_string(n.id));
      }
    }
  }
  if (sinks.size() != 1) {
    violations.push_back(
        "unique sink violated: " + std::to_string(sinks.size()) + " sinks");
  } else if (g.FindNode(sinks[0])->kind != NodeKind::kTarget) {
    violations.push_back("sink is not a target: node " +
                         std::to_string(sinks[0]));
  }
  std::size_t targets = 0;
  for (const Node& n : g.nodes) targets += n.kind == NodeKind::kTarget;
  if (targets != 1 && sinks.size() == 1) {
    violations.push_back("unique sink violated: " + std::to_string(targets) +
                         " target nodes");
  }
  return violations;
}

namespace {

template <typename T>
std::string SlotList(const std::vector<std::optional<T>>& slots) {
  std::string out;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (i) out += ',';
    out += slots[i] ? std::to_string(*slots[i]) : "_";
  }
  return out;
}

std::vector<std::string_view> Split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  if (s.empty()) return parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t at = s.find(sep, start);
    parts.push_back(s.substr(start, at == std::string_view::npos
                                        ? std::string_view::npos
                                        : at - start));
    if (at == std::string_view::npos) break;
    start = at + 1;
  }
  return parts;
}

int ToInt(std::string_view s) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError("computation graph: bad integer '" + std::string(s) + "'");
  }
  return value;
}

template <typename T>
std::vector<std::optional<T>> ParseSlots(std::string_view s) {
  std::vector<std::optional<T>> slots;
  for (std::string_view part : Split(s, ',')) {
    if (part == "_") {
      slots.emplace_back();
    } else {
      slots.emplace_back(static_cast<T>(ToInt(part)));
    }
  }
  return slots;
}

}  // namespace

std::string Serialize(const ComputationGraph& g) {
  std::string out = "nodes=";
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const Node& n = g.nodes[i];
    if (i) out += ',';
    out += std::to_string(n.id) + ':';
    switch (n.kind) {
      case NodeKind::kAnchor:
        out += 'A' + std::to_string(n.anchor_slot);
        break;
      case NodeKind::kVariable:
        out += 'V';
        break;
      case NodeKind::kTarget:
        out += 'T';
        break;
    }
  }
  out += ";edges=";
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    const Edge& e = g.edges[i];
    if (i) out += ',';
    out += std::to_string(e.src) + '>' + std::to_string(e.dst) + ':';
    out += e.op == EdgeOp::kUnion ? std::string("u")
                                  : 'p' + std::to_string(e.relation_slot);
  }
  out += ";anchors=" + SlotList(g.anchors);
  out += ";relations=" + SlotList(g.relations);
  return out;
}

ComputationGraph ParseGraph(std::string_view text) {
  ComputationGraph g;
  const auto sections = Split(text, ';');
  if (sections.size() != 4) {
    throw ParseError("computation graph: expected 4 sections in '" +
                     std::string(text) + "'");
  }
  auto body = [&](std::size_t i, std::string_view key) {
    std::string_view s = sections[i];
    if (s.size() <= key.size() || s.substr(0, key.size()) != key ||
        s[key.size()] != '=') {
      throw ParseError("computation graph: expected section '" +
                       std::string(key) + "'");
    }
    return s.substr(key.size() + 1);
  };
  for (std::string_view item : Split(body(0, "nodes"), ',')) {
    const std::size_t colon = item.find(':');
    if (colon == std::string_view::npos || colon + 1 >= item.size()) {
      throw ParseError("computation graph: bad node '" + std::string(item) +
                       "'");
    }
    Node n;
    n.id = ToInt(item.substr(0, colon));
    const std::string_view kind = item.substr(colon + 1);
    if (kind[0] == 'A') {
      n.kind = NodeKind::kAnchor;
      n.anchor_slot = ToInt(kind.substr(1));
    } else if (kind == "V") {
      n.kind = NodeKind::kVariable;
    } else if (kind == "T") {
      n.kind = NodeKind::kTarget;
    } else {
      throw ParseError("computation graph: bad node kind '" +
                       std::string(kind) + "'");
    }
    g.nodes.push_back(n);
  }
  for (std::string_view item : Split(body(1, "edges"), ',')) {
    const std::size_t gt = item.find('>');
    const std::size_t colon = item.find(':');
    if (gt == std::string_view::npos || colon == std::string_view::npos ||
        colon < gt || colon + 1 >= item.size()) {
      throw ParseError("computation graph: bad edge '" + std::string(item) +
                       "'");
    }
    Edge e;
    e.src = ToInt(item.substr(0, gt));
    e.dst = ToInt(item.substr(gt + 1, colon - gt - 1));
    const std::string_view op = item.substr(colon + 1);
    if (op == "u") {
      e.op = EdgeOp::kUnion;
    } else if (op[0] == 'p') {
      e.op = EdgeOp::kProjection;
      e.relation_slot = ToInt(op.substr(1));
    } else {
      throw ParseError("computation graph: bad edge op '" + std::string(op) +
                       "'");
    }
    g.edges.push_back(e);
  }
  g.anchors = ParseSlots<EntityId>(body(2, "anchors"));
  g.relations = ParseSlots<RelationId>(body(3, "relations"));
  return g;
}

}  // namespace boxq
