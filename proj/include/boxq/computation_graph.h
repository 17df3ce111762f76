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

#ifndef BOXQ_COMPUTATION_GRAPH_H_
#define BOXQ_COMPUTATION_GRAPH_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "boxq/types.h"

namespace boxq {

enum class NodeKind { kAnchor, kVariable, kTarget };
enum class EdgeOp { kProjection, kUnion };

struct Node {
  int id = 0;
  NodeKind kind = NodeKind::kVariable;
  int anchor_slot = -1;  // kAnchor only

  friend bool operator==(const Node&, const Node&) = default;
};

struct Edge {
  int src = 0;
  int dst = 0;
  EdgeOp op = EdgeOp::kProjection;
  int relation_slot = -1;  // kProjection only

  friend bool operator==(const Edge&, const Edge&) = default;
};

// Query DAG. Templates leave the slot bindings empty; grounded queries bind
// every anchor slot to an entity and every relation slot to a relation. A
// node whose in-edges are projections computes the intersection of the
// projected sets; a node whose in-edges are unions computes their union.
struct ComputationGraph {
  std::vector<Node> nodes;
  std::vector<Edge> edges;
  std::vector<std::optional<EntityId>> anchors;
  std::vector<std::optional<RelationId>> relations;

  const Node* FindNode(int id) const;
  std::vector<const Edge*> InEdges(int id) const;
  std::vector<const Edge*> OutEdges(int id) const;

  bool HasUnion() const;
  bool Grounded() const;
  // Id of the first Target node, or -1.
  int Target() const;

  // Node ids in an order where every edge goes forward. Throws
  // ContractViolation when the graph has a cycle.
  std::vector<int> TopologicalOrder() const;

  EntityId AnchorEntity(const Node& node) const;
  RelationId EdgeRelation(const Edge& edge) const;

  friend bool operator==(const ComputationGraph&,
                         const ComputationGraph&) = default;
};

// Every violated structural rule, each message starting with a fixed phrase:
// "not acyclic", "unique sink", "sink is not a target", "source is not an
// anchor", "mixed in-edge types", "union node has fewer than 2 parents",
// "dangling edge", "duplicate node id", "bad slot".
std::vector<std::string> ValidateDag(const ComputationGraph& g);

// Compact single-token text form, e.g.
//   nodes=0:A0,1:V,2:T;edges=0>1:p0,1>2:p1;anchors=7;relations=3,_
// where '_' marks an unbound slot.
std::string Serialize(const ComputationGraph& g);
ComputationGraph ParseGraph(std::string_view text);

}  // namespace boxq

#endif  // BOXQ_COMPUTATION_GRAPH_H_
