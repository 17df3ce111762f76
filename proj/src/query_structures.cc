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

#include "boxq/query_structures.h"

#include <utility>

namespace boxq {
namespace {

struct Builder {
  QueryStructure s;

  Builder(std::string name, bool trainable) {
    s.name = std::move(name);
    s.trainable = trainable;
  }
  Builder& Anchor(int id) {
    s.graph.nodes.push_back(
        {id, NodeKind::kAnchor, static_cast<int>(s.graph.anchors.size())});
    s.graph.anchors.emplace_back();
    return *this;
  }
  Builder& Var(int id) {
    s.graph.nodes.push_back({id, NodeKind::kVariable, -1});
    return *this;
  }
  Builder& Target(int id) {
    s.graph.nodes.push_back({id, NodeKind::kTarget, -1});
    return *this;
  }
  Builder& P(int src, int dst) {
    s.graph.edges.push_back({src, dst, EdgeOp::kProjection,
                             static_cast<int>(s.graph.relations.size())});
    s.graph.relations.emplace_back();
    return *this;
  }
  Builder& U(int src, int dst) {
    s.graph.edges.push_back({src, dst, EdgeOp::kUnion, -1});
    return *this;
  }
};

std::vector<QueryStructure> MakeTemplates() {
  std::vector<QueryStructure> t;
  t.push_back(Builder("1p", true).Anchor(0).Target(1).P(0, 1).s);
  t.push_back(Builder("2p", true).Anchor(0).Var(1).Target(2).P(0, 1).P(1, 2).s);
  t.push_back(Builder("3p", true)
                  .Anchor(0)
                  .Var(1)
                  .Var(2)
                  .Target(3)
                  .P(0, 1)
                  .P(1, 2)
                  .P(2, 3)
                  .s);
  t.push_back(
      Builder("2i", true).Anchor(0).Anchor(1).Target(2).P(0, 2).P(1, 2).s);
  t.push_back(Builder("3i", true)
                  .Anchor(0)
                  .Anchor(1)
                  .Anchor(2)
                  .Target(3)
                  .P(0, 3)
                  .P(1, 3)
                  .P(2, 3)
                  .s);
  // Intersection of two projections, then one more projection.
  t.push_back(Builder("ip", false)
                  .Anchor(0)
                  .Anchor(1)
                  .Var(2)
                  .Target(3)
                  .P(0, 2)
                  .P(1, 2)
                  .P(2, 3)
                  .s);
  // Two-hop path intersected with a one-hop projection.
  t.push_back(Builder("pi", false)
                  .Anchor(0)
                  .Var(1)
                  .Anchor(2)
                  .Target(3)
                  .P(0, 1)
                  .P(1, 3)
                  .P(2, 3)
                  .s);
  t.push_back(Builder("2u", false)
                  .Anchor(0)
                  .Anchor(1)
                  .Var(2)
                  .Var(3)
                  .Target(4)
                  .P(0, 2)
                  .P(1, 3)
                  .U(2, 4)
                  .U(3, 4)
                  .s);
  // Union of two projections, then one more projection.
  t.push_back(Builder("up", false)
                  .Anchor(0)
                  .Anchor(1)
                  .Var(2)
                  .Var(3)
                  .Var(4)
                  .Target(5)
                  .P(0, 2)
                  .P(1, 3)
                  .U(2, 4)
                  .U(3, 4)
                  .P(4, 5)
                  .s);
  return t;
}

}  // namespace

std::span<const QueryStructure> StructureTemplates() {
  static const std::vector<QueryStructure> templates = MakeTemplates();
  return templates;
}

const QueryStructure& StructureTemplate(std::string_view name) {
  for (const QueryStructure& s : StructureTemplates()) {
    if (s.name == name) return s;
  }
  throw ArgumentError("unknown query structure '" + std::string(name) + "'");
}

std::vector<std::string> StructureNames() {
  std::vector<std::string> names;
  for (const QueryStructure& s : StructureTemplates()) names.push_back(s.name);
  return names;
}

std::vector<std::string> TrainableStructureNames() {
  std::vector<std::string> names;
  for (const QueryStructure& s : StructureTemplates()) {
    if (s.trainable) names.push_back(s.name);
  }
  return names;
}

}  // namespace boxq
