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

#ifndef BOXQ_QUERY_SAMPLER_H_
#define BOXQ_QUERY_SAMPLER_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "boxq/computation_graph.h"
#include "boxq/knowledge_graph.h"
#include "boxq/query_structures.h"
#include "boxq/random.h"

namespace boxq {

struct GroundedQuery {
  std::string structure;
  ComputationGraph graph;
};

// Sorted answer ids on each snapshot. Training queries only carry `train`.
struct AnswerSet {
  std::vector<EntityId> train;
  std::vector<EntityId> valid;
  std::vector<EntityId> test;
};

struct QueryRecord {
  GroundedQuery query;
  AnswerSet answers;
};

// Exact denotation by executing the computation graph on `kg`: anchors are
// singletons, projections follow edges, multi-input projection nodes
// intersect and union nodes unite. Result is sorted.
std::vector<EntityId> AnswerExact(const KnowledgeGraph& kg,
                                  const ComputationGraph& g);

// Empty when the bindings are acceptable, else one message per hit:
// "inverse backtrack" for r followed by r^-1 along a path (union edges are
// transparent) and "duplicate branch" for two identical inputs into one
// intersection or union node.
std::vector<std::string> DegeneracyViolations(const KnowledgeGraph& kg,
                                              const ComputationGraph& g);

// One top-down pass binding the template from a uniformly drawn (or forced)
// target entity. Returns nullopt on a dead end or a degenerate result.
std::optional<GroundedQuery> Instantiate(
    const QueryStructure& structure, const KnowledgeGraph& kg, Rng& rng,
    std::optional<EntityId> root = std::nullopt);

using QueryCounts = std::map<std::string, std::size_t>;

enum class QueryStage { kTrain, kValid, kTest, kHeldIn };

std::string_view StageName(QueryStage stage);
QueryStage ParseStage(std::string_view name);

// Queries of one stage grouped by structure name.
using QuerySet = std::map<std::string, std::vector<QueryRecord>>;

struct GenerationOptions {
  QueryCounts train_counts;   // trainable structures only
  QueryCounts eval_counts;    // validation and test
  QueryCounts heldin_counts;  // any structure, sampled on the training graph
  std::size_t retry_budget = 1000;
  std::uint64_t seed = 0;
  int workers = 1;
};

struct QueryDataset {
  QuerySet train;
  QuerySet valid;
  QuerySet test;
  QuerySet heldin;
  std::vector<std::string> warnings;

  QuerySet& Stage(QueryStage stage);
  const QuerySet& Stage(QueryStage stage) const;
};

// Training queries are sampled on the training graph. Validation and test
// queries are sampled on the validation / test graph and kept only when they
// have an answer that the next-smaller graph cannot produce. Held-in queries
// are sampled on the training graph with no triviality filter. Duplicates
// (same serialized graph) are skipped. A structure that exhausts the retry
// budget records a warning and keeps what it has.
QueryDataset GenerateDataset(const GraphSplits& splits,
                             const GenerationOptions& options);

// Mean answer count per structure, using test answers when present and
// training answers otherwise.
std::map<std::string, double> AnswerCountReport(const QuerySet& queries);

// Query file: a header line, then one query per line as
//   structure <TAB> graph <TAB> train ids <TAB> valid ids <TAB> test ids
// with comma-separated ids and '-' for an empty list.
void WriteQueries(std::ostream& out, QueryStage stage, const QuerySet& queries);
QuerySet ReadQueries(std::istream& in, QueryStage* stage = nullptr);
void SaveDataset(const std::filesystem::path& dir, const QueryDataset& data);
QuerySet LoadQueries(const std::filesystem::path& dir, QueryStage stage);
std::filesystem::path QueryFilePath(const std::filesystem::path& dir,
                                    QueryStage stage);

QueryCounts ParseCounts(std::string_view text);

}  // namespace boxq

#endif  // BOXQ_QUERY_SAMPLER_H_
