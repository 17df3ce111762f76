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

#ifndef BOXQ_EVALUATOR_H_
#define BOXQ_EVALUATOR_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "boxq/knowledge_graph.h"
#include "boxq/model.h"
#include "boxq/query_sampler.h"
#include "boxq/random.h"

namespace boxq {

struct Metrics {
  double mrr = 0;
  double h1 = 0;
  double h3 = 0;
  double h10 = 0;
};

// Optimistic filtered rank: 1 + number of entities outside `filtered` (sorted)
// whose distance is strictly smaller than that of `v`.
std::size_t RankEntity(std::span<const Real> distances, EntityId v,
                       std::span<const EntityId> filtered);

// Mean of 1/rank and 1[rank <= K]. Throws ContractViolation when empty.
Metrics MetricsFromRanks(std::span<const std::size_t> ranks);

// Answers ranked for `stage` and the set they are filtered against:
//   valid:   valid \ train  against valid
//   test:    test \ valid   against test
//   train / held-in: train  against train
struct RankingTargets {
  std::vector<EntityId> ranked;
  std::vector<EntityId> filtered;
};
RankingTargets TargetsFor(const AnswerSet& answers, QueryStage stage);

// Distance of every entity to the query's boxes.
std::vector<Real> EntityDistances(const ModelParams& params,
                                  const ComputationGraph& g);

Metrics MetricsForQuery(const ModelParams& params, const QueryRecord& record,
                        QueryStage stage);

struct StructureMetrics {
  std::string structure;
  std::size_t queries = 0;
  Metrics metrics;
};

struct EvalReport {
  std::string stage;
  std::string checkpoint;
  std::vector<StructureMetrics> structures;  // canonical structure order
  Metrics overall;  // unweighted mean of the structure means
};

// Per-query means averaged within each structure. Queries are spread over
// `workers` threads; the result does not depend on the worker count.
EvalReport Evaluate(const ModelParams& params, const QuerySet& queries,
                    QueryStage stage, int workers = 1,
                    std::string checkpoint = {});

std::string FormatReportTable(const EvalReport& report);
// One record per structure per metric.
std::string FormatReportJson(const EvalReport& report);

struct RelationOffsetRow {
  RelationId relation = 0;
  std::string name;
  double box_size = 0;  // L1 norm of the effective offset
  double mean_answers =
      0;  // mean |{t : (h, r, t)}| over heads h with an r-edge
};

struct OffsetReport {
  std::vector<RelationOffsetRow> rows;  // ascending box size
  double spearman = 0;
};

// Relations without edges in `kg` are left out.
OffsetReport ComputeOffsetReport(const ModelParams& params,
                                 const KnowledgeGraph& kg);
std::string FormatOffsetReport(const OffsetReport& report);

// Spearman rank correlation with average ranks for ties; 0 when either
// column is constant.
double SpearmanCorrelation(std::span<const double> x,
                           std::span<const double> y);

struct DisjointCount {
  std::size_t s_1p = 0;        // (entity, relation) pairs with answers
  std::size_t s_1p_multi = 0;  // ... with more than one answer
  std::size_t m_1p = 0;
  std::size_t m_total = 0;
};

// Greedy packing of queries with pairwise disjoint answer sets: first every
// 1p query in (entity, relation) order, then `pair_factor * s_1p_multi`
// random 2i conjunctions of multi-answer 1p queries (empty ones skipped).
DisjointCount CountDisjointQueries(const KnowledgeGraph& kg, Rng& rng,
                                   std::size_t pair_factor = 10);

}  // namespace boxq

#endif  // BOXQ_EVALUATOR_H_
