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

#include "boxq/evaluator.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "boxq/synthetic.h"
#include "boxq/trainer.h"
#include "doctest.h"
#include "json.hpp"
#include "test_util.h"

namespace boxq {
namespace {

TEST_CASE("rank examples") {
  const std::vector<Real> d = {0.5, 0.1, 0.9, 0.5, 0.3};
  CHECK(RankEntity(d, 1, {}) == 1);
  CHECK(RankEntity(d, 0, {}) == 3);  // ties do not count against the target
  CHECK(RankEntity(d, 3, {}) == 3);
  CHECK(RankEntity(d, 2, {}) == 5);
  const std::vector<EntityId> filtered = {1, 4};
  CHECK(RankEntity(d, 0, filtered) == 1);
  CHECK(RankEntity(d, 2, filtered) == 3);
  const std::vector<Real> flat(6, 2.0);
  for (EntityId v = 0; v < 6; ++v) CHECK(RankEntity(flat, v, {}) == 1);
}

TEST_CASE("rank is invariant under monotone transforms") {
  Rng rng(5);
  for (int t = 0; t < 200; ++t) {
    std::vector<Real> d(30);
    for (auto& x : d) x = std::round(rng.Uniform(0, 10));
    std::vector<Real> e(d.size());
    std::transform(d.begin(), d.end(), e.begin(),
                   [](Real x) { return std::exp(0.3 * x) + 7; });
    std::vector<EntityId> filtered = {3, 11};
    for (EntityId v = 0; v < 30; ++v) {
      CHECK(RankEntity(d, v, filtered) == RankEntity(e, v, filtered));
    }
  }
}

TEST_CASE("metric arithmetic") {
  const std::vector<std::size_t> one = {1};
  const Metrics m1 = MetricsFromRanks(one);
  CHECK(m1.mrr == 1.0);
  CHECK(m1.h1 == 1.0);
  CHECK(m1.h10 == 1.0);
  const std::vector<std::size_t> a = {2, 4};
  const Metrics m2 = MetricsFromRanks(a);
  CHECK(m2.mrr == doctest::Approx(0.375));
  CHECK(m2.h1 == 0.0);
  CHECK(m2.h3 == doctest::Approx(0.5));
  CHECK(m2.h10 == 1.0);
  const std::vector<std::size_t> b = {5, 20};
  const Metrics m3 = MetricsFromRanks(b);
  CHECK(m3.h10 == doctest::Approx(0.5));
  CHECK(m3.h1 == 0.0);
  CHECK(m3.mrr == doctest::Approx((0.2 + 0.05) / 2));
  Rng rng(6);
  for (int t = 0; t < 100; ++t) {
    std::vector<std::size_t> ranks(1 + rng.Index(10));
    for (auto& r : ranks) r = 1 + rng.Index(20);
    const Metrics m = MetricsFromRanks(ranks);
    CHECK(m.h1 <= m.h3);
    CHECK(m.h3 <= m.h10);
    CHECK(m.mrr > 0);
    CHECK(m.mrr <= 1);
  }
}

TEST_CASE("ranking targets per stage") {
  AnswerSet s;
  s.train = {1, 2};
  s.valid = {1, 2, 3};
  s.test = {1, 2, 3, 4, 5};
  const auto valid = TargetsFor(s, QueryStage::kValid);
  CHECK(valid.ranked == std::vector<EntityId>{3});
  CHECK(valid.filtered == s.valid);
  const auto test = TargetsFor(s, QueryStage::kTest);
  CHECK(test.ranked == std::vector<EntityId>{4, 5});
  CHECK(test.filtered == s.test);
  const auto train = TargetsFor(s, QueryStage::kTrain);
  CHECK(train.ranked == s.train);
  CHECK(train.filtered == s.train);
}

struct Setup {
  GraphSplits splits;
  QueryDataset data;
  ModelConfig config;
};

Setup MakeSetup() {
  Setup s;
  s.splits = BuildSplitGraphs(SynthesizeKg(SyntheticKind::kTree, 20), {}, {});
  GenerationOptions o;
  for (const auto& name : TrainableStructureNames()) {
    o.train_counts[name] = 60;
    o.heldin_counts[name] = 60;
  }
  o.retry_budget = 200;
  o.seed = 11;
  s.data = GenerateDataset(s.splits, o);
  s.config.dim = 16;
  s.config.learning_rate = 0.01;
  s.config.batch_per_structure = 64;
  s.config.gamma = 6;
  s.config.negatives = 8;
  s.config.eval_every = 0;
  s.config.seed = 2;
  return s;
}

TEST_CASE("aggregation is per query then per structure") {
  const Setup s = MakeSetup();
  const ModelParams p =
      ModelParams::Initialize(s.config, s.splits.train.num_entities(),
                              s.splits.train.num_relations(), 1);
  const EvalReport report = Evaluate(p, s.data.heldin, QueryStage::kHeldIn);
  REQUIRE(report.structures.size() == s.data.heldin.size());
  double sum = 0;
  for (const auto& sm : report.structures) {
    const auto& records = s.data.heldin.at(sm.structure);
    CHECK(sm.queries == records.size());
    double mrr = 0;
    for (const auto& r : records)
      mrr += MetricsForQuery(p, r, QueryStage::kHeldIn).mrr;
    CHECK(sm.metrics.mrr ==
          doctest::Approx(mrr / records.size()).epsilon(1e-12));
    sum += sm.metrics.mrr;
  }
  CHECK(report.overall.mrr ==
        doctest::Approx(sum / report.structures.size()).epsilon(1e-12));

  QuerySet only;
  only["2p"] = s.data.heldin.at("2p");
  const EvalReport single = Evaluate(p, only, QueryStage::kHeldIn);
  CHECK(single.overall.mrr == single.structures[0].metrics.mrr);
  CHECK(single.overall.h10 == single.structures[0].metrics.h10);

  const EvalReport parallel =
      Evaluate(p, s.data.heldin, QueryStage::kHeldIn, 4);
  for (std::size_t i = 0; i < report.structures.size(); ++i) {
    CHECK(parallel.structures[i].metrics.mrr ==
          report.structures[i].metrics.mrr);
  }
  CHECK(FormatReportTable(parallel) == FormatReportTable(report));
}

TEST_CASE("filtered answers never outrank the target") {
  const Setup s = MakeSetup();
  const ModelParams p =
      ModelParams::Initialize(s.config, s.splits.train.num_entities(),
                              s.splits.train.num_relations(), 4);
  for (const auto& [name, records] : s.data.heldin) {
    for (const auto& r : records) {
      const auto d = EntityDistances(p, r.query.graph);
      for (EntityId v : r.answers.train) {
        std::size_t closer = 0;
        for (EntityId u = 0; u < d.size(); ++u) {
          if (d[u] < d[v] && !std::binary_search(r.answers.train.begin(),
                                                 r.answers.train.end(), u)) {
            ++closer;
          }
        }
        CHECK(RankEntity(d, v, r.answers.train) == closer + 1);
      }
    }
  }
}

TEST_CASE("report formats") {
  const Setup s = MakeSetup();
  const ModelParams p =
      ModelParams::Initialize(s.config, s.splits.train.num_entities(),
                              s.splits.train.num_relations(), 1);
  const EvalReport report =
      Evaluate(p, s.data.heldin, QueryStage::kHeldIn, 1, "model.ckpt");
  const std::string table = FormatReportTable(report);
  CHECK(table.find("optimistic") != std::string::npos);
  CHECK(table.find("2p") != std::string::npos);
  const auto json = nlohmann::json::parse(FormatReportJson(report));
  std::map<std::string, int> per_structure;
  for (const auto& rec : json["records"]) {
    per_structure[rec["structure"].get<std::string>()]++;
  }
  CHECK(per_structure.size() == report.structures.size() + 1);
  for (const auto& [name, n] : per_structure) CHECK(n == 4);
  CHECK(json["stage"] == "heldin");
  CHECK(json["checkpoint"] == "model.ckpt");
}

TEST_CASE("training beats the untrained model") {
  Setup s = MakeSetup();
  s.config.epochs = 60;
  const TrainResult r = Train(s.config, s.splits.train.num_entities(),
                              s.splits.train.num_relations(), s.data.train);
  const ModelParams init =
      ModelParams::Initialize(s.config, s.splits.train.num_entities(),
                              s.splits.train.num_relations(), s.config.seed);
  const double before =
      Evaluate(init, s.data.heldin, QueryStage::kHeldIn).overall.mrr;
  const double after =
      Evaluate(r.best, s.data.heldin, QueryStage::kHeldIn).overall.mrr;
  CHECK(after > before + 0.2);
}

TEST_CASE("spearman correlation") {
  const std::vector<double> x = {1, 2, 3, 4, 5};
  const std::vector<double> up = {2, 4, 8, 16, 100};
  const std::vector<double> down = {5, 4, 3, 2, 1};
  const std::vector<double> flat = {3, 3, 3, 3, 3};
  CHECK(SpearmanCorrelation(x, up) == doctest::Approx(1.0));
  CHECK(SpearmanCorrelation(x, down) == doctest::Approx(-1.0));
  CHECK(SpearmanCorrelation(x, flat) == 0.0);
  // Average ranks for ties: y ranks are {1.5, 1.5, 3, 4}.
  const std::vector<double> a = {1, 2, 3, 4};
  const std::vector<double> b = {7, 7, 8, 9};
  const double expected = 4.5 / std::sqrt(5.0 * 4.5);
  CHECK(SpearmanCorrelation(a, b) == doctest::Approx(expected));
}

TEST_CASE("untrained offsets carry no cardinality signal") {
  // Relations of widely varying fan-out.
  std::vector<NamedTriple> triples;
  for (int r = 0; r < 8; ++r) {
    for (int h = 0; h < 5; ++h) {
      for (int t = 0; t <= r; ++t) {
        triples.push_back({"h" + std::to_string(h), "r" + std::to_string(r),
                           "t" + std::to_string((h + t) % 12)});
      }
    }
  }
  const GraphSplits splits = BuildSplitGraphs(triples, {}, {});
  ModelConfig c;
  c.dim = 8;
  double sum = 0;
  const int seeds = 200;
  for (int seed = 0; seed < seeds; ++seed) {
    const ModelParams p = ModelParams::Initialize(
        c, splits.train.num_entities(), splits.train.num_relations(), seed);
    const OffsetReport rep = ComputeOffsetReport(p, splits.train);
    CHECK(rep.rows.size() == 16);
    for (std::size_t i = 1; i < rep.rows.size(); ++i) {
      CHECK(rep.rows[i - 1].box_size <= rep.rows[i].box_size);
    }
    sum += rep.spearman;
  }
  CHECK(std::abs(sum / seeds) < 0.05);
}

TEST_CASE("mean answers per relation") {
  const std::vector<NamedTriple> triples = {
      {"a", "r", "x"}, {"a", "r", "y"}, {"b", "r", "x"}, {"a", "s", "z"}};
  const GraphSplits splits = BuildSplitGraphs(triples, {}, {});
  ModelConfig c;
  c.dim = 4;
  const ModelParams p = ModelParams::Initialize(
      c, splits.train.num_entities(), splits.train.num_relations(), 1);
  const OffsetReport rep = ComputeOffsetReport(p, splits.train);
  std::map<std::string, double> mean;
  for (const auto& row : rep.rows) mean[row.name] = row.mean_answers;
  CHECK(mean.at("r") == doctest::Approx(1.5));
  CHECK(mean.at("s") == 1.0);
  CHECK(mean.at(std::string("r") + std::string(kInverseMarker)) == 1.5);
  CHECK(FormatOffsetReport(rep).find("spearman") != std::string::npos);
}

// Independent greedy pass over 1p queries in (entity, relation) order.
std::size_t GreedyOneHop(const KnowledgeGraph& kg) {
  std::set<EntityId> seen;
  std::size_t m = 0;
  for (EntityId e = 0; e < kg.num_entities(); ++e) {
    for (RelationId r = 0; r < kg.num_relations(); ++r) {
      const auto tails = kg.Neighbors(e, r);
      if (tails.empty()) continue;
      bool fresh = true;
      for (EntityId t : tails) fresh = fresh && !seen.count(t);
      if (!fresh) continue;
      seen.insert(tails.begin(), tails.end());
      ++m;
    }
  }
  return m;
}

TEST_CASE("disjoint counting") {
  std::vector<NamedTriple> triples;
  for (int i = 0; i < 6; ++i) {
    triples.push_back({"a" + std::to_string(i), "f", "b" + std::to_string(i)});
    triples.push_back({"c" + std::to_string(i), "g", "d" + std::to_string(i)});
  }
  const KnowledgeGraph kg = BuildSplitGraphs(triples, {}, {}).train;
  Rng rng(1);
  const DisjointCount bij = CountDisjointQueries(kg, rng);
  CHECK(bij.s_1p == 24);
  CHECK(bij.s_1p_multi == 0);
  CHECK(bij.m_1p == 24);
  CHECK(bij.m_total >= bij.m_1p);

  Rng graph_rng(2);
  for (int t = 0; t < 20; ++t) {
    const KnowledgeGraph g = testing::RandomGraph(graph_rng, 15, 3, 40);
    Rng r1(t), r2(t);
    const DisjointCount c = CountDisjointQueries(g, r1);
    CHECK(c.m_1p == GreedyOneHop(g));
    CHECK(c.m_1p <= c.m_total);
    CHECK(c.m_total <= g.num_entities());
    const DisjointCount again = CountDisjointQueries(g, r2);
    CHECK(again.m_total == c.m_total);
  }

  const KnowledgeGraph empty =
      BuildSplitGraphs(std::vector<NamedTriple>{}, {}, {}).train;
  const DisjointCount none = CountDisjointQueries(empty, rng);
  CHECK(none.m_1p == 0);
  CHECK(none.m_total == 0);
}

}  // namespace
}  // namespace boxq
