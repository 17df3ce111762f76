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

#include "boxq/query_sampler.h"

#include <algorithm>
#include <sstream>

#include "boxq/dnf.h"
#include "boxq/synthetic.h"
#include "doctest.h"
#include "test_util.h"

namespace boxq {
namespace {

GraphSplits Splits(std::vector<NamedTriple> train,
                   std::vector<NamedTriple> valid = {},
                   std::vector<NamedTriple> test = {}) {
  return BuildSplitGraphs(train, valid, test);
}

std::vector<EntityId> Ids(const Vocabulary& v,
                          std::initializer_list<const char*> names) {
  std::vector<EntityId> out;
  for (const char* n : names) out.push_back(*v.FindEntity(n));
  std::sort(out.begin(), out.end());
  return out;
}

bool Contains(const std::vector<std::string>& v, const std::string& prefix) {
  return std::any_of(v.begin(), v.end(), [&](const std::string& s) {
    return s.rfind(prefix, 0) == 0;
  });
}

TEST_CASE("answer_exact on hand-built queries") {
  const GraphSplits s =
      Splits({{"A", "r", "B"}, {"A", "r", "C"}, {"D", "s", "C"}});
  const Vocabulary& v = s.train.vocab();
  const EntityId a = *v.FindEntity("A");
  const EntityId d = *v.FindEntity("D");
  const RelationId r = *v.FindRelation("r");
  const RelationId rs = *v.FindRelation("s");

  ComputationGraph two_i = StructureTemplate("2i").graph;
  two_i.anchors = {a, d};
  two_i.relations = {r, rs};
  CHECK(AnswerExact(s.train, two_i) == Ids(v, {"C"}));

  ComputationGraph two_u = StructureTemplate("2u").graph;
  two_u.anchors = {a, d};
  two_u.relations = {r, rs};
  CHECK(AnswerExact(s.train, two_u) == Ids(v, {"B", "C"}));

  ComputationGraph one_p = StructureTemplate("1p").graph;
  one_p.anchors = {a};
  one_p.relations = {rs};
  CHECK(AnswerExact(s.train, one_p).empty());
}

TEST_CASE("instantiate follows the only valid path") {
  const GraphSplits s = Splits({{"A", "r", "B"}, {"B", "s", "C"}});
  const Vocabulary& v = s.train.vocab();
  const EntityId c = *v.FindEntity("C");
  Rng rng(1);
  int accepted = 0;
  for (int i = 0; i < 50; ++i) {
    const auto q = Instantiate(StructureTemplate("2p"), s.train, rng, c);
    if (!q) continue;
    ++accepted;
    CHECK(q->graph.anchors ==
          std::vector<std::optional<EntityId>>{*v.FindEntity("A")});
    const ComputationGraph& g = q->graph;
    // Relation slot of the anchor edge first, then the edge into the target.
    CHECK(*g.relations[0] == *v.FindRelation("r"));
    CHECK(*g.relations[1] == *v.FindRelation("s"));
  }
  CHECK(accepted > 0);
}

TEST_CASE("instantiate rejects inverse backtracks") {
  const GraphSplits s = Splits({{"A", "r", "B"}});
  const EntityId a = *s.train.vocab().FindEntity("A");
  Rng rng(2);
  for (int i = 0; i < 50; ++i) {
    CHECK_FALSE(
        Instantiate(StructureTemplate("2p"), s.train, rng, a).has_value());
  }
}

TEST_CASE("duplicate intersection branches are degenerate") {
  const GraphSplits s = Splits({{"A", "r", "B"}, {"C", "r", "B"}});
  const Vocabulary& v = s.train.vocab();
  ComputationGraph g = StructureTemplate("2i").graph;
  g.anchors = {*v.FindEntity("A"), *v.FindEntity("A")};
  g.relations = {*v.FindRelation("r"), *v.FindRelation("r")};
  CHECK(Contains(DegeneracyViolations(s.train, g), "duplicate branch"));
  g.anchors[1] = *v.FindEntity("C");
  CHECK(DegeneracyViolations(s.train, g).empty());
}

TEST_CASE("answer_exact matches brute force on random graphs") {
  Rng rng(99);
  for (int round = 0; round < 8; ++round) {
    const KnowledgeGraph kg = testing::RandomGraph(rng, 10, 3, 25);
    for (const QueryStructure& st : StructureTemplates()) {
      for (int i = 0; i < 3; ++i) {
        const ComputationGraph g = testing::RandomGrounding(st, kg, rng);
        INFO(Serialize(g));
        CHECK(AnswerExact(kg, g) == testing::BruteForceAnswers(kg, g));
      }
      if (auto q = Instantiate(st, kg, rng)) {
        CHECK(AnswerExact(kg, q->graph) ==
              testing::BruteForceAnswers(kg, q->graph));
      }
    }
  }
}

TEST_CASE("answers grow with the snapshots") {
  Rng rng(7);
  std::vector<NamedTriple> train, valid, test;
  for (int i = 0; i < 60; ++i) {
    NamedTriple t{"e" + std::to_string(rng.Index(12)),
                  "r" + std::to_string(rng.Index(3)),
                  "e" + std::to_string(rng.Index(12))};
    (i < 40 ? train : i < 50 ? valid : test).push_back(t);
  }
  const GraphSplits s = Splits(train, valid, test);
  for (const QueryStructure& st : StructureTemplates()) {
    for (int i = 0; i < 20; ++i) {
      const ComputationGraph g = testing::RandomGrounding(st, s.test, rng);
      const auto a = AnswerExact(s.train, g);
      const auto b = AnswerExact(s.valid, g);
      const auto c = AnswerExact(s.test, g);
      CHECK(std::includes(b.begin(), b.end(), a.begin(), a.end()));
      CHECK(std::includes(c.begin(), c.end(), b.begin(), b.end()));
    }
  }
}

GenerationOptions SmallOptions(std::uint64_t seed) {
  GenerationOptions o;
  for (const auto& n : TrainableStructureNames()) o.train_counts[n] = 20;
  for (const auto& n : StructureNames()) o.eval_counts[n] = 10;
  o.retry_budget = 200;
  o.seed = seed;
  return o;
}

GraphSplits RandomSplits(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<NamedTriple> train, valid, test;
  for (int i = 0; i < 160; ++i) {
    NamedTriple t{"e" + std::to_string(rng.Index(25)),
                  "r" + std::to_string(rng.Index(4)),
                  "e" + std::to_string(rng.Index(25))};
    (i < 120 ? train : i < 140 ? valid : test).push_back(t);
  }
  return BuildSplitGraphs(train, valid, test);
}

TEST_CASE("generated queries respect the filters") {
  const GraphSplits s = RandomSplits(4);
  const QueryDataset d = GenerateDataset(s, SmallOptions(1));
  std::size_t emitted = 0;
  for (const auto& [name, records] : d.train) {
    CHECK(StructureTemplate(name).trainable);
    for (const QueryRecord& r : records) {
      CHECK_FALSE(r.answers.train.empty());
      CHECK(r.answers.valid.empty());
      CHECK(r.answers.test.empty());
      CHECK(r.answers.train == AnswerExact(s.train, r.query.graph));
      CHECK(DegeneracyViolations(s.train, r.query.graph).empty());
    }
  }
  for (const auto& [name, records] : d.valid) {
    for (const QueryRecord& r : records) {
      std::vector<EntityId> extra;
      std::set_difference(r.answers.valid.begin(), r.answers.valid.end(),
                          r.answers.train.begin(), r.answers.train.end(),
                          std::back_inserter(extra));
      CHECK_FALSE(extra.empty());
      ++emitted;
    }
  }
  for (const auto& [name, records] : d.test) {
    for (const QueryRecord& r : records) {
      const auto test = AnswerExact(s.test, r.query.graph);
      const auto valid = AnswerExact(s.valid, r.query.graph);
      CHECK(test == r.answers.test);
      std::vector<EntityId> extra;
      std::set_difference(test.begin(), test.end(), valid.begin(), valid.end(),
                          std::back_inserter(extra));
      CHECK_FALSE(extra.empty());
      CHECK(DegeneracyViolations(s.test, r.query.graph).empty());
      ++emitted;
    }
  }
  CHECK(emitted > 0);
  // No duplicates within a structure.
  for (const auto* set : {&d.train, &d.valid, &d.test}) {
    for (const auto& [name, records] : *set) {
      std::vector<std::string> keys;
      for (const auto& r : records) keys.push_back(Serialize(r.query.graph));
      std::sort(keys.begin(), keys.end());
      CHECK(std::adjacent_find(keys.begin(), keys.end()) == keys.end());
    }
  }
}

TEST_CASE("no validation edges means no validation queries") {
  const GraphSplits s =
      Splits({{"A", "r", "B"}, {"B", "r", "C"}, {"C", "s", "A"}}, {},
             {{"A", "s", "C"}});
  GenerationOptions o;
  for (const auto& n : StructureNames()) o.eval_counts[n] = 5;
  o.retry_budget = 50;
  const QueryDataset d = GenerateDataset(s, o);
  for (const auto& [name, records] : d.valid) CHECK(records.empty());
  CHECK_FALSE(d.warnings.empty());
}

TEST_CASE("generation is seeded and independent of worker count") {
  const GraphSplits s = RandomSplits(8);
  GenerationOptions o = SmallOptions(5);
  const QueryDataset a = GenerateDataset(s, o);
  o.workers = 4;
  const QueryDataset b = GenerateDataset(s, o);
  for (QueryStage st :
       {QueryStage::kTrain, QueryStage::kValid, QueryStage::kTest}) {
    std::ostringstream x, y;
    WriteQueries(x, st, a.Stage(st));
    WriteQueries(y, st, b.Stage(st));
    CHECK(x.str() == y.str());
  }
  o.seed = 6;
  o.workers = 1;
  const QueryDataset c = GenerateDataset(s, o);
  std::ostringstream x, z;
  WriteQueries(x, QueryStage::kTrain, a.train);
  WriteQueries(z, QueryStage::kTrain, c.train);
  CHECK(x.str() != z.str());
}

TEST_CASE("non-trainable training request is rejected") {
  GenerationOptions o;
  o.train_counts["2u"] = 1;
  CHECK_THROWS_AS(GenerateDataset(RandomSplits(1), o), ArgumentError);
}

TEST_CASE("query files round-trip") {
  const GraphSplits s = RandomSplits(2);
  const QueryDataset d = GenerateDataset(s, SmallOptions(3));
  std::stringstream buf;
  WriteQueries(buf, QueryStage::kTest, d.test);
  QueryStage stage = QueryStage::kTrain;
  const QuerySet back = ReadQueries(buf, &stage);
  CHECK(stage == QueryStage::kTest);
  std::stringstream again;
  WriteQueries(again, QueryStage::kTest, back);
  CHECK(again.str() == buf.str());

  testing::TempDir dir("queries");
  SaveDataset(dir.path(), d);
  std::ostringstream x, y;
  WriteQueries(x, QueryStage::kTrain, d.train);
  WriteQueries(y, QueryStage::kTrain,
               LoadQueries(dir.path(), QueryStage::kTrain));
  CHECK(x.str() == y.str());

  std::istringstream bad("#boxq-queries 1 test\n1p\tnodes=0:A0\n");
  CHECK_THROWS_AS(ReadQueries(bad), ParseError);
}

TEST_CASE("answer count report") {
  QuerySet qs;
  QueryRecord r;
  r.query.structure = "1p";
  r.answers.test = {1, 2, 3};
  qs["1p"].push_back(r);
  CHECK(AnswerCountReport(qs).at("1p") == doctest::Approx(3.0));

  // Every relation a bijection: conjunctive structures have exactly one answer.
  const GraphSplits s =
      BuildSplitGraphs(SynthesizeKg(SyntheticKind::kChain, 12), {}, {});
  GenerationOptions o;
  for (const auto& n : StructureNames()) o.heldin_counts[n] = 10;
  o.retry_budget = 100;
  const QueryDataset d = GenerateDataset(s, o);
  for (const auto& [name, mean] : AnswerCountReport(d.heldin)) {
    if (StructureTemplate(name).graph.HasUnion()) continue;
    CHECK(mean == doctest::Approx(1.0));
  }
}

TEST_CASE("count parsing") {
  const QueryCounts c = ParseCounts("1p=100,2i=7");
  CHECK(c.at("1p") == 100);
  CHECK(c.at("2i") == 7);
  CHECK(ParseCounts("*=3").size() == 9);
  CHECK_THROWS_AS(ParseCounts("1p"), ArgumentError);
  CHECK_THROWS_AS(ParseCounts("9z=1"), ArgumentError);
  CHECK(StageName(ParseStage("heldin")) == "heldin");
}

}  // namespace
}  // namespace boxq
