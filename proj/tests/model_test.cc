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

#include "boxq/model.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "boxq/adam.h"
#include "boxq/checkpoint.h"
#include "boxq/config.h"
#include "boxq/dnf.h"
#include "doctest.h"
#include "gradient_check.h"
#include "test_util.h"

namespace boxq {
namespace {

using Vec = std::vector<Real>;

ModelConfig SmallConfig(const std::string& variant, int dim = 4) {
  ModelConfig c;
  c.Set("variant", variant);
  c.dim = dim;
  c.gamma = 1;
  c.negatives = 3;
  return c;
}

ComputationGraph Ground(const std::string& structure,
                        std::vector<EntityId> anchors,
                        std::vector<RelationId> relations) {
  ComputationGraph g = StructureTemplate(structure).graph;
  for (std::size_t i = 0; i < anchors.size(); ++i) g.anchors[i] = anchors[i];
  for (std::size_t i = 0; i < relations.size(); ++i)
    g.relations[i] = relations[i];
  return g;
}

Vec Add(std::span<const Real> a, std::span<const Real> b) {
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

TEST_CASE("config parsing and variants") {
  ModelConfig c;
  CHECK(c.dim == 400);
  CHECK(c.gamma == 24);
  CHECK(c.alpha == doctest::Approx(0.2));
  CHECK(c.negatives == 128);
  CHECK(c.learning_rate == doctest::Approx(1e-4));
  CHECK(c.epochs == 250);
  CHECK(c.batch_per_structure == 512);

  std::istringstream text(
      "# desk run\nvariant = gqe\ndim = 8\nlearning-rate = 0.01  # fast\n"
      "train_structures = 1p,2p\n");
  ApplyConfigText(text, c);
  CHECK(c.geometry == Geometry::kPoint);
  CHECK(c.intersection == IntersectionMode::kDeepSetsCenter);
  CHECK(c.dim == 8);
  CHECK(c.learning_rate == doctest::Approx(0.01));
  CHECK(c.train_structures == std::vector<std::string>{"1p", "2p"});

  ModelConfig back;
  std::istringstream round(c.ToText());
  ApplyConfigText(round, back);
  CHECK(back.ToText() == c.ToText());

  CHECK_THROWS_AS(c.Set("colour", "red"), ArgumentError);
  CHECK_THROWS_AS(c.Set("dim", "eight"), ArgumentError);
  std::istringstream bad("dim 8\n");
  CHECK_THROWS_AS(ParseKeyValues(bad), ParseError);
  c.alpha = 0;
  CHECK_THROWS_AS(c.Validate(), ArgumentError);
  c.alpha = 0.2;
  c.train_structures = {"2u"};
  CHECK_THROWS_AS(c.Validate(), ArgumentError);

  ModelConfig one_p;
  one_p.Set("variant", "q2b-avg-1p");
  CHECK(one_p.train_structures == std::vector<std::string>{"1p"});
  CHECK(one_p.intersection == IntersectionMode::kAverage);
  ModelConfig shared;
  shared.Set("variant", "q2b-sharedoffset");
  CHECK(shared.offset == OffsetMode::kShared);
  CHECK_THROWS_AS(shared.Set("variant", "transe"), ArgumentError);
}

TEST_CASE("initialisation ranges and tensor allocation") {
  const ModelConfig c = SmallConfig("q2b", 16);
  const ModelParams p = ModelParams::Initialize(c, 7, 3, 1);
  const Real s = 1 / std::sqrt(Real(16));
  for (Real x : p.tensors[kEntityTable].data) CHECK(std::fabs(x) <= s);
  for (RelationId r = 0; r < 3; ++r) {
    for (Real x : p.RelationCenter(r)) CHECK(std::fabs(x) <= s);
    for (Real x : p.RelationRawOffset(r)) {
      CHECK(x >= 0);
      CHECK(x <= s);
    }
  }
  for (Real b : p.tensors[kAttentionB1].data) CHECK(b == 0);
  CHECK(p.tensors[kAttentionW1].rows == 32);
  CHECK(p.tensors[kAttentionW2].rows == 16);
  CHECK(p.tensors[kOffsetInnerW2].rows == 32);
  CHECK(p.tensors[kOffsetOuterW2].rows == 16);
  CHECK(p.tensors[kCenterInnerW1].data.empty());
  CHECK(p.tensors[kSharedOffset].data.empty());

  const ModelParams gqe = ModelParams::Initialize(SmallConfig("gqe"), 3, 2, 1);
  CHECK(gqe.tensors[kAttentionW1].data.empty());
  CHECK(gqe.tensors[kOffsetInnerW1].data.empty());
  CHECK_FALSE(gqe.tensors[kCenterInnerW1].data.empty());

  const ModelParams again = ModelParams::Initialize(c, 7, 3, 1);
  CHECK(again.tensors[kEntityTable].data == p.tensors[kEntityTable].data);
}

TEST_CASE("effective offsets are non-negative") {
  ModelParams p = ModelParams::Initialize(SmallConfig("q2b"), 3, 2, 2);
  for (Real& x : p.tensors[kRelationTable].data) x = -std::fabs(x) - 0.1;
  for (RelationId r = 0; r < 2; ++r) {
    for (Real o : p.Relation(r).offset) CHECK(o > 0);
  }
  const Box b = EmbedConjunctive(Ground("2p", {0}, {0, 1}), p);
  for (Real o : b.offset) CHECK(o >= 0);
}

TEST_CASE("deepsets") {
  ModelParams p = ModelParams::Initialize(SmallConfig("q2b"), 3, 2, 3);
  Rng rng(4);
  std::vector<Vec> xs(3, Vec(8));
  for (auto& x : xs) {
    for (auto& v : x) v = rng.Uniform(-1, 1);
  }
  const Vec out = OffsetDeepSets(p, xs);
  std::vector<Vec> perm = {xs[2], xs[0], xs[1]};
  const Vec out2 = OffsetDeepSets(p, perm);
  for (std::size_t j = 0; j < out.size(); ++j) {
    CHECK(out[j] == doctest::Approx(out2[j]).epsilon(1e-14));
  }

  // Single input: outer(inner(x)).
  const MlpWeights inner = p.Mlp(kOffsetInnerW1);
  const MlpWeights outer = p.Mlp(kOffsetOuterW1);
  MlpTrace t1, t2;
  MlpForward(inner, xs[0], t1);
  MlpForward(outer, t1.output, t2);
  const Vec single = OffsetDeepSets(p, std::span(xs.data(), 1));
  for (std::size_t j = 0; j < single.size(); ++j) {
    CHECK(single[j] == doctest::Approx(t2.output[j]).epsilon(1e-14));
  }

  // Zero weights: only the outer bias survives.
  for (TensorSlot s :
       {kOffsetInnerW1, kOffsetInnerW2, kOffsetOuterW1, kOffsetOuterW2}) {
    p.tensors[s].Zero();
  }
  for (TensorSlot s :
       {kOffsetInnerB1, kOffsetInnerB2, kOffsetOuterB1, kOffsetOuterB2}) {
    for (Real& b : p.tensors[s].data) b = rng.Uniform(-1, 1);
  }
  const Vec biased = OffsetDeepSets(p, xs);
  CHECK(biased == p.tensors[kOffsetOuterB2].data);
}

TEST_CASE("attention weights") {
  const ModelParams p = ModelParams::Initialize(SmallConfig("q2b"), 3, 2, 5);
  Rng rng(6);
  Vec x(8);
  for (auto& v : x) v = rng.Uniform(-1, 1);
  const std::vector<Vec> same = {x, x, x};
  for (const Vec& w : AttentionWeights(p, same)) {
    for (Real v : w) CHECK(v == doctest::Approx(1.0 / 3));
  }
  const auto single = AttentionWeights(p, std::span(same.data(), 1));
  for (Real v : single[0]) CHECK(v == 1);

  std::vector<Vec> logits = {{0.3, -2, 5, 1}, {1.5, 0, -1, 1}};
  const auto a = SoftmaxAcross(logits);
  for (auto& l : logits) {
    for (auto& v : l) v -= 3.25;
  }
  const auto b = SoftmaxAcross(logits);
  for (std::size_t j = 0; j < 4; ++j) {
    CHECK(a[0][j] == doctest::Approx(b[0][j]).epsilon(1e-14));
    CHECK(std::fabs(a[0][j] + a[1][j] - 1) <= 1e-12);
  }

  for (int i = 0; i < 50; ++i) {
    std::vector<Vec> boxes(4, Vec(8));
    for (auto& bx : boxes) {
      for (auto& v : bx) v = rng.Uniform(-3, 3);
    }
    const auto w = AttentionWeights(p, boxes);
    for (std::size_t j = 0; j < 4; ++j) {
      Real sum = 0;
      for (const auto& wi : w) sum += wi[j];
      CHECK(std::fabs(sum - 1) <= 1e-12);
    }
  }
}

TEST_CASE("conjunctive embedding examples") {
  const ModelParams p = ModelParams::Initialize(SmallConfig("q2b"), 5, 4, 7);
  const Box one = EmbedConjunctive(Ground("1p", {2}, {1}), p);
  CHECK(one.center == Add(p.Entity(2), p.Relation(1).center));
  CHECK(one.offset == p.Relation(1).offset);

  const Box two = EmbedConjunctive(Ground("2p", {2}, {1, 3}), p);
  CHECK(two.offset == Add(p.Relation(1).offset, p.Relation(3).offset));

  const Box same = EmbedConjunctive(Ground("2i", {2, 2}, {1, 1}), p);
  for (std::size_t j = 0; j < 4; ++j) {
    CHECK(same.center[j] == doctest::Approx(one.center[j]).epsilon(1e-14));
    CHECK(same.offset[j] < one.offset[j]);
  }

  CHECK_THROWS_AS(EmbedConjunctive(Ground("2u", {0, 1}, {0, 1}), p),
                  ContractViolation);
  CHECK_THROWS_AS(EmbedConjunctive(Ground("1p", {9}, {0}), p),
                  ContractViolation);
}

TEST_CASE("intersection is bit-identical under branch permutation") {
  for (const char* variant :
       {"q2b", "q2b-avg", "q2b-deepsets", "q2b-sharedoffset", "gqe"}) {
    const ModelParams p =
        ModelParams::Initialize(SmallConfig(variant), 6, 4, 8);
    const Box a = EmbedConjunctive(Ground("3i", {0, 1, 2}, {0, 1, 2}), p);
    const Box b = EmbedConjunctive(Ground("3i", {2, 0, 1}, {2, 0, 1}), p);
    const Box c = EmbedConjunctive(Ground("3i", {1, 2, 0}, {1, 2, 0}), p);
    CHECK(a.center == b.center);
    CHECK(a.offset == b.offset);
    CHECK(a.center == c.center);
    CHECK(a.offset == c.offset);
  }
}

TEST_CASE("epfo embedding uses the DNF branches") {
  const ModelParams p = ModelParams::Initialize(SmallConfig("q2b"), 5, 4, 9);
  const auto conj = EmbedEpfo(Ground("ip", {0, 1}, {0, 1, 2}), p);
  REQUIRE(conj.size() == 1);
  CHECK(conj[0].center ==
        EmbedConjunctive(Ground("ip", {0, 1}, {0, 1, 2}), p).center);

  const auto two_u = EmbedEpfo(Ground("2u", {0, 3}, {1, 2}), p);
  REQUIRE(two_u.size() == 2);
  CHECK(two_u[0].center == EmbedConjunctive(Ground("1p", {0}, {1}), p).center);
  CHECK(two_u[1].center == EmbedConjunctive(Ground("1p", {3}, {2}), p).center);

  const auto up = EmbedEpfo(Ground("up", {0, 3}, {1, 2, 3}), p);
  REQUIRE(up.size() == 2);
  const Box chain0 = EmbedConjunctive(Ground("2p", {0}, {1, 3}), p);
  const Box chain1 = EmbedConjunctive(Ground("2p", {3}, {2, 3}), p);
  CHECK(up[0].center == chain0.center);
  CHECK(up[0].offset == chain0.offset);
  CHECK(up[1].center == chain1.center);
}

TEST_CASE("point baseline scores by translation") {
  ModelConfig c = SmallConfig("gqe");
  const ModelParams p = ModelParams::Initialize(c, 6, 3, 10);
  const auto boxes = EmbedEpfo(Ground("1p", {1}, {2}), p);
  for (EntityId v = 0; v < 6; ++v) {
    Real l1 = 0;
    for (std::size_t j = 0; j < 4; ++j) {
      l1 += std::fabs(p.Entity(1)[j] + p.RelationCenter(2)[j] - p.Entity(v)[j]);
    }
    CHECK(Score(p, boxes, v) == doctest::Approx(l1).epsilon(1e-14));
  }
}

TEST_CASE("finite differences for every variant and structure") {
  Rng rng(11);
  for (const char* variant :
       {"q2b", "q2b-avg", "q2b-deepsets", "q2b-sharedoffset", "gqe"}) {
    for (const QueryStructure& s : StructureTemplates()) {
      const ModelParams p =
          ModelParams::Initialize(SmallConfig(variant), 5, 4, rng.Next());
      const ComputationGraph g = testing::RandomGrounding(
          s,
          BuildSplitGraphs(
              std::vector<NamedTriple>{
                  {"a", "r", "b"}, {"c", "s", "d"}, {"e", "r", "a"}},
              {}, {})
              .test,
          rng);
      const auto result = testing::CheckQueryGradient(p, g, 0, {1, 2, 4});
      INFO(variant, " ", s.name, " worst ", result.worst_name);
      CHECK(result.failed == 0);
      CHECK(result.checked > 0);
    }
  }
}

TEST_CASE("untouched rows get no gradient and duplicated queries double it") {
  const ModelParams p = ModelParams::Initialize(SmallConfig("q2b"), 8, 4, 12);
  const ComputationGraph g = Ground("2i", {0, 1}, {0, 1});
  Gradients once = p.ZeroGradients();
  QueryLossAndGradient(p, g, 2, std::vector<EntityId>{3}, once);
  for (EntityId e : {4, 5, 6, 7}) {
    for (std::size_t j = 0; j < 4; ++j) {
      CHECK(once.tensors[kEntityTable].data[e * 4 + j] == 0);
    }
  }
  const std::size_t r3 = 3 * 8;
  for (std::size_t j = 0; j < 8; ++j) {
    CHECK(once.tensors[kRelationTable].data[r3 + j] == 0);
  }
  Gradients twice = p.ZeroGradients();
  QueryLossAndGradient(p, g, 2, std::vector<EntityId>{3}, twice);
  QueryLossAndGradient(p, g, 2, std::vector<EntityId>{3}, twice);
  for (std::size_t k = 0; k < once.tensors.size(); ++k) {
    for (std::size_t i = 0; i < once.tensors[k].data.size(); ++i) {
      CHECK(twice.tensors[k].data[i] ==
            doctest::Approx(2 * once.tensors[k].data[i]).epsilon(1e-14));
    }
  }
}

TEST_CASE("adam") {
  ModelParams p = ModelParams::Initialize(SmallConfig("q2b-avg"), 2, 1, 13);
  const ModelParams start = p;
  AdamState state = MakeAdamState(p);
  Gradients g = p.ZeroGradients();
  AdamStep(p, g, state, 0.1);
  CHECK(p.tensors[kEntityTable].data == start.tensors[kEntityTable].data);

  // First step with gradient g: m_hat = g, v_hat = g^2.
  const Real lr = 0.01;
  const Real grad = 0.37;
  p = start;
  state = MakeAdamState(p);
  g.Zero();
  g.tensors[kEntityTable].data[0] = grad;
  AdamStep(p, g, state, lr);
  const Real expected =
      start.tensors[kEntityTable].data[0] - lr * grad / (grad + 1e-8);
  CHECK(p.tensors[kEntityTable].data[0] ==
        doctest::Approx(expected).epsilon(1e-15));
  CHECK(p.tensors[kEntityTable].data[1] == start.tensors[kEntityTable].data[1]);

  // Zero gradient afterwards: moments decay.
  const Real m_before = state.first_moment[kEntityTable].data[0];
  g.Zero();
  AdamStep(p, g, state, lr);
  CHECK(state.first_moment[kEntityTable].data[0] ==
        doctest::Approx(0.9 * m_before));

  // Constant gradient: step size stays within lr.
  p = start;
  state = MakeAdamState(p);
  g.tensors[kEntityTable].data[0] = -2.5;
  for (int t = 0; t < 200; ++t) {
    const Real before = p.tensors[kEntityTable].data[0];
    AdamStep(p, g, state, lr);
    const Real step = p.tensors[kEntityTable].data[0] - before;
    CHECK(step > 0);
    CHECK(std::fabs(step) <= lr * (1 + 1e-6));
  }

  // lr = 0 changes nothing.
  p = start;
  state = MakeAdamState(p);
  AdamStep(p, g, state, 0);
  CHECK(p.tensors[kEntityTable].data == start.tensors[kEntityTable].data);

  g.tensors[kRelationTable].data[1] = std::nan("");
  try {
    AdamStep(p, g, state, lr);
    FAIL("expected TrainingError");
  } catch (const TrainingError& e) {
    CHECK(std::string(e.what()).find("relation") != std::string::npos);
  }
  CHECK(p.tensors[kEntityTable].data == start.tensors[kEntityTable].data);
}

TEST_CASE("checkpoint round trip and vocabulary guard") {
  const ModelParams p = ModelParams::Initialize(SmallConfig("q2b"), 5, 4, 14);
  const GraphSplits a =
      BuildSplitGraphs(std::vector<NamedTriple>{{"a", "r", "b"}}, {}, {});
  const GraphSplits b =
      BuildSplitGraphs(std::vector<NamedTriple>{{"x", "r", "y"}}, {}, {});
  std::stringstream buf;
  WriteCheckpoint(buf, p, a.train.vocab().Hash());
  const std::string bytes = buf.str();
  const Checkpoint back = ReadCheckpoint(buf);
  CHECK(back.vocab_hash == a.train.vocab().Hash());
  CHECK(back.params.config().ToText() == p.config().ToText());
  for (std::size_t k = 0; k < p.tensors.size(); ++k) {
    CHECK(back.params.tensors[k].data == p.tensors[k].data);
  }
  std::stringstream again;
  WriteCheckpoint(again, back.params, back.vocab_hash);
  CHECK(again.str() == bytes);

  Checkpoint mismatched = back;
  try {
    CheckCompatible(mismatched, b.train.vocab());
    FAIL("expected CompatibilityError");
  } catch (const CompatibilityError& e) {
    std::ostringstream h1, h2;
    h1 << std::hex << a.train.vocab().Hash();
    h2 << std::hex << b.train.vocab().Hash();
    CHECK(std::string(e.what()).find(h1.str()) != std::string::npos);
    CHECK(std::string(e.what()).find(h2.str()) != std::string::npos);
  }
  std::istringstream junk("NOTACKPT");
  CHECK_THROWS_AS(ReadCheckpoint(junk), ParseError);
  std::istringstream truncated(bytes.substr(0, bytes.size() / 2));
  CHECK_THROWS_AS(ReadCheckpoint(truncated), ParseError);
}

}  // namespace
}  // namespace boxq
