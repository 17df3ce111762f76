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
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <tuple>

#include "boxq/dnf.h"
#include "boxq/query_structures.h"
#include "boxq/random.h"

namespace boxq {
namespace {

Real Sign(Real x) { return x > 0 ? Real(1) : (x < 0 ? Real(-1) : Real(0)); }

Real Sigmoid(Real x) {
  if (x >= 0) return Real(1) / (Real(1) + std::exp(-x));
  const Real e = std::exp(x);
  return e / (Real(1) + e);
}

std::string_view IntersectionName(IntersectionMode m) {
  switch (m) {
    case IntersectionMode::kAttention:
      return "attention";
    case IntersectionMode::kAverage:
      return "average";
    case IntersectionMode::kDeepSetsCenter:
      return "deepsets";
  }
  return "?";
}

template <typename T>
T ParseNumber(std::string_view key, std::string_view value) {
  T out{};
  if constexpr (std::is_floating_point_v<T>) {
    std::istringstream in{std::string(value)};
    in >> out;
    if (!in || !in.eof()) {
      throw ArgumentError("config key '" + std::string(key) +
                          "': bad number '" + std::string(value) + "'");
    }
  } else {
    const auto [ptr, ec] =
        std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
      throw ArgumentError("config key '" + std::string(key) +
                          "': bad integer '" + std::string(value) + "'");
    }
  }
  return out;
}

std::string FormatReal(Real v) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, result.ptr);
}

}  // namespace

void ModelConfig::Validate() const {
  if (dim < 1) throw ArgumentError("dim must be positive");
  if (!(alpha > 0 && alpha <= 1))
    throw ArgumentError("alpha must be in (0, 1]");
  if (!(gamma > 0)) throw ArgumentError("gamma must be positive");
  if (negatives < 1) throw ArgumentError("negatives must be at least 1");
  if (!(learning_rate >= 0)) throw ArgumentError("learning_rate must be >= 0");
  if (epochs < 0) throw ArgumentError("epochs must be >= 0");
  if (batch_per_structure < 1) {
    throw ArgumentError("batch_per_structure must be at least 1");
  }
  if (eval_every < 0) throw ArgumentError("eval_every must be >= 0");
  if (train_structures.empty()) {
    throw ArgumentError("train_structures must not be empty");
  }
  for (const auto& s : train_structures) {
    if (!StructureTemplate(s).trainable) {
      throw ArgumentError("structure " + s + " cannot be trained on");
    }
  }
}

void ModelConfig::Set(std::string_view key, std::string_view value) {
  if (key == "variant") {
    ApplyVariant(value, *this);
  } else if (key == "dim") {
    dim = ParseNumber<int>(key, value);
  } else if (key == "alpha") {
    alpha = ParseNumber<Real>(key, value);
  } else if (key == "gamma") {
    gamma = ParseNumber<Real>(key, value);
  } else if (key == "negatives") {
    negatives = ParseNumber<int>(key, value);
  } else if (key == "intersection") {
    if (value == "attention") {
      intersection = IntersectionMode::kAttention;
    } else if (value == "average") {
      intersection = IntersectionMode::kAverage;
    } else if (value == "deepsets") {
      intersection = IntersectionMode::kDeepSetsCenter;
    } else {
      throw ArgumentError("intersection must be attention|average|deepsets");
    }
  } else if (key == "offset") {
    if (value == "per-relation") {
      offset = OffsetMode::kPerRelation;
    } else if (value == "shared") {
      offset = OffsetMode::kShared;
    } else {
      throw ArgumentError("offset must be per-relation|shared");
    }
  } else if (key == "geometry") {
    if (value == "box") {
      geometry = Geometry::kBox;
    } else if (value == "point") {
      geometry = Geometry::kPoint;
    } else {
      throw ArgumentError("geometry must be box|point");
    }
  } else if (key == "learning_rate") {
    learning_rate = ParseNumber<Real>(key, value);
  } else if (key == "epochs") {
    epochs = ParseNumber<int>(key, value);
  } else if (key == "batch_per_structure") {
    batch_per_structure = ParseNumber<int>(key, value);
  } else if (key == "seed") {
    seed = ParseNumber<std::uint64_t>(key, value);
  } else if (key == "eval_every") {
    eval_every = ParseNumber<int>(key, value);
  } else if (key == "train_structures") {
    train_structures.clear();
    std::size_t start = 0;
    while (start <= value.size()) {
      const std::size_t comma = std::min(value.find(',', start), value.size());
      if (comma > start) {
        train_structures.emplace_back(value.substr(start, comma - start));
      }
      start = comma + 1;
    }
  } else {
    throw ArgumentError("unknown config key '" + std::string(key) + "'");
  }
}

std::vector<std::pair<std::string, std::string>> ModelConfig::ToKeyValues()
    const {
  std::string structures;
  for (std::size_t i = 0; i < train_structures.size(); ++i) {
    if (i) structures += ',';
    structures += train_structures[i];
  }
  return {
      {"dim", std::to_string(dim)},
      {"alpha", FormatReal(alpha)},
      {"gamma", FormatReal(gamma)},
      {"negatives", std::to_string(negatives)},
      {"intersection", std::string(IntersectionName(intersection))},
      {"offset", offset == OffsetMode::kShared ? "shared" : "per-relation"},
      {"geometry", geometry == Geometry::kPoint ? "point" : "box"},
      {"learning_rate", FormatReal(learning_rate)},
      {"epochs", std::to_string(epochs)},
      {"batch_per_structure", std::to_string(batch_per_structure)},
      {"seed", std::to_string(seed)},
      {"train_structures", structures},
      {"eval_every", std::to_string(eval_every)},
  };
}

std::string ModelConfig::ToText() const {
  std::string out;
  for (const auto& [k, v] : ToKeyValues()) out += k + " = " + v + "\n";
  return out;
}

void ApplyVariant(std::string_view variant, ModelConfig& config) {
  config.geometry = Geometry::kBox;
  config.offset = OffsetMode::kPerRelation;
  config.intersection = IntersectionMode::kAttention;
  config.train_structures = TrainableStructureNames();
  if (variant == "q2b") {
  } else if (variant == "q2b-avg") {
    config.intersection = IntersectionMode::kAverage;
  } else if (variant == "q2b-deepsets") {
    config.intersection = IntersectionMode::kDeepSetsCenter;
  } else if (variant == "q2b-avg-1p") {
    config.intersection = IntersectionMode::kAverage;
    config.train_structures = {"1p"};
  } else if (variant == "q2b-sharedoffset") {
    config.offset = OffsetMode::kShared;
  } else if (variant == "gqe") {
    config.geometry = Geometry::kPoint;
    config.intersection = IntersectionMode::kDeepSetsCenter;
  } else {
    throw ArgumentError("unknown variant '" + std::string(variant) + "'");
  }
}

void Gradients::Zero() {
  for (Tensor& t : tensors) t.Zero();
}

ModelParams::ModelParams(ModelConfig config, std::size_t num_entities,
                         std::size_t num_relations)
    : config_(std::move(config)) {
  config_.Validate();
  const std::size_t d = dim();
  tensors.resize(kNumTensorSlots);
  auto make = [this](TensorSlot slot, std::string name, std::size_t rows,
                     std::size_t cols) {
    tensors[slot] = Tensor{std::move(name), rows, cols,
                           std::vector<Real>(rows * cols, Real(0))};
  };
  for (std::size_t s = 0; s < kNumTensorSlots; ++s) {
    tensors[s].name = "unused." + std::to_string(s);
  }
  make(kEntityTable, "entity", num_entities, d);
  make(kRelationTable, "relation", num_relations, 2 * d);
  auto mlp = [&](TensorSlot w1, const std::string& prefix, std::size_t in,
                 std::size_t out) {
    make(w1, prefix + ".w1", in, in);
    make(static_cast<TensorSlot>(w1 + 1), prefix + ".b1", 1, in);
    make(static_cast<TensorSlot>(w1 + 2), prefix + ".w2", out, in);
    make(static_cast<TensorSlot>(w1 + 3), prefix + ".b2", 1, out);
  };
  const bool box = config_.geometry == Geometry::kBox;
  if (config_.intersection == IntersectionMode::kAttention) {
    mlp(kAttentionW1, "attention", 2 * d, d);
  }
  if (box && config_.offset == OffsetMode::kPerRelation) {
    mlp(kOffsetInnerW1, "offset_sets.inner", 2 * d, 2 * d);
    mlp(kOffsetOuterW1, "offset_sets.outer", 2 * d, d);
  }
  if (config_.intersection == IntersectionMode::kDeepSetsCenter) {
    mlp(kCenterInnerW1, "center_sets.inner", 2 * d, 2 * d);
    mlp(kCenterOuterW1, "center_sets.outer", 2 * d, d);
  }
  if (box && config_.offset == OffsetMode::kShared) {
    make(kSharedOffset, "shared_offset", 1, d);
  }
}

ModelParams ModelParams::Initialize(const ModelConfig& config,
                                    std::size_t num_entities,
                                    std::size_t num_relations,
                                    std::uint64_t seed) {
  ModelParams p(config, num_entities, num_relations);
  Rng rng(seed);
  const Real scale = Real(1) / std::sqrt(static_cast<Real>(p.dim()));
  const std::size_t d = p.dim();
  for (Real& x : p.tensors[kEntityTable].data) x = rng.Uniform(-scale, scale);
  Tensor& rel = p.tensors[kRelationTable];
  for (std::size_t r = 0; r < rel.rows; ++r) {
    Real* row = rel.data.data() + r * 2 * d;
    for (std::size_t j = 0; j < d; ++j) row[j] = rng.Uniform(-scale, scale);
    for (std::size_t j = d; j < 2 * d; ++j) row[j] = rng.Uniform(0, scale);
  }
  for (std::size_t s = kAttentionW1; s < kSharedOffset; ++s) {
    Tensor& t = p.tensors[s];
    const bool bias = t.rows == 1;
    if (bias || t.data.empty()) continue;
    const Real bound = std::sqrt(Real(6) / static_cast<Real>(t.cols));
    for (Real& x : t.data) x = rng.Uniform(-bound, bound);
  }
  for (Real& x : p.tensors[kSharedOffset].data) x = rng.Uniform(0, scale);
  return p;
}

std::span<const Real> ModelParams::Entity(EntityId e) const {
  const Tensor& t = tensors[kEntityTable];
  return std::span<const Real>(t.data).subspan(
      static_cast<std::size_t>(e) * t.cols, t.cols);
}

std::span<const Real> ModelParams::RelationCenter(RelationId r) const {
  const Tensor& t = tensors[kRelationTable];
  return std::span<const Real>(t.data).subspan(
      static_cast<std::size_t>(r) * t.cols, dim());
}

std::span<const Real> ModelParams::RelationRawOffset(RelationId r) const {
  const Tensor& t = tensors[kRelationTable];
  return std::span<const Real>(t.data).subspan(
      static_cast<std::size_t>(r) * t.cols + dim(), dim());
}

RelationBox ModelParams::Relation(RelationId r) const {
  const auto c = RelationCenter(r);
  std::vector<Real> offset(dim(), 0);
  if (config_.geometry == Geometry::kBox) {
    const auto raw = RelationRawOffset(r);
    for (std::size_t j = 0; j < dim(); ++j) offset[j] = std::abs(raw[j]);
  }
  return RelationBox(std::vector<Real>(c.begin(), c.end()), std::move(offset));
}

std::vector<Real> ModelParams::SharedOffset() const {
  std::vector<Real> out(tensors[kSharedOffset].data);
  for (Real& x : out) x = std::abs(x);
  return out;
}

MlpWeights ModelParams::Mlp(TensorSlot w1) const {
  const Tensor& t1 = tensors[w1];
  const Tensor& t2 = tensors[w1 + 2];
  return MlpWeights{tensors[w1].data,
                    tensors[w1 + 1].data,
                    tensors[w1 + 2].data,
                    tensors[w1 + 3].data,
                    t1.cols,
                    t1.rows,
                    t2.rows};
}

Gradients ModelParams::ZeroGradients() const {
  Gradients g;
  g.tensors = tensors;
  g.Zero();
  return g;
}

MlpGrads MlpGradViews(Gradients& g, TensorSlot w1) {
  return MlpGrads{g.tensors[w1].data, g.tensors[w1 + 1].data,
                  g.tensors[w1 + 2].data, g.tensors[w1 + 3].data};
}

std::vector<std::vector<Real>> AttentionWeights(
    const ModelParams& params, std::span<const std::vector<Real>> inputs) {
  const MlpWeights w = params.Mlp(kAttentionW1);
  std::vector<std::vector<Real>> logits;
  MlpTrace trace;
  for (const auto& x : inputs) {
    MlpForward(w, x, trace);
    logits.push_back(trace.output);
  }
  return SoftmaxAcross(logits);
}

std::vector<Real> OffsetDeepSets(const ModelParams& params,
                                 std::span<const std::vector<Real>> inputs) {
  DeepSetsTrace trace;
  return DeepSetsForward(params.Mlp(kOffsetInnerW1), params.Mlp(kOffsetOuterW1),
                         inputs, trace);
}

namespace {

Box ProjectStep(const ModelParams& params, const Box& parent, RelationId r) {
  const ModelConfig& c = params.config();
  if (c.geometry == Geometry::kPoint) {
    Box out = Project(parent, params.Relation(r));
    std::fill(out.offset.begin(), out.offset.end(), Real(0));
    return out;
  }
  if (c.offset == OffsetMode::kShared) {
    Box out = Project(parent, params.Relation(r));
    out.offset = params.SharedOffset();
    return out;
  }
  return Project(parent, params.Relation(r));
}

Box IntersectStep(const ModelParams& params, std::span<const Box> boxes,
                  IntersectionTrace& t) {
  const ModelConfig& c = params.config();
  const std::size_t d = params.dim();
  const std::size_t n = boxes.size();
  t.inputs.assign(n, std::vector<Real>(2 * d));
  for (std::size_t i = 0; i < n; ++i) {
    std::copy(boxes[i].center.begin(), boxes[i].center.end(),
              t.inputs[i].begin());
    std::copy(boxes[i].offset.begin(), boxes[i].offset.end(),
              t.inputs[i].begin() + d);
  }
  Box out(std::vector<Real>(d, 0), std::vector<Real>(d, 0));
  switch (c.intersection) {
    case IntersectionMode::kAttention: {
      const MlpWeights w = params.Mlp(kAttentionW1);
      t.attention.resize(n);
      std::vector<std::vector<Real>> logits(n);
      for (std::size_t i = 0; i < n; ++i) {
        MlpForward(w, t.inputs[i], t.attention[i]);
        logits[i] = t.attention[i].output;
      }
      t.weights = SoftmaxAcross(logits);
      break;
    }
    case IntersectionMode::kAverage:
      t.weights.assign(n, std::vector<Real>(d, Real(1) / static_cast<Real>(n)));
      break;
    case IntersectionMode::kDeepSetsCenter:
      out.center =
          DeepSetsForward(params.Mlp(kCenterInnerW1),
                          params.Mlp(kCenterOuterW1), t.inputs, t.center_sets);
      break;
  }
  if (c.intersection != IntersectionMode::kDeepSetsCenter) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        out.center[j] += t.weights[i][j] * boxes[i].center[j];
      }
    }
  }
  if (c.geometry == Geometry::kPoint) return out;
  if (c.offset == OffsetMode::kShared) {
    out.offset = params.SharedOffset();
    return out;
  }
  t.min_offset.assign(d, std::numeric_limits<Real>::infinity());
  t.argmin.assign(d, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      if (boxes[i].offset[j] < t.min_offset[j]) {
        t.min_offset[j] = boxes[i].offset[j];
        t.argmin[j] = i;
      }
    }
  }
  const std::vector<Real> raw =
      DeepSetsForward(params.Mlp(kOffsetInnerW1), params.Mlp(kOffsetOuterW1),
                      t.inputs, t.offset_sets);
  t.gate.resize(d);
  for (std::size_t j = 0; j < d; ++j) {
    t.gate[j] = Sigmoid(raw[j]);
    out.offset[j] = t.min_offset[j] * t.gate[j];
  }
  return out;
}

void IntersectBackward(const ModelParams& params, const IntersectionTrace& t,
                       std::span<const Box> boxes, const Box& d_out,
                       Gradients& grads, std::vector<Box>& d_boxes) {
  const ModelConfig& c = params.config();
  const std::size_t d = params.dim();
  const std::size_t n = boxes.size();
  std::vector<std::vector<Real>> d_inputs(n, std::vector<Real>(2 * d, 0));
  switch (c.intersection) {
    case IntersectionMode::kAttention: {
      std::vector<std::vector<Real>> d_weights(n, std::vector<Real>(d));
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
          d_boxes[i].center[j] += t.weights[i][j] * d_out.center[j];
          d_weights[i][j] = d_out.center[j] * boxes[i].center[j];
        }
      }
      std::vector<std::vector<Real>> d_logits(n, std::vector<Real>(d, 0));
      SoftmaxAcrossBackward(t.weights, d_weights, d_logits);
      const MlpWeights w = params.Mlp(kAttentionW1);
      const MlpGrads g = MlpGradViews(grads, kAttentionW1);
      for (std::size_t i = 0; i < n; ++i) {
        MlpBackward(w, t.attention[i], d_logits[i], g, d_inputs[i]);
      }
      break;
    }
    case IntersectionMode::kAverage:
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
          d_boxes[i].center[j] += t.weights[i][j] * d_out.center[j];
        }
      }
      break;
    case IntersectionMode::kDeepSetsCenter:
      DeepSetsBackward(params.Mlp(kCenterInnerW1), params.Mlp(kCenterOuterW1),
                       t.center_sets, d_out.center,
                       MlpGradViews(grads, kCenterInnerW1),
                       MlpGradViews(grads, kCenterOuterW1), d_inputs);
      break;
  }
  if (c.geometry == Geometry::kBox && c.offset == OffsetMode::kShared) {
    const auto& shared = params.tensors[kSharedOffset].data;
    auto& g = grads.tensors[kSharedOffset].data;
    for (std::size_t j = 0; j < d; ++j)
      g[j] += d_out.offset[j] * Sign(shared[j]);
  } else if (c.geometry == Geometry::kBox) {
    std::vector<Real> d_raw(d);
    for (std::size_t j = 0; j < d; ++j) {
      d_boxes[t.argmin[j]].offset[j] += d_out.offset[j] * t.gate[j];
      const Real d_gate = d_out.offset[j] * t.min_offset[j];
      d_raw[j] = d_gate * t.gate[j] * (Real(1) - t.gate[j]);
    }
    DeepSetsBackward(params.Mlp(kOffsetInnerW1), params.Mlp(kOffsetOuterW1),
                     t.offset_sets, d_raw, MlpGradViews(grads, kOffsetInnerW1),
                     MlpGradViews(grads, kOffsetOuterW1), d_inputs);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      d_boxes[i].center[j] += d_inputs[i][j];
      d_boxes[i].offset[j] += d_inputs[i][d + j];
    }
  }
}

Box ZeroBox(std::size_t d) {
  return Box(std::vector<Real>(d, 0), std::vector<Real>(d, 0));
}

void BranchBackward(const ModelParams& params, const BranchTrace& trace,
                    const Box& d_sink, Gradients& grads) {
  const ModelConfig& c = params.config();
  const std::size_t d = params.dim();
  std::vector<Box> d_nodes(trace.nodes.size(), ZeroBox(d));
  d_nodes.back() = d_sink;
  auto& entity_grad = grads.tensors[kEntityTable].data;
  auto& relation_grad = grads.tensors[kRelationTable].data;
  const auto& relation = params.tensors[kRelationTable].data;
  for (std::size_t k = trace.nodes.size(); k-- > 0;) {
    const NodeTrace& node = trace.nodes[k];
    const Box& dn = d_nodes[k];
    if (node.anchor) {
      Real* row =
          entity_grad.data() + static_cast<std::size_t>(node.entity) * d;
      for (std::size_t j = 0; j < d; ++j) row[j] += dn.center[j];
      continue;
    }
    std::vector<Box> d_proj;
    if (node.projected.size() == 1) {
      d_proj.push_back(dn);
    } else {
      d_proj.assign(node.projected.size(), ZeroBox(d));
      IntersectBackward(params, node.intersection, node.projected, dn, grads,
                        d_proj);
    }
    for (std::size_t i = 0; i < node.parents.size(); ++i) {
      Box& dp = d_nodes[node.parents[i]];
      const std::size_t base =
          static_cast<std::size_t>(node.relations[i]) * 2 * d;
      for (std::size_t j = 0; j < d; ++j) {
        dp.center[j] += d_proj[i].center[j];
        relation_grad[base + j] += d_proj[i].center[j];
      }
      if (c.geometry == Geometry::kPoint) continue;
      if (c.offset == OffsetMode::kShared) {
        const auto& shared = params.tensors[kSharedOffset].data;
        auto& g = grads.tensors[kSharedOffset].data;
        for (std::size_t j = 0; j < d; ++j) {
          g[j] += d_proj[i].offset[j] * Sign(shared[j]);
        }
        continue;
      }
      for (std::size_t j = 0; j < d; ++j) {
        dp.offset[j] += d_proj[i].offset[j];
        relation_grad[base + d + j] +=
            d_proj[i].offset[j] * Sign(relation[base + d + j]);
      }
    }
  }
}

}  // namespace

Box EmbedConjunctive(const ComputationGraph& g, const ModelParams& params,
                     BranchTrace* trace) {
  if (g.HasUnion()) {
    throw ContractViolation("conjunctive embedding given a union edge");
  }
  BranchTrace local;
  BranchTrace& t = trace ? *trace : local;
  t.nodes.clear();
  const std::vector<int> order = g.TopologicalOrder();
  std::map<int, std::size_t> position;
  const int target = g.Target();
  // Target last; it is the unique sink so nothing depends on it.
  std::vector<int> ordered;
  for (int id : order) {
    if (id != target) ordered.push_back(id);
  }
  ordered.push_back(target);
  for (std::size_t k = 0; k < ordered.size(); ++k) position[ordered[k]] = k;

  for (int id : ordered) {
    NodeTrace node;
    node.id = id;
    const auto in = g.InEdges(id);
    if (in.empty()) {
      node.anchor = true;
      node.entity = g.AnchorEntity(*g.FindNode(id));
      if (node.entity < 0 ||
          static_cast<std::size_t>(node.entity) >= params.num_entities()) {
        throw ContractViolation("anchor entity outside the model's table");
      }
      node.box = Box::Point(params.Entity(node.entity));
    } else {
      for (const Edge* e : in) {
        const RelationId r = g.EdgeRelation(*e);
        if (r < 0 || static_cast<std::size_t>(r) >= params.num_relations()) {
          throw ContractViolation("relation outside the model's table");
        }
        node.parents.push_back(position.at(e->src));
        node.relations.push_back(r);
        node.projected.push_back(
            ProjectStep(params, t.nodes[node.parents.back()].box, r));
      }
      if (node.projected.size() > 1) {
        // Canonical input order: stable sort by (center, offset).
        std::vector<std::size_t> perm(node.projected.size());
        for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
        std::stable_sort(perm.begin(), perm.end(),
                         [&](std::size_t a, std::size_t b) {
                           const Box& x = node.projected[a];
                           const Box& y = node.projected[b];
                           return std::tie(x.center, x.offset) <
                                  std::tie(y.center, y.offset);
                         });
        NodeTrace sorted;
        for (std::size_t i : perm) {
          sorted.parents.push_back(node.parents[i]);
          sorted.relations.push_back(node.relations[i]);
          sorted.projected.push_back(std::move(node.projected[i]));
        }
        node.parents = std::move(sorted.parents);
        node.relations = std::move(sorted.relations);
        node.projected = std::move(sorted.projected);
      }
      node.box = node.projected.size() == 1
                     ? node.projected[0]
                     : IntersectStep(params, node.projected, node.intersection);
    }
    t.nodes.push_back(std::move(node));
  }
  return t.nodes.back().box;
}

std::vector<Box> EmbedEpfo(const ComputationGraph& g, const ModelParams& params,
                           QueryTrace* trace) {
  const DnfResult dnf = ToDnf(g);
  std::vector<Box> boxes;
  if (trace) trace->branches.assign(dnf.branches.size(), {});
  for (std::size_t b = 0; b < dnf.branches.size(); ++b) {
    boxes.push_back(EmbedConjunctive(dnf.branches[b], params,
                                     trace ? &trace->branches[b] : nullptr));
  }
  if (trace) trace->boxes = boxes;
  return boxes;
}

Real Score(const ModelParams& params, std::span<const Box> boxes, EntityId e) {
  return DistAgg(params.Entity(e), boxes, params.config().alpha);
}

void AccumulateScoreGradient(const ModelParams& params,
                             std::span<const Box> boxes, EntityId e,
                             Real d_scale, Gradients& grads,
                             std::vector<Box>& d_boxes) {
  const auto v = params.Entity(e);
  std::size_t best = 0;
  DistAgg(v, boxes, params.config().alpha, &best);
  const std::size_t d = params.dim();
  if (d_boxes.size() != boxes.size()) {
    d_boxes.assign(boxes.size(), ZeroBox(d));
  }
  std::span<Real> d_v(
      grads.tensors[kEntityTable].data.data() + static_cast<std::size_t>(e) * d,
      d);
  AccumulateDistBoxGrad(v, boxes[best].center, boxes[best].offset,
                        params.config().alpha, d_scale, d_v,
                        d_boxes[best].center, d_boxes[best].offset);
}

void Backward(const ModelParams& params, const QueryTrace& trace,
              std::span<const Box> d_boxes, Gradients& grads) {
  for (std::size_t b = 0; b < trace.branches.size(); ++b) {
    BranchBackward(params, trace.branches[b], d_boxes[b], grads);
  }
}

}  // namespace boxq
