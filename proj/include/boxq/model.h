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

#ifndef BOXQ_MODEL_H_
#define BOXQ_MODEL_H_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "boxq/box.h"
#include "boxq/computation_graph.h"
#include "boxq/mlp.h"
#include "boxq/types.h"

namespace boxq {

enum class IntersectionMode { kAttention, kAverage, kDeepSetsCenter };
enum class OffsetMode { kPerRelation, kShared };
enum class Geometry { kBox, kPoint };

struct ModelConfig {
  int dim = 400;
  Real alpha = 0.2;
  Real gamma = 24;
  int negatives = 128;
  IntersectionMode intersection = IntersectionMode::kAttention;
  OffsetMode offset = OffsetMode::kPerRelation;
  Geometry geometry = Geometry::kBox;
  Real learning_rate = 0.0001;
  int epochs = 250;
  int batch_per_structure = 512;
  std::uint64_t seed = 0;
  std::vector<std::string> train_structures = {"1p", "2p", "3p", "2i", "3i"};
  int eval_every = 1;  // epochs between validation passes; 0 disables

  // Throws ArgumentError on out-of-range values.
  void Validate() const;

  // Sets one field from its text form; throws ArgumentError for unknown keys
  // or unparsable values. "variant" expands to the preset of that name.
  void Set(std::string_view key, std::string_view value);
  // Ordered key/value view of every field.
  std::vector<std::pair<std::string, std::string>> ToKeyValues() const;
  std::string ToText() const;
};

// Presets: q2b, q2b-avg, q2b-deepsets, q2b-avg-1p, q2b-sharedoffset, gqe.
void ApplyVariant(std::string_view variant, ModelConfig& config);

struct Tensor {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Real> data;

  void Zero() { std::fill(data.begin(), data.end(), Real(0)); }
};

enum TensorSlot : std::size_t {
  kEntityTable,
  kRelationTable,  // rows: center (d) then raw offset (d)
  kAttentionW1,
  kAttentionB1,
  kAttentionW2,
  kAttentionB2,
  kOffsetInnerW1,
  kOffsetInnerB1,
  kOffsetInnerW2,
  kOffsetInnerB2,
  kOffsetOuterW1,
  kOffsetOuterB1,
  kOffsetOuterW2,
  kOffsetOuterB2,
  kCenterInnerW1,
  kCenterInnerB1,
  kCenterInnerW2,
  kCenterInnerB2,
  kCenterOuterW1,
  kCenterOuterB1,
  kCenterOuterW2,
  kCenterOuterB2,
  kSharedOffset,
  kNumTensorSlots
};

// Gradient accumulators with the same shapes as the parameters.
struct Gradients {
  std::vector<Tensor> tensors;
  void Zero();
};

// Entity points, relation boxes and the intersection networks. Tensors a
// configuration does not use are left empty.
class ModelParams {
 public:
  ModelParams() = default;
  ModelParams(ModelConfig config, std::size_t num_entities,
              std::size_t num_relations);

  // Uniform initialisation from `seed`: embeddings in +-1/sqrt(d), raw
  // offsets in [0, 1/sqrt(d)], weights in +-sqrt(6/fan_in), zero biases.
  static ModelParams Initialize(const ModelConfig& config,
                                std::size_t num_entities,
                                std::size_t num_relations, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  std::size_t dim() const { return static_cast<std::size_t>(config_.dim); }
  std::size_t num_entities() const { return tensors[kEntityTable].rows; }
  std::size_t num_relations() const { return tensors[kRelationTable].rows; }

  std::span<const Real> Entity(EntityId e) const;
  std::span<const Real> RelationCenter(RelationId r) const;
  std::span<const Real> RelationRawOffset(RelationId r) const;
  // Center plus |raw offset| (zero offset in point geometry).
  RelationBox Relation(RelationId r) const;
  std::vector<Real> SharedOffset() const;

  MlpWeights Mlp(TensorSlot w1) const;
  Gradients ZeroGradients() const;

  std::vector<Tensor> tensors;

 private:
  ModelConfig config_;
};

MlpGrads MlpGradViews(Gradients& g, TensorSlot w1);

// Recorded forward pass of one union-free branch.
struct IntersectionTrace {
  std::vector<std::vector<Real>> inputs;  // [center; offset] per branch
  std::vector<MlpTrace> attention;
  std::vector<std::vector<Real>> weights;
  DeepSetsTrace center_sets;
  DeepSetsTrace offset_sets;
  std::vector<Real> gate;  // sigmoid of the offset DeepSets output
  std::vector<Real> min_offset;
  std::vector<std::size_t> argmin;
};

struct NodeTrace {
  int id = 0;
  bool anchor = false;
  EntityId entity = -1;
  std::vector<std::size_t> parents;  // indices into BranchTrace::nodes
  std::vector<RelationId> relations;
  std::vector<Box> projected;      // one per in-edge
  IntersectionTrace intersection;  // used when projected.size() > 1
  Box box;
};

struct BranchTrace {
  std::vector<NodeTrace> nodes;  // topological order, sink last
  const Box& output() const { return nodes.back().box; }
};

struct QueryTrace {
  std::vector<BranchTrace> branches;
  std::vector<Box> boxes;  // one per branch
};

// Attention over boxes given as [center; offset] inputs.
std::vector<std::vector<Real>> AttentionWeights(
    const ModelParams& params, std::span<const std::vector<Real>> inputs);

// Permutation-invariant encoder with the offset-shrink network.
std::vector<Real> OffsetDeepSets(const ModelParams& params,
                                 std::span<const std::vector<Real>> inputs);

// Box of a union-free query. Throws ContractViolation for union edges.
Box EmbedConjunctive(const ComputationGraph& g, const ModelParams& params,
                     BranchTrace* trace = nullptr);

// One box per DNF branch.
std::vector<Box> EmbedEpfo(const ComputationGraph& g, const ModelParams& params,
                           QueryTrace* trace = nullptr);

// Score of an entity: minimum box distance over the query's boxes.
Real Score(const ModelParams& params, std::span<const Box> boxes, EntityId e);

// Adds d_scale * d Score / d(entity row, boxes) into `grads` (entity row) and
// `d_boxes` (center then offset per box).
void AccumulateScoreGradient(const ModelParams& params,
                             std::span<const Box> boxes, EntityId e,
                             Real d_scale, Gradients& grads,
                             std::vector<Box>& d_boxes);

// Reverse pass from box gradients to every parameter the query touched.
void Backward(const ModelParams& params, const QueryTrace& trace,
              std::span<const Box> d_boxes, Gradients& grads);

}  // namespace boxq

#endif  // BOXQ_MODEL_H_
