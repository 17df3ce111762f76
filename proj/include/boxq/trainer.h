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

#ifndef BOXQ_TRAINER_H_
#define BOXQ_TRAINER_H_

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "boxq/evaluator.h"
#include "boxq/model.h"
#include "boxq/query_sampler.h"
#include "boxq/random.h"

namespace boxq {

// k distinct entities drawn uniformly from [0, num_entities) \ answers.
// `answers` must be sorted. Throws SamplingError when fewer than k remain.
std::vector<EntityId> SampleNegatives(std::span<const EntityId> answers,
                                      std::size_t num_entities, std::size_t k,
                                      Rng& rng);

// -log sigmoid(gamma - pos) - mean_i log sigmoid(neg_i - gamma). Optional
// outputs receive the partial derivatives.
Real NegativeSamplingLoss(Real pos, std::span<const Real> negs, Real gamma,
                          Real* d_pos = nullptr, std::span<Real> d_negs = {});

struct EpochLog {
  int epoch = 0;
  double loss = 0;  // mean over the epoch's query visits
  std::optional<Metrics> validation;
  bool best = false;
};

struct TrainOptions {
  int workers = 1;
  // Stop after one optimiser step.
  bool dry_run = false;
  // Model selection set; without one the last epoch is kept.
  const QuerySet* validation = nullptr;
  QueryStage validation_stage = QueryStage::kValid;
  std::function<void(const EpochLog&)> on_epoch;
  // Parameters are written here before aborting on a non-finite loss.
  std::filesystem::path diagnostic_path;
};

struct TrainResult {
  ModelParams best;
  ModelParams last;
  int best_epoch = 0;
  double best_mrr = 0;
  std::vector<EpochLog> history;
};

// Joint training over config.train_structures. Every iteration draws
// config.batch_per_structure queries per structure; an epoch is one pass over
// the largest structure's queries while smaller lists cycle. Bit-identical for
// a fixed seed when workers == 1.
TrainResult Train(const ModelConfig& config, std::size_t num_entities,
                  std::size_t num_relations, const QuerySet& train,
                  const TrainOptions& options = {});

// Single-query loss and gradient accumulation, exposed for tests.
Real QueryLossAndGradient(const ModelParams& params, const ComputationGraph& g,
                          EntityId positive,
                          std::span<const EntityId> negatives,
                          Gradients& grads);

std::string FormatEpochLog(const EpochLog& log);

}  // namespace boxq

#endif  // BOXQ_TRAINER_H_
