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

#include "boxq/trainer.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <thread>
#include <unordered_set>

#include "boxq/adam.h"
#include "boxq/checkpoint.h"

namespace boxq {
namespace {

Real Softplus(Real x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

Real Sigmoid(Real x) {
  if (x >= 0) return Real(1) / (Real(1) + std::exp(-x));
  const Real e = std::exp(x);
  return e / (Real(1) + e);
}

struct WorkItem {
  const QueryRecord* record = nullptr;
  EntityId positive = 0;
  std::vector<EntityId> negatives;
  Real loss = 0;
};

// Cycles through one structure's queries in a reshuffled order.
class QueryCursor {
 public:
  explicit QueryCursor(const std::vector<QueryRecord>& queries)
      : queries_(&queries), order_(queries.size()) {}

  const QueryRecord& Next(Rng& rng) {
    if (next_ == 0) {
      for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
      rng.Shuffle(order_);
    }
    const QueryRecord& q = (*queries_)[order_[next_]];
    next_ = (next_ + 1) % order_.size();
    return q;
  }

 private:
  const std::vector<QueryRecord>* queries_;
  std::vector<std::size_t> order_;
  std::size_t next_ = 0;
};

void AddInto(Gradients& into, const Gradients& from) {
  for (std::size_t k = 0; k < into.tensors.size(); ++k) {
    auto& a = into.tensors[k].data;
    const auto& b = from.tensors[k].data;
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  }
}

}  // namespace

std::vector<EntityId> SampleNegatives(std::span<const EntityId> answers,
                                      std::size_t num_entities, std::size_t k,
                                      Rng& rng) {
  const std::size_t available =
      num_entities - std::min(num_entities, answers.size());
  if (available < k) {
    throw SamplingError("need " + std::to_string(k) + " negatives but only " +
                        std::to_string(available) + " non-answers exist");
  }
  auto is_answer = [&](EntityId e) {
    return std::binary_search(answers.begin(), answers.end(), e);
  };
  std::vector<EntityId> out;
  out.reserve(k);
  if (4 * k <= available) {
    std::unordered_set<EntityId> chosen;
    while (out.size() < k) {
      const auto e = static_cast<EntityId>(rng.Index(num_entities));
      if (is_answer(e) || !chosen.insert(e).second) continue;
      out.push_back(e);
    }
    return out;
  }
  std::vector<EntityId> pool;
  pool.reserve(available);
  for (std::size_t e = 0; e < num_entities; ++e) {
    if (!is_answer(static_cast<EntityId>(e)))
      pool.push_back(static_cast<EntityId>(e));
  }
  for (std::size_t i = 0; i < k; ++i) {
    std::swap(pool[i], pool[i + rng.Index(pool.size() - i)]);
    out.push_back(pool[i]);
  }
  return out;
}

Real NegativeSamplingLoss(Real pos, std::span<const Real> negs, Real gamma,
                          Real* d_pos, std::span<Real> d_negs) {
  Real loss = Softplus(pos - gamma);
  if (d_pos) *d_pos = Sigmoid(pos - gamma);
  if (negs.empty()) return loss;
  const Real inv_k = Real(1) / static_cast<Real>(negs.size());
  Real neg_sum = 0;
  for (std::size_t i = 0; i < negs.size(); ++i) {
    neg_sum += Softplus(gamma - negs[i]);
    if (!d_negs.empty()) d_negs[i] = -inv_k * Sigmoid(gamma - negs[i]);
  }
  return loss + inv_k * neg_sum;
}

Real QueryLossAndGradient(const ModelParams& params, const ComputationGraph& g,
                          EntityId positive,
                          std::span<const EntityId> negatives,
                          Gradients& grads) {
  QueryTrace trace;
  const std::vector<Box> boxes = EmbedEpfo(g, params, &trace);
  const Real pos = Score(params, boxes, positive);
  std::vector<Real> negs(negatives.size());
  for (std::size_t i = 0; i < negatives.size(); ++i) {
    negs[i] = Score(params, boxes, negatives[i]);
  }
  Real d_pos = 0;
  std::vector<Real> d_negs(negatives.size());
  const Real loss =
      NegativeSamplingLoss(pos, negs, params.config().gamma, &d_pos, d_negs);
  if (!std::isfinite(loss)) return loss;
  std::vector<Box> d_boxes;
  AccumulateScoreGradient(params, boxes, positive, d_pos, grads, d_boxes);
  for (std::size_t i = 0; i < negatives.size(); ++i) {
    AccumulateScoreGradient(params, boxes, negatives[i], d_negs[i], grads,
                            d_boxes);
  }
  Backward(params, trace, d_boxes, grads);
  return loss;
}

std::string FormatEpochLog(const EpochLog& log) {
  char buf[256];
  int n = std::snprintf(buf, sizeof(buf), "epoch=%d loss=%.6f", log.epoch,
                        log.loss);
  if (log.validation) {
    n += std::snprintf(buf + n, sizeof(buf) - n,
                       " valid_mrr=%.4f valid_h1=%.4f valid_h3=%.4f "
                       "valid_h10=%.4f",
                       log.validation->mrr, log.validation->h1,
                       log.validation->h3, log.validation->h10);
  }
  std::snprintf(buf + n, sizeof(buf) - n, " best=%d", log.best ? 1 : 0);
  return buf;
}

TrainResult Train(const ModelConfig& config, std::size_t num_entities,
                  std::size_t num_relations, const QuerySet& train,
                  const TrainOptions& options) {
  config.Validate();
  std::vector<QueryCursor> cursors;
  std::vector<std::string> names;
  std::size_t largest = 0;
  for (const std::string& s : config.train_structures) {
    const auto it = train.find(s);
    if (it == train.end() || it->second.empty()) {
      throw ArgumentError("no training queries for structure " + s);
    }
    cursors.emplace_back(it->second);
    names.push_back(s);
    largest = std::max(largest, it->second.size());
  }
  const std::size_t batch =
      static_cast<std::size_t>(config.batch_per_structure);
  const std::size_t iterations = (largest + batch - 1) / batch;
  const std::size_t k = static_cast<std::size_t>(config.negatives);
  const std::size_t workers =
      static_cast<std::size_t>(std::max(1, options.workers));

  TrainResult result;
  result.last =
      ModelParams::Initialize(config, num_entities, num_relations, config.seed);
  result.best = result.last;
  ModelParams& params = result.last;
  AdamState adam = MakeAdamState(params);
  Rng rng(Rng::DeriveSeed(config.seed, 1));
  std::vector<Gradients> grads(workers, params.ZeroGradients());
  std::vector<WorkItem> items;
  bool have_best = false;

  const int epochs = options.dry_run ? 1 : config.epochs;
  for (int epoch = 1; epoch <= epochs; ++epoch) {
    double loss_sum = 0;
    std::size_t visits = 0;
    for (std::size_t it = 0; it < iterations; ++it) {
      items.clear();
      for (std::size_t s = 0; s < cursors.size(); ++s) {
        for (std::size_t b = 0; b < batch; ++b) {
          WorkItem w;
          w.record = &cursors[s].Next(rng);
          const auto& answers = w.record->answers.train;
          if (answers.empty()) {
            throw SamplingError("training query without answers: " +
                                Serialize(w.record->query.graph));
          }
          w.positive = answers[rng.Index(answers.size())];
          w.negatives = SampleNegatives(answers, num_entities, k, rng);
          items.push_back(std::move(w));
        }
      }
      for (Gradients& g : grads) g.Zero();
      auto run = [&](std::size_t worker) {
        for (std::size_t i = worker; i < items.size(); i += workers) {
          items[i].loss = QueryLossAndGradient(
              params, items[i].record->query.graph, items[i].positive,
              items[i].negatives, grads[worker]);
        }
      };
      if (workers == 1) {
        run(0);
      } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(workers);
        for (std::size_t w = 0; w < workers; ++w) {
          pool.emplace_back([&, w] {
            try {
              run(w);
            } catch (...) {
              errors[w] = std::current_exception();
            }
          });
        }
        for (auto& t : pool) t.join();
        for (auto& e : errors) {
          if (e) std::rethrow_exception(e);
        }
        for (std::size_t w = 1; w < workers; ++w) AddInto(grads[0], grads[w]);
      }
      for (const WorkItem& w : items) {
        if (!std::isfinite(w.loss)) {
          if (!options.diagnostic_path.empty()) {
            SaveCheckpoint(options.diagnostic_path, params, 0);
          }
          throw TrainingError("non-finite loss at epoch " +
                              std::to_string(epoch) + ", iteration " +
                              std::to_string(it + 1) + " on " +
                              w.record->query.structure + " query " +
                              Serialize(w.record->query.graph));
        }
        loss_sum += w.loss;
        ++visits;
      }
      AdamStep(params, grads[0], adam, config.learning_rate);
      if (options.dry_run) break;
    }

    EpochLog log;
    log.epoch = epoch;
    log.loss = visits ? loss_sum / static_cast<double>(visits) : 0;
    const bool evaluate = options.validation && !options.validation->empty() &&
                          config.eval_every > 0 &&
                          (epoch % config.eval_every == 0 || epoch == epochs);
    if (evaluate && !options.dry_run) {
      const EvalReport report =
          Evaluate(params, *options.validation, options.validation_stage,
                   options.workers);
      log.validation = report.overall;
      if (!have_best || report.overall.mrr > result.best_mrr) {
        have_best = true;
        log.best = true;
        result.best_mrr = report.overall.mrr;
        result.best_epoch = epoch;
        result.best = params;
      }
    }
    result.history.push_back(log);
    if (options.on_epoch) options.on_epoch(log);
  }
  if (!have_best) {
    result.best = result.last;
    result.best_epoch = epochs;
    if (!result.history.empty()) result.history.back().best = true;
  }
  return result;
}

}  // namespace boxq
