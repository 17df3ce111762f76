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

#ifndef BOXQ_MLP_H_
#define BOXQ_MLP_H_

#include <span>
#include <vector>

#include "boxq/types.h"

namespace boxq {

// Two-layer perceptron  y = W2 relu(W1 x + b1) + b2, row-major weights.
struct MlpWeights {
  std::span<const Real> w1;  // hidden x in
  std::span<const Real> b1;  // hidden
  std::span<const Real> w2;  // out x hidden
  std::span<const Real> b2;  // out
  std::size_t in = 0;
  std::size_t hidden = 0;
  std::size_t out = 0;
};

struct MlpGrads {
  std::span<Real> w1;
  std::span<Real> b1;
  std::span<Real> w2;
  std::span<Real> b2;
};

struct MlpTrace {
  std::vector<Real> input;
  std::vector<Real> pre;  // W1 x + b1
  std::vector<Real> output;
};

void MlpForward(const MlpWeights& w, std::span<const Real> x, MlpTrace& trace);

// Accumulates parameter gradients into `g` and input gradient into `d_in`.
void MlpBackward(const MlpWeights& w, const MlpTrace& trace,
                 std::span<const Real> d_out, const MlpGrads& g,
                 std::span<Real> d_in);

// Permutation-invariant set encoder  outer(mean_i inner(x_i)).
struct DeepSetsTrace {
  std::vector<MlpTrace> inner;
  std::vector<Real> pooled;
  MlpTrace outer;
};

std::vector<Real> DeepSetsForward(const MlpWeights& inner,
                                  const MlpWeights& outer,
                                  std::span<const std::vector<Real>> inputs,
                                  DeepSetsTrace& trace);

// d_inputs[i] is accumulated into.
void DeepSetsBackward(const MlpWeights& inner, const MlpWeights& outer,
                      const DeepSetsTrace& trace, std::span<const Real> d_out,
                      const MlpGrads& g_inner, const MlpGrads& g_outer,
                      std::span<std::vector<Real>> d_inputs);

// Dimension-wise softmax across items: logits[i] are d-vectors, result[i][j]
// = exp(logits[i][j]) / sum_k exp(logits[k][j]).
std::vector<std::vector<Real>> SoftmaxAcross(
    std::span<const std::vector<Real>> logits);

// Backward of SoftmaxAcross given its output; accumulates into d_logits.
void SoftmaxAcrossBackward(std::span<const std::vector<Real>> weights,
                           std::span<const std::vector<Real>> d_weights,
                           std::span<std::vector<Real>> d_logits);

}  // namespace boxq

#endif  // BOXQ_MLP_H_
