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

#include "boxq/mlp.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace boxq {

void MlpForward(const MlpWeights& w, std::span<const Real> x, MlpTrace& trace) {
  trace.input.assign(x.begin(), x.end());
  trace.pre.assign(w.hidden, 0);
  trace.output.assign(w.out, 0);
  for (std::size_t h = 0; h < w.hidden; ++h) {
    Real acc = w.b1[h];
    const Real* row = w.w1.data() + h * w.in;
    for (std::size_t i = 0; i < w.in; ++i) acc += row[i] * x[i];
    trace.pre[h] = acc;
  }
  for (std::size_t o = 0; o < w.out; ++o) {
    Real acc = w.b2[o];
    const Real* row = w.w2.data() + o * w.hidden;
    for (std::size_t h = 0; h < w.hidden; ++h) {
      acc += row[h] * std::max(trace.pre[h], Real(0));
    }
    trace.output[o] = acc;
  }
}

void MlpBackward(const MlpWeights& w, const MlpTrace& trace,
                 std::span<const Real> d_out, const MlpGrads& g,
                 std::span<Real> d_in) {
  std::vector<Real> d_hidden(w.hidden, 0);
  for (std::size_t o = 0; o < w.out; ++o) {
    const Real d = d_out[o];
    if (d == 0) continue;
    g.b2[o] += d;
    const Real* row = w.w2.data() + o * w.hidden;
    Real* grow = g.w2.data() + o * w.hidden;
    for (std::size_t h = 0; h < w.hidden; ++h) {
      grow[h] += d * std::max(trace.pre[h], Real(0));
      d_hidden[h] += d * row[h];
    }
  }
  for (std::size_t h = 0; h < w.hidden; ++h) {
    if (trace.pre[h] <= 0) continue;
    const Real d = d_hidden[h];
    g.b1[h] += d;
    const Real* row = w.w1.data() + h * w.in;
    Real* grow = g.w1.data() + h * w.in;
    for (std::size_t i = 0; i < w.in; ++i) {
      grow[i] += d * trace.input[i];
      d_in[i] += d * row[i];
    }
  }
}

std::vector<Real> DeepSetsForward(const MlpWeights& inner,
                                  const MlpWeights& outer,
                                  std::span<const std::vector<Real>> inputs,
                                  DeepSetsTrace& trace) {
  trace.inner.resize(inputs.size());
  trace.pooled.assign(inner.out, 0);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    MlpForward(inner, inputs[i], trace.inner[i]);
    for (std::size_t j = 0; j < inner.out; ++j) {
      trace.pooled[j] += trace.inner[i].output[j];
    }
  }
  const Real scale = Real(1) / static_cast<Real>(inputs.size());
  for (Real& p : trace.pooled) p *= scale;
  MlpForward(outer, trace.pooled, trace.outer);
  return trace.outer.output;
}

void DeepSetsBackward(const MlpWeights& inner, const MlpWeights& outer,
                      const DeepSetsTrace& trace, std::span<const Real> d_out,
                      const MlpGrads& g_inner, const MlpGrads& g_outer,
                      std::span<std::vector<Real>> d_inputs) {
  std::vector<Real> d_pooled(outer.in, 0);
  MlpBackward(outer, trace.outer, d_out, g_outer, d_pooled);
  const Real scale = Real(1) / static_cast<Real>(trace.inner.size());
  for (Real& d : d_pooled) d *= scale;
  for (std::size_t i = 0; i < trace.inner.size(); ++i) {
    MlpBackward(inner, trace.inner[i], d_pooled, g_inner, d_inputs[i]);
  }
}

std::vector<std::vector<Real>> SoftmaxAcross(
    std::span<const std::vector<Real>> logits) {
  const std::size_t n = logits.size();
  const std::size_t d = n ? logits[0].size() : 0;
  std::vector<std::vector<Real>> out(n, std::vector<Real>(d));
  for (std::size_t j = 0; j < d; ++j) {
    Real peak = -std::numeric_limits<Real>::infinity();
    for (std::size_t i = 0; i < n; ++i) peak = std::max(peak, logits[i][j]);
    Real total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      out[i][j] = std::exp(logits[i][j] - peak);
      total += out[i][j];
    }
    for (std::size_t i = 0; i < n; ++i) out[i][j] /= total;
  }
  return out;
}

void SoftmaxAcrossBackward(std::span<const std::vector<Real>> weights,
                           std::span<const std::vector<Real>> d_weights,
                           std::span<std::vector<Real>> d_logits) {
  const std::size_t n = weights.size();
  const std::size_t d = n ? weights[0].size() : 0;
  for (std::size_t j = 0; j < d; ++j) {
    Real dot = 0;
    for (std::size_t i = 0; i < n; ++i) dot += weights[i][j] * d_weights[i][j];
    for (std::size_t i = 0; i < n; ++i) {
      d_logits[i][j] += weights[i][j] * (d_weights[i][j] - dot);
    }
  }
}

}  // namespace boxq
