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

#include "boxq/adam.h"

#include <cmath>
#include <string>

namespace boxq {

AdamState MakeAdamState(const ModelParams& params) {
  AdamState s;
  s.first_moment = params.tensors;
  s.second_moment = params.tensors;
  for (Tensor& t : s.first_moment) t.Zero();
  for (Tensor& t : s.second_moment) t.Zero();
  return s;
}

void AdamStep(ModelParams& params, const Gradients& grads, AdamState& state,
              Real learning_rate, const AdamOptions& options) {
  if (grads.tensors.size() != params.tensors.size() ||
      state.first_moment.size() != params.tensors.size()) {
    throw ArgumentError("adam: tensor count mismatch");
  }
  for (std::size_t k = 0; k < grads.tensors.size(); ++k) {
    const Tensor& g = grads.tensors[k];
    if (g.data.size() != params.tensors[k].data.size() ||
        state.first_moment[k].data.size() != g.data.size()) {
      throw ArgumentError("adam: shape mismatch for " + params.tensors[k].name);
    }
    for (std::size_t i = 0; i < g.data.size(); ++i) {
      if (!std::isfinite(g.data[i])) {
        throw TrainingError("non-finite gradient in " + params.tensors[k].name +
                            " at index " + std::to_string(i));
      }
    }
  }
  ++state.step;
  const Real t = static_cast<Real>(state.step);
  const Real c1 = Real(1) - std::pow(options.beta1, t);
  const Real c2 = Real(1) - std::pow(options.beta2, t);
  for (std::size_t k = 0; k < grads.tensors.size(); ++k) {
    const auto& g = grads.tensors[k].data;
    auto& m = state.first_moment[k].data;
    auto& v = state.second_moment[k].data;
    auto& p = params.tensors[k].data;
    for (std::size_t i = 0; i < g.size(); ++i) {
      m[i] = options.beta1 * m[i] + (Real(1) - options.beta1) * g[i];
      v[i] = options.beta2 * v[i] + (Real(1) - options.beta2) * g[i] * g[i];
      const Real m_hat = m[i] / c1;
      const Real v_hat = v[i] / c2;
      p[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + options.epsilon);
    }
  }
}

}  // namespace boxq
