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

#ifndef BOXQ_ADAM_H_
#define BOXQ_ADAM_H_

#include <cstdint>
#include <vector>

#include "boxq/model.h"

namespace boxq {

struct AdamOptions {
  Real beta1 = 0.9;
  Real beta2 = 0.999;
  Real epsilon = 1e-8;
};

struct AdamState {
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
  std::int64_t step = 0;
};

AdamState MakeAdamState(const ModelParams& params);

// Bias-corrected Adam update of every tensor. Throws TrainingError naming
// the tensor if any gradient entry is not finite; nothing is modified then.
void AdamStep(ModelParams& params, const Gradients& grads, AdamState& state,
              Real learning_rate, const AdamOptions& options = {});

}  // namespace boxq

#endif  // BOXQ_ADAM_H_
