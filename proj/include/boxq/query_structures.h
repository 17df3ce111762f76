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

#ifndef BOXQ_QUERY_STRUCTURES_H_
#define BOXQ_QUERY_STRUCTURES_H_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "boxq/computation_graph.h"

namespace boxq {

struct QueryStructure {
  std::string name;
  ComputationGraph graph;  // unbound template
  bool trainable = false;
};

// The nine query shapes, in the order 1p 2p 3p 2i 3i ip pi 2u up. The first
// five are used for training.
std::span<const QueryStructure> StructureTemplates();

// Throws ArgumentError for an unknown name.
const QueryStructure& StructureTemplate(std::string_view name);

std::vector<std::string> StructureNames();
std::vector<std::string> TrainableStructureNames();

}  // namespace boxq

#endif  // BOXQ_QUERY_STRUCTURES_H_
