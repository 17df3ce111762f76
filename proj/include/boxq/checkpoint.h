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

#ifndef BOXQ_CHECKPOINT_H_
#define BOXQ_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "boxq/knowledge_graph.h"
#include "boxq/model.h"

namespace boxq {

struct Checkpoint {
  ModelParams params;
  std::uint64_t vocab_hash = 0;
};

// Binary layout: "BOXQCKPT", u32 version, u64 vocabulary hash, u32 real
// width, u32 + config text, u32 tensor count, then per tensor u32 + name,
// u64 rows, u64 cols and the raw values. Host byte order.
void WriteCheckpoint(std::ostream& out, const ModelParams& params,
                     std::uint64_t vocab_hash);
Checkpoint ReadCheckpoint(std::istream& in);
void SaveCheckpoint(const std::filesystem::path& path,
                    const ModelParams& params, std::uint64_t vocab_hash);
Checkpoint LoadCheckpoint(const std::filesystem::path& path);

// Throws CompatibilityError naming both hashes when the checkpoint was
// trained on another vocabulary.
void CheckCompatible(const Checkpoint& checkpoint, const Vocabulary& vocab);

}  // namespace boxq

#endif  // BOXQ_CHECKPOINT_H_
