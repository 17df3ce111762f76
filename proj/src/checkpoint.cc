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

#include "boxq/checkpoint.h"

#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "boxq/config.h"

namespace boxq {
namespace {

constexpr char kMagic[8] = {'B', 'O', 'X', 'Q', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void Put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

void PutString(std::ostream& out, const std::string& s) {
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

template <typename T>
T Get(std::istream& in) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    throw ParseError("checkpoint: truncated");
  }
  return value;
}

std::string GetString(std::istream& in) {
  const auto n = Get<std::uint32_t>(in);
  std::string s(n, '\0');
  if (n && !in.read(s.data(), n)) throw ParseError("checkpoint: truncated");
  return s;
}

std::string HexHash(std::uint64_t h) {
  std::ostringstream out;
  out << std::hex << h;
  return out.str();
}

}  // namespace

void WriteCheckpoint(std::ostream& out, const ModelParams& params,
                     std::uint64_t vocab_hash) {
  out.write(kMagic, sizeof(kMagic));
  Put<std::uint32_t>(out, kVersion);
  Put<std::uint64_t>(out, vocab_hash);
  Put<std::uint32_t>(out, sizeof(Real));
  Put<std::uint64_t>(out, params.num_entities());
  Put<std::uint64_t>(out, params.num_relations());
  PutString(out, params.config().ToText());
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(params.tensors.size()));
  for (const Tensor& t : params.tensors) {
    PutString(out, t.name);
    Put<std::uint64_t>(out, t.rows);
    Put<std::uint64_t>(out, t.cols);
    out.write(reinterpret_cast<const char*>(t.data.data()),
              static_cast<std::streamsize>(t.data.size() * sizeof(Real)));
  }
}

Checkpoint ReadCheckpoint(std::istream& in) {
  char magic[sizeof(kMagic)];
  if (!in.read(magic, sizeof(magic)) ||
      std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ParseError("checkpoint: bad magic header");
  }
  if (const auto v = Get<std::uint32_t>(in); v != kVersion) {
    throw ParseError("checkpoint: unsupported version " + std::to_string(v));
  }
  Checkpoint ckpt;
  ckpt.vocab_hash = Get<std::uint64_t>(in);
  if (const auto w = Get<std::uint32_t>(in); w != sizeof(Real)) {
    throw CompatibilityError("checkpoint stores " + std::to_string(w) +
                             "-byte reals, this build uses " +
                             std::to_string(sizeof(Real)));
  }
  const auto entities = Get<std::uint64_t>(in);
  const auto relations = Get<std::uint64_t>(in);
  ModelConfig config;
  std::istringstream text(GetString(in));
  ApplyConfigText(text, config);
  ckpt.params = ModelParams(config, entities, relations);
  const auto count = Get<std::uint32_t>(in);
  if (count != ckpt.params.tensors.size()) {
    throw ParseError("checkpoint: tensor count mismatch");
  }
  for (Tensor& t : ckpt.params.tensors) {
    const std::string name = GetString(in);
    const auto rows = Get<std::uint64_t>(in);
    const auto cols = Get<std::uint64_t>(in);
    if (name != t.name || rows != t.rows || cols != t.cols) {
      throw ParseError("checkpoint: tensor '" + name +
                       "' does not match the configuration");
    }
    if (!t.data.empty() &&
        !in.read(reinterpret_cast<char*>(t.data.data()),
                 static_cast<std::streamsize>(t.data.size() * sizeof(Real)))) {
      throw ParseError("checkpoint: truncated tensor " + name);
    }
  }
  return ckpt;
}

void SaveCheckpoint(const std::filesystem::path& path,
                    const ModelParams& params, std::uint64_t vocab_hash) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  WriteCheckpoint(out, params, vocab_hash);
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open checkpoint " + path.string());
  return ReadCheckpoint(in);
}

void CheckCompatible(const Checkpoint& checkpoint, const Vocabulary& vocab) {
  const std::uint64_t h = vocab.Hash();
  if (h != checkpoint.vocab_hash) {
    throw CompatibilityError(
        "checkpoint vocabulary hash " + HexHash(checkpoint.vocab_hash) +
        " does not match graph vocabulary hash " + HexHash(h));
  }
  if (checkpoint.params.num_entities() != vocab.num_entities() ||
      checkpoint.params.num_relations() != vocab.num_relations()) {
    throw CompatibilityError("checkpoint table sizes do not match the graph");
  }
}

}  // namespace boxq
