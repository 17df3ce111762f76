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

#ifndef BOXQ_TYPES_H_
#define BOXQ_TYPES_H_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace boxq {

#ifdef BOXQ_USE_FLOAT32
using Real = float;
#else
using Real = double;
#endif

using EntityId = std::int32_t;
using RelationId = std::int32_t;

// Error hierarchy. Every failure surfaced by the library derives from Error so
// the CLI can map it onto an exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class VocabularyError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class SamplingError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

class CompatibilityError : public Error {
 public:
  using Error::Error;
};

// Broken caller contract (e.g. union edge handed to the conjunctive embedder).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace boxq

#endif  // BOXQ_TYPES_H_
