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

#ifndef BOXQ_CONFIG_H_
#define BOXQ_CONFIG_H_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "boxq/model.h"

namespace boxq {

using KeyValues = std::vector<std::pair<std::string, std::string>>;

// Flat "key = value" text. Blank lines and '#' comments are skipped; keys may
// use '-' or '_' interchangeably and are returned with '_'. Throws ParseError
// naming `source` and the line number on malformed lines.
KeyValues ParseKeyValues(std::istream& in, std::string_view source = "config");
KeyValues LoadKeyValues(const std::filesystem::path& path);

// Applies every pair to `config` in file order.
void ApplyKeyValues(const KeyValues& pairs, ModelConfig& config);
void ApplyConfigText(std::istream& in, ModelConfig& config);

}  // namespace boxq

#endif  // BOXQ_CONFIG_H_
