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

#include "boxq/config.h"

#include <algorithm>
#include <fstream>
#include <istream>

namespace boxq {
namespace {

std::string Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace

KeyValues ParseKeyValues(std::istream& in, std::string_view source) {
  KeyValues out;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    if (Trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(std::string(source) + ":" + std::to_string(number) +
                       ": expected key = value");
    }
    std::string key = Trim(std::string_view(line).substr(0, eq));
    std::string value = Trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) {
      throw ParseError(std::string(source) + ":" + std::to_string(number) +
                       ": empty key");
    }
    std::replace(key.begin(), key.end(), '-', '_');
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

KeyValues LoadKeyValues(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config " + path.string());
  return ParseKeyValues(in, path.string());
}

void ApplyKeyValues(const KeyValues& pairs, ModelConfig& config) {
  for (const auto& [key, value] : pairs) config.Set(key, value);
}

void ApplyConfigText(std::istream& in, ModelConfig& config) {
  ApplyKeyValues(ParseKeyValues(in), config);
}

}  // namespace boxq
