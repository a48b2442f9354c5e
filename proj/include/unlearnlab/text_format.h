// Copyright 2026 The unlearnlab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Helpers for the line-oriented decimal text formats used by checkpoints,
// reference caches and datasets.

#ifndef UNLEARNLAB_TEXT_FORMAT_H_
#define UNLEARNLAB_TEXT_FORMAT_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace unlearnlab::text {

// "%.17g" rendering; round-trips every finite double.
std::string FormatDouble(double value);
std::string JoinDoubles(std::span<const double> values, char sep = ' ');
template <typename Int>
std::string JoinInts(std::span<const Int> values, char sep = ' ');

std::vector<std::string> Split(std::string_view line, char sep);
std::vector<std::string> SplitWhitespace(std::string_view line);

// Strict parsers: the whole token must be consumed. Throw ParseError.
double ParseDouble(std::string_view token);
std::int64_t ParseInt(std::string_view token);
std::uint64_t ParseUint(std::string_view token);

std::string ReadFile(const std::filesystem::path& path);
// Writes to a temporary sibling, then renames over `path`.
void WriteFile(const std::filesystem::path& path, std::string_view contents);

// Flat "key value" documents: one pair per line, '#' comments.
using KeyValues = std::map<std::string, std::string>;
std::string FormatKeyValues(const KeyValues& kv);
KeyValues ParseKeyValues(std::string_view text);

// 64-bit FNV-1a.
std::uint64_t Fnv1a(std::string_view data);
std::string HexDigest(std::uint64_t value);

}  // namespace unlearnlab::text

#endif  // UNLEARNLAB_TEXT_FORMAT_H_
