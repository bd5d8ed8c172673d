/*
 * Copyright (c) 2026, The chemflow authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace chemflow::text {

std::string_view trim(std::string_view s);
std::string trim_right(std::string_view s);

// Splits on any run of whitespace; empty fields are dropped.
std::vector<std::string> split_ws(std::string_view s);

// Splits on a single delimiter, keeping empty fields.
std::vector<std::string> split(std::string_view s, char delim);

std::vector<std::string> lines(std::string_view s);

std::string upper(std::string_view s);
std::string lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
bool starts_with(std::string_view s, std::string_view prefix);
bool contains(std::string_view haystack, std::string_view needle);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

// Truncates to at most `cap` bytes, replacing the tail with a marker when cut.
std::string cap(std::string_view s, std::size_t cap);
inline constexpr std::string_view kTruncationMarker = " [...truncated]";

// Fixed-point formatting with the given number of decimals.
std::string fixed(double value, int decimals);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);
// Appends and flushes to stable storage before returning.
void append_durable(const std::string& path, std::string_view content);

// UTC, millisecond resolution: 2026-01-01T00:00:00.000Z
std::string now_iso8601();

}  // namespace chemflow::text
