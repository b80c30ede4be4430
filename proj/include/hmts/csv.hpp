/*
 Copyright 2026 The hmts Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

     http://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#pragma once

#include <charconv>
#include <istream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <fmt/format.h>

#include "hmts/error.hpp"

// Minimal comma-separated reader for the flat files this library writes.
// Fields never contain commas or quotes.
namespace hmts::csv {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                              : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline double parse_double(std::string_view s) {
  s = trim(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigurationError(fmt::format("not a number: '{}'", s));
  }
  return v;
}

/// Reads all data rows, checking that the first non-empty line equals `header`.
inline std::vector<std::vector<std::string>> read(std::istream& is, std::string_view header) {
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool seen_header = false;
  const std::size_t width = split(header).size();
  while (std::getline(is, line)) {
    const std::string_view view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    if (!seen_header) {
      if (view != header) {
        throw ConfigurationError(fmt::format("expected CSV header '{}', got '{}'", header, view));
      }
      seen_header = true;
      continue;
    }
    auto fields = split(view);
    if (fields.size() != width) {
      throw ConfigurationError(
          fmt::format("expected {} fields, got {} in '{}'", width, fields.size(), view));
    }
    rows.push_back(std::move(fields));
  }
  if (!seen_header) throw ConfigurationError(fmt::format("missing CSV header '{}'", header));
  return rows;
}

}  // namespace hmts::csv
