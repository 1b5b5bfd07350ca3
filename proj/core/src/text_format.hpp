// Copyright 2026 sdtwsv authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include "sdtwsv/errors.hpp"

namespace sdtwsv::text {

// All numeric TSV output uses 9 significant digits for diffability.
inline std::string format_g9(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", value);
  return buf;
}

inline std::vector<std::string> split_tsv(const std::string& line) {
  std::vector<std::string> fields;
  size_t begin = 0;
  while (true) {
    const size_t tab = line.find('\t', begin);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(begin));
      break;
    }
    fields.push_back(line.substr(begin, tab - begin));
    begin = tab + 1;
  }
  if (!fields.empty() && !fields.back().empty() &&
      fields.back().back() == '\r') {
    fields.back().pop_back();
  }
  return fields;
}

inline double parse_double(const std::string& field, const std::string& what) {
  try {
    size_t pos = 0;
    const double value = std::stod(field, &pos);
    if (pos != field.size()) throw std::invalid_argument(field);
    return value;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kMalformedFile,
                "cannot parse '" + field + "' as a number in " + what);
  }
}

inline long parse_long(const std::string& field, const std::string& what) {
  try {
    size_t pos = 0;
    const long value = std::stol(field, &pos);
    if (pos != field.size()) throw std::invalid_argument(field);
    return value;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kMalformedFile,
                "cannot parse '" + field + "' as an integer in " + what);
  }
}

inline uint64_t parse_u64(const std::string& field, const std::string& what) {
  try {
    size_t pos = 0;
    if (!field.empty() && field[0] == '-') throw std::invalid_argument(field);
    const unsigned long long value = std::stoull(field, &pos);
    if (pos != field.size()) throw std::invalid_argument(field);
    return static_cast<uint64_t>(value);
  } catch (const std::exception&) {
    throw Error(ErrorCode::kMalformedFile,
                "cannot parse '" + field + "' as an unsigned integer in " +
                    what);
  }
}

}  // namespace sdtwsv::text
