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

#include <stdexcept>
#include <string>

namespace sdtwsv {

// Error categories double as process exit codes so the CLI can report
// distinct nonzero statuses per failure class.
enum class ErrorCode : int {
  kInvalidArgument = 2,
  kMissingFile = 3,
  kMalformedFile = 4,
  kDimensionMismatch = 5,
  kNonFiniteValue = 6,
  kDomainError = 7,
  kSingularMatrix = 8,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }
  int exit_status() const { return static_cast<int>(code_); }

 private:
  ErrorCode code_;
};

}  // namespace sdtwsv
