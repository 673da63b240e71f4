// Copyright 2026 The Teamsym Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TEAMSYM_ERRORS_H_
#define TEAMSYM_ERRORS_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace teamsym {

enum class ErrorCode {
  kInvalidStructure,
  kInvalidInput,
  kDimensionMismatch,
  kSymmetryViolation,
  kZeroSumRequiresTwoTeams,
  kTooLarge,
  kNoEquilibriumFound,
  kNonFiniteGradient,
  kInvalidAction,
  kEmptyEquilibriumSet,
  kIo,
};

std::string_view ErrorCodeName(ErrorCode code);

// All library failures are reported through this exception type. The code
// lets callers (the CLI in particular) map failures onto exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidStructure: return "InvalidStructure";
    case ErrorCode::kInvalidInput: return "InvalidInput";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kSymmetryViolation: return "SymmetryViolation";
    case ErrorCode::kZeroSumRequiresTwoTeams: return "ZeroSumRequiresTwoTeams";
    case ErrorCode::kTooLarge: return "TooLarge";
    case ErrorCode::kNoEquilibriumFound: return "NoEquilibriumFound";
    case ErrorCode::kNonFiniteGradient: return "NonFiniteGradient";
    case ErrorCode::kInvalidAction: return "InvalidAction";
    case ErrorCode::kEmptyEquilibriumSet: return "EmptyEquilibriumSet";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

}  // namespace teamsym

#endif  // TEAMSYM_ERRORS_H_
