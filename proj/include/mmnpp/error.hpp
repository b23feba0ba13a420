// Copyright 2026 The mmnpp Authors
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

#ifndef MMNPP_ERROR_HPP
#define MMNPP_ERROR_HPP

#include <stdexcept>
#include <string>

namespace mmnpp {

enum class ErrorCode {
  negative_off_diagonal,
  row_sum_violation,
  non_positive_intensity,
  bad_probability_vector,
  out_of_horizon,
  unsorted_input,
  non_finite,
  dimension_mismatch,
  underflow_collapse,
  division_by_zero_diagonal,
  empty_state,
  non_identifiable,
  series_too_short,
  zero_variance,
  degenerate_signs,
  length_mismatch,
  non_positive_expected,
  grid_outside_horizon,
  parse_error,
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::negative_off_diagonal: return "NegativeOffDiagonal";
    case ErrorCode::row_sum_violation: return "RowSumViolation";
    case ErrorCode::non_positive_intensity: return "NonPositiveIntensity";
    case ErrorCode::bad_probability_vector: return "BadProbabilityVector";
    case ErrorCode::out_of_horizon: return "OutOfHorizon";
    case ErrorCode::unsorted_input: return "UnsortedInput";
    case ErrorCode::non_finite: return "NonFinite";
    case ErrorCode::dimension_mismatch: return "DimensionMismatch";
    case ErrorCode::underflow_collapse: return "UnderflowCollapse";
    case ErrorCode::division_by_zero_diagonal: return "DivisionByZeroDiagonal";
    case ErrorCode::empty_state: return "EmptyState";
    case ErrorCode::non_identifiable: return "NonIdentifiable";
    case ErrorCode::series_too_short: return "SeriesTooShort";
    case ErrorCode::zero_variance: return "ZeroVariance";
    case ErrorCode::degenerate_signs: return "DegenerateSigns";
    case ErrorCode::length_mismatch: return "LengthMismatch";
    case ErrorCode::non_positive_expected: return "NonPositiveExpected";
    case ErrorCode::grid_outside_horizon: return "GridOutsideHorizon";
    case ErrorCode::parse_error: return "ParseError";
  }
  return "Unknown";
}

/// Library-wide exception carrying a machine-readable error code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  const char* code_name() const noexcept { return error_code_name(code_); }

 private:
  ErrorCode code_;
};

}  // namespace mmnpp

#endif  // MMNPP_ERROR_HPP
