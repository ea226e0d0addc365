// Copyright 2026 The mrwlab Authors
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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mrwlab {

enum class ErrorCode {
  invalid_lattice,
  ball_too_large,
  off_lattice,
  degenerate_covariance,
  invalid_model,
  not_centered,
  ambiguous_stationary,
  non_ergodic,
  numeric,
  shrink_radius,
  not_arithmetic_at_t,
  hypothesis_violation,
  truncation_overflow,
  domain,
  degenerate_weight,
  underflow,
  underpowered,
  invalid_argument,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_lattice: return "invalid-lattice";
    case ErrorCode::ball_too_large: return "ball-too-large";
    case ErrorCode::off_lattice: return "off-lattice";
    case ErrorCode::degenerate_covariance: return "degenerate-covariance";
    case ErrorCode::invalid_model: return "invalid-model";
    case ErrorCode::not_centered: return "not-centered";
    case ErrorCode::ambiguous_stationary: return "ambiguous-stationary";
    case ErrorCode::non_ergodic: return "non-ergodic";
    case ErrorCode::numeric: return "numeric";
    case ErrorCode::shrink_radius: return "shrink-radius";
    case ErrorCode::not_arithmetic_at_t: return "not-arithmetic-at-t";
    case ErrorCode::hypothesis_violation: return "hypothesis-violation";
    case ErrorCode::truncation_overflow: return "truncation-overflow";
    case ErrorCode::domain: return "domain";
    case ErrorCode::degenerate_weight: return "degenerate-weight";
    case ErrorCode::underflow: return "underflow";
    case ErrorCode::underpowered: return "underpowered";
    case ErrorCode::invalid_argument: return "invalid-argument";
  }
  return "unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mrwlab
