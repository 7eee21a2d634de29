/*
 Copyright 2026 The riccati-rank Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace rrank {

enum class ErrorKind {
  InvalidInput,
  RankDeficient,
  IllConditioned,
  NumericalBlowup,
  DegenerateInnovation,
  GenerationFailure,
  OutOfValidatedRange,
  HypothesisFailed,
  SpectralGapViolation,
  ConfigError,
  InvariantViolation,
};

const char* to_string(ErrorKind kind);

/// Base exception for every failure raised by the library. The kind is the
/// machine-readable part; the message carries the human context.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class RankDeficientError : public Error {
 public:
  RankDeficientError(int column, const std::string& what)
      : Error(ErrorKind::RankDeficient, what + " (column " + std::to_string(column) + ")"),
        column_(column) {}
  int column() const noexcept { return column_; }

 private:
  int column_;
};

class IllConditionedError : public Error {
 public:
  IllConditionedError(double estimate, const std::string& what)
      : Error(ErrorKind::IllConditioned,
              what + " (condition estimate " + std::to_string(estimate) + ")"),
        estimate_(estimate) {}
  double estimate() const noexcept { return estimate_; }

 private:
  double estimate_;
};

class NumericalBlowupError : public Error {
 public:
  NumericalBlowupError(std::optional<int> step, const std::string& what)
      : Error(ErrorKind::NumericalBlowup,
              step ? what + " at step " + std::to_string(*step) : what),
        step_(step) {}
  std::optional<int> step() const noexcept { return step_; }

 private:
  std::optional<int> step_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::IllConditioned: return "IllConditioned";
    case ErrorKind::NumericalBlowup: return "NumericalBlowup";
    case ErrorKind::DegenerateInnovation: return "DegenerateInnovation";
    case ErrorKind::GenerationFailure: return "GenerationFailure";
    case ErrorKind::OutOfValidatedRange: return "OutOfValidatedRange";
    case ErrorKind::HypothesisFailed: return "HypothesisFailed";
    case ErrorKind::SpectralGapViolation: return "SpectralGapViolation";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::InvariantViolation: return "InvariantViolation";
  }
  return "Unknown";
}

}  // namespace rrank
