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

// Acceptance suite: one pass/fail result per criterion with pinned tolerances.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rrank/config.hpp"

namespace rrank::acceptance {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct Options {
  double eps = 1e-6;  // collapse threshold for the rank criteria
  /// System for the boundedness criterion; the nonaut30 preset when empty.
  std::optional<RunConfig> system_under_test;
};

std::vector<CriterionResult> run_all(const Options& options = {});

/// "PASS  3 gain-identity  ...": one line per result.
std::string format_line(const CriterionResult& r);

nlohmann::json to_json(const std::vector<CriterionResult>& results);

bool all_pass(const std::vector<CriterionResult>& results);

}  // namespace rrank::acceptance
