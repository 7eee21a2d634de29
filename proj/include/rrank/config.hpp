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

// Run configuration documents (JSON) and the named presets.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "rrank/system.hpp"

namespace rrank {

inline constexpr int kSchemaVersion = 1;

enum class ExperimentKind { NonAut30, Aut30, Custom };

const char* to_string(ExperimentKind kind);

struct RunConfig {
  ExperimentKind experiment = ExperimentKind::Custom;
  std::string preset;  // preset name the config was built from, if any
  SystemSpec system;
  std::vector<int> checkpoints;
  double eps = 1e-6;
  std::filesystem::path output_dir = "out";
  bool emit_svg = true;
  std::uint64_t noise_seed = 1;
  std::vector<std::uint64_t> sweep_seeds;  // non-empty: one run per seed, in subdirectories

  void validate() const;
};

/// Every step from 1 to horizon, or every `stride`-th step plus the horizon.
std::vector<int> every_step(int horizon, int stride = 1);

std::vector<std::string> preset_names();

/// Throws ConfigError for unknown names.
RunConfig preset(const std::string& name, std::uint64_t seed = 2026);

nlohmann::json to_json(const SystemSpec& spec);
SystemSpec system_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const RunConfig& config);
RunConfig config_from_json(const nlohmann::json& doc);

RunConfig load_config(const std::filesystem::path& path);

/// Row-major nested arrays.
nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& doc, const std::string& what);

}  // namespace rrank
