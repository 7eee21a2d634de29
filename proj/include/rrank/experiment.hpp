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

// Experiment runs: filter + Lyapunov analysis + diagnostics, and their artifacts.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rrank/config.hpp"
#include "rrank/diagnostics.hpp"
#include "rrank/lyapunov.hpp"
#include "rrank/spectral.hpp"

namespace rrank::experiment {

struct StepRecord {
  int n = 0;
  double sigma_norm = 0.0;
  double delta_norm = 0.0;
  double gain_norm = 0.0;
  double m_norm = 0.0;
  double gain_identity_residual = 0.0;
};

struct GramianSummary {
  double min_eig = 0.0;
  int argmin = 0;
  int scanned = 0;
  bool warn = true;
};

struct RunSummary {
  RunConfig config;
  int d0_measured = 0;
  std::optional<int> d0_target;
  lyapunov::LyapunovResult lyapunov;
  std::vector<diagnostics::DiagnosticsFrame> frames;
  std::vector<StepRecord> steps;
  GramianSummary gramian;
  std::optional<spectral::NullspaceReport> nullspace;
  int collapse_step = -1;  // N*: first checkpoint from which the eps-rank stays >= d - d0
  double max_gain_identity_residual = 0.0;
  double max_joseph_residual = 0.0;
  std::map<std::string, bool> checks;
  double wall_seconds = 0.0;
  std::vector<std::string> files;  // relative to the output directory
};

/// Runs the experiment in memory.
RunSummary compute(const RunConfig& config);

/// compute() plus artifacts in config.output_dir. On error, files written so far are removed.
RunSummary run(const RunConfig& config);

/// One run per seed in config.sweep_seeds, each in output_dir/seed-<s>. Parallelism is
/// capped by RICCATI_RANK_THREADS.
std::vector<RunSummary> run_sweep(const RunConfig& config);

/// Number of worker threads allowed for sweeps.
unsigned sweep_threads();

/// Shortest round-trip decimal form ("%.17g").
std::string format_double(double v);

std::string sha256_file(const std::filesystem::path& path);

nlohmann::json metadata(const RunSummary& summary);

}  // namespace rrank::experiment
