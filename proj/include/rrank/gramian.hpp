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

// Observability and controllability Gramians over a window of d steps.
//
//   O_n = sum_{m=0}^{d-1} B_{n:n+m}^T H_{n+m}^T Q_{n+m}^{-1} H_{n+m} B_{n:n+m}
//   C_n = sum_{m=1}^{d}   B_{n+m:n+d} F_{n+m} F_{n+m}^T B_{n+m:n+d}^T
//
// Both are formed as S^T S from a stacked factor S whose singular values give
// the spectrum, so min_eig keeps relative accuracy even when the window
// products span many orders of magnitude.

#include <functional>
#include <utility>
#include <vector>

#include "rrank/linalg.hpp"
#include "rrank/system.hpp"

namespace rrank::gramian {

inline constexpr double kObservableThreshold = 1e-8;

enum class GramianKind { Observability, Controllability };

struct GramianReport {
  int n = 0;
  Matrix gramian;
  double det = 0.0;
  double log_det = 0.0;  // -inf when singular
  double min_eig = 0.0;
  GramianKind kind = GramianKind::Observability;

  bool nondegenerate() const { return min_eig > kObservableThreshold; }
};

GramianReport observability_gramian(const OperatorSource& ops, int n);

/// Model-noise factor F_n (d x p) at step n.
using NoiseSource = std::function<Matrix(int)>;

/// F_n == 0: the model-noise factor of a perfect model.
NoiseSource perfect_model(int d);

GramianReport controllability_gramian(const OperatorSource& ops, const NoiseSource& f, int n);

struct ScanReport {
  double min_eig = 0.0;
  int argmin = 0;
  bool warn = false;  // some scanned step fell at or below kObservableThreshold
  std::vector<std::pair<int, double>> per_step;
};

/// A finite scan can falsify uniform observability, never certify it.
ScanReport uniform_observability_scan(const OperatorSource& ops, const std::vector<int>& steps);

}  // namespace rrank::gramian
