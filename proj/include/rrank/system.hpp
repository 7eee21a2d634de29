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

// Perfect-model linear-Gaussian systems
//
//   x_{n+1} = A_{n+1} x_n,   y_{n+1} = H_{n+1} x_{n+1} + q_{n+1},  q ~ N(0, Q)
//
// and the seeded generators that produce A_n, H_n, Q_n. Model noise is
// identically zero throughout.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rrank/linalg.hpp"

namespace rrank {

enum class GeneratorKind { RandomBounded, RotatedDiagonal, Autonomous, ExplicitSequence };
enum class Delta0Kind { Identity, RandomSPD, Explicit };

const char* to_string(GeneratorKind kind);
const char* to_string(Delta0Kind kind);

/// Norm bounds ||A_n|| <= c_a, ||H_n|| <= c_h, ||Q_n|| <= c_q.
struct Bounds {
  double c_a = 2.0;
  double c_h = 1.0;
  double c_q = 1.0;
};

struct ExplicitStep {
  Matrix a;
  Matrix h;
  Matrix q;
};

struct SystemSpec {
  int d = 1;
  int q = 1;
  int horizon = 1;
  std::uint64_t seed = 0;
  GeneratorKind generator = GeneratorKind::RandomBounded;
  Bounds bounds;
  Delta0Kind delta0 = Delta0Kind::Identity;
  Matrix delta0_explicit;
  // Target magnitudes (RotatedDiagonal, Autonomous). Sorted internally by
  // descending magnitude.
  std::optional<std::vector<double>> spectrum;
  // ExplicitSequence operators for steps 1, 2, ...; the list repeats
  // periodically when shorter than the horizon.
  std::vector<ExplicitStep> explicit_steps;
  // Autonomous only: V = O (I + skew * E) with ||E|| = 1, so cond(V) is at
  // most (1 + skew) / (1 - skew).
  double autonomous_skew = 0.3;

  /// Throws Error(InvalidInput) describing the first violated invariant.
  void validate() const;
};

struct StepOperators {
  int n = 0;
  Matrix a;
  Matrix h;
  Matrix q;
};

/// Truth x_0..x_N and observations y_1..y_N (observations[n - 1] is y_n).
struct Trajectory {
  std::vector<Vector> truth;
  std::vector<Vector> observations;

  const Vector& y(int n) const { return observations.at(static_cast<std::size_t>(n - 1)); }
};

/// A = V diag(eigenvalues) V^{-1}; the exact construction behind the
/// Autonomous generator.
struct AutonomousConstruction {
  Matrix a;
  Matrix v;
  Vector eigenvalues;
};

/// Operators at step n (1 <= n <= horizon). Deterministic in (seed, n).
StepOperators operators_at(const SystemSpec& spec, int n);

/// R_n of the RotatedDiagonal construction A_n = R_n D R_{n-1}^T; R_0 = I.
Matrix rotation_at(const SystemSpec& spec, int n);

/// D of the RotatedDiagonal construction (magnitude-sorted spectrum).
Vector rotated_diagonal(const SystemSpec& spec);

AutonomousConstruction autonomous_construction(const SystemSpec& spec);

Matrix initial_covariance(const SystemSpec& spec);

/// Checks the StepOperators invariants against the bounds; throws on failure.
void check_operators(const StepOperators& ops, const Bounds& bounds);

/// x_0 ~ N(prior_mean, Delta_0).
Vector draw_initial_state(const SystemSpec& spec, const Vector& prior_mean, std::uint64_t seed);

Trajectory simulate_truth(const SystemSpec& spec, const Vector& x0, std::uint64_t noise_seed);

/// Random-access stream of step operators (n >= 1).
using OperatorSource = std::function<StepOperators(int)>;

OperatorSource operator_source(const SystemSpec& spec);
/// ops[k] is step k + 1.
OperatorSource operator_source(std::vector<StepOperators> ops);

}  // namespace rrank
