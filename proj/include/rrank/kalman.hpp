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

// Kalman filter for the perfect-model system, together with the closure
// products M_n = (I - K_n H_n) A_n M_{n-1} and B_{0:n} = A_n ... A_1 that give
// the analysis covariance in closed form, Delta_n = M_n Delta_0 B_{0:n}^T.

#include <functional>
#include <map>
#include <vector>

#include "rrank/linalg.hpp"
#include "rrank/system.hpp"

namespace rrank::kalman {

/// Dense B_{0:n} is only rebuilt for n up to this many steps.
inline constexpr int kFactorMaxSteps = 20;
/// ||M_n|| above this means the configuration is not observable.
inline constexpr double kMaxClosureNorm = 1e8;
inline constexpr double kGainIdentityTol = 1e-9;
inline constexpr double kJosephTol = 1e-8;
inline constexpr double kPsdTol = 1e-10;

struct FilterState {
  int n = 0;
  Vector x_f;    // x_{n|n-1}
  Matrix sigma;  // forecast covariance
  Vector x_a;    // x_{n|n}
  Matrix delta;  // analysis covariance
  Matrix gain;   // d x q
  // ||K - Delta H^T Q^{-1}|| / ||K||
  double gain_identity_residual = 0.0;
  // ||Joseph - (I - K H) Sigma|| / ||Joseph||
  double joseph_residual = 0.0;
};

struct Forecast {
  Vector x_f;
  Matrix sigma;
};

/// B_{0:n} is carried as b_q * diag(exp(b_logr)) * b_r with b_q orthonormal
/// and b_r upper triangular with unit diagonal, so its scale never has to be
/// representable.
struct ClosureAccumulator {
  int n = 0;
  Matrix m;
  Matrix b_q;
  Vector b_logr;
  Matrix b_r;

  static ClosureAccumulator identity(int d);
};

FilterState initial_state(const Matrix& delta0, const Vector& prior_mean, int q);

Forecast forecast(const FilterState& prev, const StepOperators& ops);

/// Gain via solve() on the innovation covariance, Joseph-form covariance.
FilterState analyze(const Forecast& fc, const StepOperators& ops, const Vector& y);

/// Throws InvariantViolation when a state breaks symmetry/PSD, the
/// analysis-does-not-inflate bound, or the gain identity.
void check_state(const FilterState& state);

ClosureAccumulator step_closure(const ClosureAccumulator& acc, const StepOperators& ops,
                                const Matrix& gain);

/// Dense B_{0:n} rebuilt from the accumulator (n <= kFactorMaxSteps).
Matrix dense_propagator(const ClosureAccumulator& acc);

/// M_n Delta_0 B_{0:n}^T.
Matrix factorized_delta(const ClosureAccumulator& acc, const Matrix& delta0, int n);

struct FilterOptions {
  std::vector<int> snapshot_steps;
  /// Called after every analysis with the state and the closure at that step.
  std::function<void(const FilterState&, const ClosureAccumulator&)> on_step;
  bool keep_states = true;
  bool enforce_joseph = true;
};

struct FilterRun {
  std::vector<FilterState> states;  // states[0] is the prior
  std::map<int, ClosureAccumulator> snapshots;
  double max_gain_identity_residual = 0.0;
  double max_joseph_residual = 0.0;
};

FilterRun run_filter(const SystemSpec& spec, const Trajectory& traj,
                     const FilterOptions& options = {});

FilterRun run_filter(const OperatorSource& ops, int horizon, const Matrix& delta0,
                     const Trajectory& traj, const FilterOptions& options = {});

/// Least-squares slope of the second half of a series, per step.
double tail_slope(const std::vector<double>& series);

}  // namespace rrank::kalman
