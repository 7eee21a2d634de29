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

// Lyapunov exponents and vectors of a sequence of invertible maps by the QR
// method, plus the small-window Oseledets matrices built from a dense
// propagator.

#include <vector>

#include "rrank/linalg.hpp"
#include "rrank/system.hpp"

namespace rrank::lyapunov {

/// Exponents above -kNeutralThreshold count as non-negative.
inline constexpr double kNeutralThreshold = 1e-3;

struct LyapunovResult {
  Vector exponents;        // nonincreasing, log-magnitude per step
  Vector tail_exponents;   // averages over the second half of the run
  Matrix backward_basis;   // Q_N, proxy for L^b(N)
  Matrix forward_basis;    // proxy for L^f(0)
  int d0 = 0;
  Matrix history;          // column n - 1: running estimates after n steps
  double mean_log_det = 0; // (1/N) sum_n log|det A_n|
};

int count_nonnegative(const Vector& exponents, double threshold = kNeutralThreshold);

/// Q_0 = I, Q_n R_n = A_n Q_{n-1}, mu_j = (1/N) sum_n log (R_n)_jj. The
/// forward basis runs the same recursion on A_N^T, ..., A_1^T.
LyapunovResult qr_exponents(const OperatorSource& ops, int steps);

struct OseledetsSnapshot {
  int n = 0;
  linalg::SortedSpectrum ef_spectrum;  // eigen-pairs of [B^T B]^{1/2n}
  linalg::SortedSpectrum eb_spectrum;  // eigen-pairs of [B B^T]^{1/2n}
};

/// Both spectra come from one SVD of the dense B_{0:n} (n <= 20).
OseledetsSnapshot oseledets_direct(const OperatorSource& ops, int n);

struct ConvergencePoint {
  int n = 0;
  std::vector<double> angles;  // angle between QR column j and left singular vector j
};

std::vector<ConvergencePoint> backward_convergence(const OperatorSource& ops,
                                                   const std::vector<int>& checkpoints);

}  // namespace rrank::lyapunov
