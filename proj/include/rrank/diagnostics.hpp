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

// Per-step rank-collapse metrics for filter covariances.

#include <vector>

#include "rrank/kalman.hpp"
#include "rrank/linalg.hpp"

namespace rrank::diagnostics {

inline constexpr double kDefaultEps = 1e-6;

struct DiagnosticsFrame {
  int n = 0;
  Vector delta_eigs;  // |eigenvalues| of the analysis covariance, descending
  Vector sigma_eigs;  // same for the forecast covariance
  Vector proj_norms;  // ||Delta u_j||, in basis column order
  double restriction_delta = 0.0;
  double restriction_sigma = 0.0;
  int eps_rank_delta = 0;
  int eps_rank_sigma = 0;
};

/// Number of eigenvalues of the symmetric matrix z with magnitude below eps.
int eps_eigenspace_dim(const Matrix& z, double eps);

/// Checks that ||Z u|| < eps on span(w) forces dim E^eps(Z) >= cols(w).
/// Throws HypothesisFailed when the premise does not hold.
bool lemma_subspace_bound_check(const Matrix& z, const Matrix& w, double eps);

Vector projection_profile(const Matrix& delta, const Matrix& basis);

/// ||Cov L L^T||, evaluated as sigma_1(Cov L). Zero for an empty basis.
double restriction_norm(const Matrix& cov, const Matrix& stable_basis);

/// Largest principal angle between span(M^{-T} Delta0^{-1} Lf) and span(Lb).
double stable_map_check(const Matrix& m, const Matrix& delta0, const Matrix& forward_stable,
                        const Matrix& backward_stable);

/// Builds a frame from one filter state and the backward basis at the same step.
/// Columns d0.. of the basis are taken as the stable directions.
DiagnosticsFrame make_frame(const kalman::FilterState& state, const Matrix& backward_basis,
                            int d0, double eps = kDefaultEps);

/// First step from which every later frame has eps_rank_delta and eps_rank_sigma
/// at least `target`; -1 if the final frame misses it.
int collapse_step(const std::vector<DiagnosticsFrame>& frames, int target);

}  // namespace rrank::diagnostics
