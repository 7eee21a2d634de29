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
#include "rrank/diagnostics.hpp"

#include <cmath>

#include "rrank/error.hpp"

namespace rrank::diagnostics {
namespace {

Vector abs_sorted(const Matrix& z) { return linalg::sym_eig(z).values.cwiseAbs(); }

int count_below(const Vector& mags, double eps) {
  return static_cast<int>((mags.array() < eps).count());
}

}  // namespace

int eps_eigenspace_dim(const Matrix& z, double eps) {
  if (!(eps > 0)) throw Error(ErrorKind::InvalidInput, "eps must be positive");
  return count_below(abs_sorted(z), eps);
}

bool lemma_subspace_bound_check(const Matrix& z, const Matrix& w, double eps) {
  if (!(eps > 0)) throw Error(ErrorKind::InvalidInput, "eps must be positive");
  if (w.rows() != z.rows()) throw Error(ErrorKind::InvalidInput, "basis row count mismatch");
  if (linalg::orthonormality_defect(w) > linalg::tol::kOrth) {
    throw Error(ErrorKind::InvalidInput, "basis is not orthonormal");
  }
  const double sup = w.cols() == 0 ? 0.0 : linalg::op_norm(z * w);
  if (!(sup < eps)) {
    throw Error(ErrorKind::HypothesisFailed,
                "sup ||Z u|| over the subspace is " + std::to_string(sup) + ", not below eps");
  }
  return eps_eigenspace_dim(z, eps) >= w.cols();
}

Vector projection_profile(const Matrix& delta, const Matrix& basis) {
  return (delta * basis).colwise().norm().transpose();
}

double restriction_norm(const Matrix& cov, const Matrix& stable_basis) {
  if (stable_basis.cols() == 0) return 0.0;
  return linalg::op_norm(cov * stable_basis);
}

double stable_map_check(const Matrix& m, const Matrix& delta0, const Matrix& forward_stable,
                        const Matrix& backward_stable) {
  const Matrix w = linalg::solve(m.transpose(), linalg::solve(delta0, forward_stable));
  return linalg::max_principal_angle(linalg::orthonormalize(w), backward_stable);
}

DiagnosticsFrame make_frame(const kalman::FilterState& state, const Matrix& backward_basis,
                            int d0, double eps) {
  const Eigen::Index d = state.delta.rows();
  if (d0 < 0 || d0 > d) throw Error(ErrorKind::InvalidInput, "d0 outside [0, d]");
  DiagnosticsFrame f;
  f.n = state.n;
  f.delta_eigs = abs_sorted(state.delta);
  f.sigma_eigs = abs_sorted(state.sigma);
  f.proj_norms = projection_profile(state.delta, backward_basis);
  const Matrix stable = backward_basis.rightCols(d - d0);
  f.restriction_delta = restriction_norm(state.delta, stable);
  f.restriction_sigma = restriction_norm(state.sigma, stable);
  f.eps_rank_delta = count_below(f.delta_eigs, eps);
  f.eps_rank_sigma = count_below(f.sigma_eigs, eps);
  return f;
}

int collapse_step(const std::vector<DiagnosticsFrame>& frames, int target) {
  int first = -1;
  for (const auto& f : frames) {
    const bool ok = f.eps_rank_delta >= target && f.eps_rank_sigma >= target;
    if (ok && first < 0) first = f.n;
    if (!ok) first = -1;
  }
  return first;
}

}  // namespace rrank::diagnostics
