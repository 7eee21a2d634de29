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

// Dense linear-algebra kernels shared by the filter, the Lyapunov analysis and
// the diagnostics. Matrices are Eigen::MatrixXd (column-major storage); the
// operator norm is always the largest singular value. Inverses are never
// formed explicitly: every "Z^{-1} B" goes through solve().

#include <vector>

#include <Eigen/Dense>

namespace rrank {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace linalg {

namespace tol {
inline constexpr double kSym = 1e-10;
inline constexpr double kEig = 1e-10;
inline constexpr double kSvd = 1e-10;
inline constexpr double kOrth = 1e-10;
inline constexpr double kSolve = 1e-9;
inline constexpr double kRank = 1e-13;
inline constexpr double kMaxCondition = 1e12;
}  // namespace tol

/// Eigen-pairs of a symmetric matrix, ordered by descending |value|. Each
/// eigenvector is unit-norm with its largest-magnitude entry positive.
struct SortedSpectrum {
  Vector values;
  Matrix vectors;
};

/// Z = left * diag(singulars) * right^T with singulars nonincreasing.
struct SvdFactors {
  Matrix left;
  Vector singulars;
  Matrix right;
};

struct QrFactors {
  Matrix q;
  Matrix r;
};

bool all_finite(const Matrix& z);

/// Largest singular value.
double op_norm(const Matrix& z);

Matrix symmetrize(const Matrix& z);

/// ||W^T W - I|| in operator norm.
double orthonormality_defect(const Matrix& w);

SortedSpectrum sym_eig(const Matrix& z);

SvdFactors svd(const Matrix& z);

/// Principal angles between span(wa) and span(wb), nondecreasing, in
/// [0, pi/2]. min(cols(wa), cols(wb)) angles are returned.
std::vector<double> principal_angles(const Matrix& wa, const Matrix& wb);

/// Largest principal angle, pi/2 when the dimensions differ and 0 for two
/// empty bases.
double max_principal_angle(const Matrix& wa, const Matrix& wb);

/// Thin Householder QR with the sign of every column of Q chosen so that R has
/// a strictly positive diagonal. Throws RankDeficientError when a diagonal
/// entry falls below tol::kRank * ||Z||_F.
QrFactors qr_positive(const Matrix& z);

/// X with Z X = B via partial-pivot LU. Throws IllConditionedError when the
/// reciprocal-condition estimate of Z exceeds tol::kMaxCondition.
Matrix solve(const Matrix& z, const Matrix& b);

/// Orthonormal basis of the column span of a full-column-rank matrix.
Matrix orthonormalize(const Matrix& z);

/// log |det Z| through LU.
double log_abs_det(const Matrix& z);

/// Natural logs of the singular values of diag(exp(log_scale)) * upper, where
/// `upper` is upper triangular with moderate entries. The scaled product is
/// never formed, so the result stays finite when the scales span far more
/// than the double exponent range. Output is nonincreasing.
Vector graded_log_singular_values(const Vector& log_scale, const Matrix& upper);

}  // namespace linalg
}  // namespace rrank
