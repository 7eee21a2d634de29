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
#include "rrank/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rrank/error.hpp"

namespace rrank::linalg {

bool all_finite(const Matrix& z) { return z.allFinite(); }

double op_norm(const Matrix& z) {
  if (z.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(z);
  return svd.singularValues()(0);
}

Matrix symmetrize(const Matrix& z) { return 0.5 * (z + z.transpose()); }

double orthonormality_defect(const Matrix& w) {
  if (w.cols() == 0) return 0.0;
  return op_norm(w.transpose() * w - Matrix::Identity(w.cols(), w.cols()));
}

SortedSpectrum sym_eig(const Matrix& z) {
  if (z.rows() != z.cols()) throw Error(ErrorKind::InvalidInput, "sym_eig: matrix is not square");
  if (!all_finite(z)) throw Error(ErrorKind::InvalidInput, "sym_eig: non-finite entries");
  const Eigen::Index d = z.rows();
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(z));
  if (es.info() != Eigen::Success) throw Error(ErrorKind::InvalidInput, "sym_eig: solver failed");

  std::vector<Eigen::Index> order(d);
  std::iota(order.begin(), order.end(), 0);
  const Vector& ev = es.eigenvalues();
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (std::abs(ev(a)) != std::abs(ev(b))) return std::abs(ev(a)) > std::abs(ev(b));
    return ev(a) > ev(b);
  });

  SortedSpectrum out{Vector(d), Matrix(d, d)};
  for (Eigen::Index j = 0; j < d; ++j) {
    out.values(j) = ev(order[j]);
    Vector v = es.eigenvectors().col(order[j]);
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    if (v(imax) < 0) v = -v;
    out.vectors.col(j) = v;
  }
  return out;
}

SvdFactors svd(const Matrix& z) {
  if (!all_finite(z)) throw Error(ErrorKind::InvalidInput, "svd: non-finite entries");
  Eigen::JacobiSVD<Matrix, Eigen::ColPivHouseholderQRPreconditioner> js(
      z, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {js.matrixU(), js.singularValues(), js.matrixV()};
}

std::vector<double> principal_angles(const Matrix& wa, const Matrix& wb) {
  if (wa.rows() != wb.rows()) {
    throw Error(ErrorKind::InvalidInput, "principal_angles: row counts differ");
  }
  if (orthonormality_defect(wa) > tol::kOrth || orthonormality_defect(wb) > tol::kOrth) {
    throw Error(ErrorKind::InvalidInput, "principal_angles: bases are not orthonormal");
  }
  // The smaller basis is always projected onto the larger one so that the
  // result does not depend on argument order.
  const bool swap = wa.cols() > wb.cols();
  const Matrix& small = swap ? wb : wa;
  const Matrix& large = swap ? wa : wb;
  const Eigen::Index k = small.cols();
  if (k == 0) return {};

  // Cosines lose resolution near zero angle, so small angles come from the
  // sines (singular values of the component of `small` outside span(large)).
  const Vector cosines = Eigen::JacobiSVD<Matrix>(small.transpose() * large).singularValues();
  const Matrix outside = small - large * (large.transpose() * small);
  const Vector sines = Eigen::JacobiSVD<Matrix>(outside).singularValues();

  std::vector<double> angles(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const double c = std::clamp(j < cosines.size() ? cosines(j) : 0.0, 0.0, 1.0);
    const double s = std::clamp(sines(k - 1 - j), 0.0, 1.0);
    angles[j] = c > M_SQRT1_2 ? std::asin(s) : std::acos(c);
  }
  std::sort(angles.begin(), angles.end());
  return angles;
}

double max_principal_angle(const Matrix& wa, const Matrix& wb) {
  if (wa.cols() != wb.cols()) return M_PI_2;
  const auto angles = principal_angles(wa, wb);
  return angles.empty() ? 0.0 : angles.back();
}

QrFactors qr_positive(const Matrix& z) {
  if (!all_finite(z)) throw Error(ErrorKind::InvalidInput, "qr_positive: non-finite entries");
  const Eigen::Index m = z.rows();
  const Eigen::Index n = z.cols();
  const Eigen::Index k = std::min(m, n);
  Eigen::HouseholderQR<Matrix> qr(z);
  QrFactors out;
  out.q = qr.householderQ() * Matrix::Identity(m, k);
  out.r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  const double scale = z.norm();
  for (Eigen::Index j = 0; j < k; ++j) {
    if (out.r(j, j) < 0) {
      out.r.row(j) *= -1.0;
      out.q.col(j) *= -1.0;
    }
    if (!(out.r(j, j) > tol::kRank * scale)) {
      throw RankDeficientError(static_cast<int>(j), "qr_positive: diagonal of R below threshold");
    }
  }
  return out;
}

Matrix solve(const Matrix& z, const Matrix& b) {
  if (z.rows() != z.cols() || z.rows() != b.rows()) {
    throw Error(ErrorKind::InvalidInput, "solve: dimension mismatch");
  }
  if (!all_finite(z) || !all_finite(b)) {
    throw Error(ErrorKind::InvalidInput, "solve: non-finite entries");
  }
  if (z.size() == 0) return Matrix(0, b.cols());
  Eigen::PartialPivLU<Matrix> lu(z);
  const double rcond = lu.rcond();
  const double kappa = rcond > 0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
  if (!(kappa <= tol::kMaxCondition)) throw IllConditionedError(kappa, "solve");
  return lu.solve(b);
}

Matrix orthonormalize(const Matrix& z) {
  if (z.cols() == 0) return Matrix(z.rows(), 0);
  return qr_positive(z).q;
}

double log_abs_det(const Matrix& z) {
  if (z.rows() != z.cols()) throw Error(ErrorKind::InvalidInput, "log_abs_det: not square");
  Eigen::PartialPivLU<Matrix> lu(z);
  return lu.matrixLU().diagonal().cwiseAbs().array().log().sum();
}

namespace {

// Union-find over indices coupled by non-negligible off-diagonal entries.
std::vector<std::vector<Eigen::Index>> coupled_groups(const Matrix& u, double threshold) {
  const Eigen::Index d = u.rows();
  std::vector<Eigen::Index> parent(d);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](Eigen::Index i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i + 1; j < d; ++j) {
      if (std::abs(u(i, j)) > threshold) parent[find(j)] = find(i);
    }
  }
  std::vector<std::vector<Eigen::Index>> groups;
  std::vector<Eigen::Index> slot(d, -1);
  for (Eigen::Index i = 0; i < d; ++i) {
    const Eigen::Index root = find(i);
    if (slot[root] < 0) {
      slot[root] = static_cast<Eigen::Index>(groups.size());
      groups.emplace_back();
    }
    groups[slot[root]].push_back(i);
  }
  return groups;
}

}  // namespace

Vector graded_log_singular_values(const Vector& log_scale, const Matrix& upper) {
  const Eigen::Index d = log_scale.size();
  if (upper.rows() != d || upper.cols() != d) {
    throw Error(ErrorKind::InvalidInput, "graded_log_singular_values: dimension mismatch");
  }
  if (!all_finite(upper) || !log_scale.allFinite()) {
    throw Error(ErrorKind::InvalidInput, "graded_log_singular_values: non-finite input");
  }
  Vector a = log_scale;
  Matrix u = upper.triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < d; ++i) {
    const double diag = std::abs(u(i, i));
    if (!(diag > 0)) {
      throw RankDeficientError(static_cast<int>(i), "graded_log_singular_values: singular factor");
    }
    a(i) += std::log(diag);
    u.row(i) /= diag;
  }

  // Unshifted triangular QR sweeps: G = diag(e^a) u and G' = R diag(e^a) with
  // u^T = Q R share singular values, and the coupling between rows of very
  // different scale decays like e^{a_j - a_i} per sweep.
  constexpr double kCoupling = 1e-18;
  constexpr int kMaxSweeps = 200;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = i + 1; j < d; ++j) off = std::max(off, std::abs(u(i, j)));
    }
    if (off <= kCoupling) break;

    Eigen::HouseholderQR<Matrix> qr(u.transpose());
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    Vector a_next(d);
    Matrix u_next = Matrix::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      const double rii = std::abs(r(i, i));
      if (!(rii > 0)) {
        throw RankDeficientError(static_cast<int>(i), "graded_log_singular_values: singular sweep");
      }
      a_next(i) = a(i) + std::log(rii);
      for (Eigen::Index j = i; j < d; ++j) {
        const double gap = a(j) - a(i);
        if (gap > 700.0) {
          throw NumericalBlowupError(std::nullopt, "graded_log_singular_values: scale inversion");
        }
        u_next(i, j) = r(i, j) / rii * std::exp(gap);
      }
    }
    a = a_next;
    u = u_next;
  }

  Vector out(d);
  for (const auto& group : coupled_groups(u, kCoupling)) {
    const auto k = static_cast<Eigen::Index>(group.size());
    double amax = -std::numeric_limits<double>::infinity();
    for (auto i : group) amax = std::max(amax, a(i));
    Matrix block(k, k);
    for (Eigen::Index p = 0; p < k; ++p) {
      for (Eigen::Index q = 0; q < k; ++q) {
        block(p, q) = std::exp(a(group[p]) - amax) * u(group[p], group[q]);
      }
    }
    const Vector sv = Eigen::JacobiSVD<Matrix>(block).singularValues();
    for (Eigen::Index p = 0; p < k; ++p) out(group[p]) = amax + std::log(sv(p));
  }
  std::sort(out.data(), out.data() + d, std::greater<>());
  return out;
}

}  // namespace rrank::linalg
