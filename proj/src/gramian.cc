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
#include "rrank/gramian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rrank/error.hpp"

namespace rrank::gramian {
namespace {

// Fills the report from a stacked factor S with gramian = S^T S.
GramianReport from_factor(const Matrix& stacked, int n, GramianKind kind) {
  if (!linalg::all_finite(stacked)) throw NumericalBlowupError(n, "Gramian window overflow");
  const Eigen::Index d = stacked.cols();
  GramianReport r;
  r.n = n;
  r.kind = kind;
  r.gramian = linalg::symmetrize(stacked.transpose() * stacked);

  // Rows in decreasing norm keep the pivoted-QR preconditioned Jacobi SVD
  // accurate on row-graded factors.
  std::vector<Eigen::Index> order(stacked.rows());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return stacked.row(a).norm() > stacked.row(b).norm();
  });
  Matrix sorted(stacked.rows(), d);
  for (Eigen::Index i = 0; i < stacked.rows(); ++i) sorted.row(i) = stacked.row(order[i]);

  Vector sv = Vector::Zero(d);
  if (sorted.rows() > 0) {
    const Vector s =
        Eigen::JacobiSVD<Matrix, Eigen::ColPivHouseholderQRPreconditioner>(sorted).singularValues();
    sv.head(s.size()) = s;
  }
  r.min_eig = sv(d - 1) * sv(d - 1);
  r.log_det = 0.0;
  for (Eigen::Index j = 0; j < d; ++j) {
    r.log_det += sv(j) > 0 ? 2.0 * std::log(sv(j)) : -std::numeric_limits<double>::infinity();
  }
  r.det = std::exp(r.log_det);
  return r;
}

}  // namespace

GramianReport observability_gramian(const OperatorSource& ops, int n) {
  if (n < 1) throw Error(ErrorKind::InvalidInput, "observability window starts at step >= 1");
  const StepOperators base = ops(n);
  const Eigen::Index d = base.a.rows();
  const Eigen::Index q = base.h.rows();
  Matrix stacked(d * q, d);
  Matrix propagator = Matrix::Identity(d, d);  // B_{n:n+m}
  for (Eigen::Index m = 0; m < d; ++m) {
    const StepOperators step = m == 0 ? base : ops(n + static_cast<int>(m));
    if (m > 0) propagator = step.a * propagator;
    // Q^{-1} = L^{-T} L^{-1}, so H^T Q^{-1} H = (L^{-1} H)^T (L^{-1} H).
    const Eigen::LLT<Matrix> llt(step.q);
    if (llt.info() != Eigen::Success) {
      throw Error(ErrorKind::InvalidInput, "Q is not positive definite at step " +
                                               std::to_string(step.n));
    }
    stacked.middleRows(m * q, q) = llt.matrixL().solve(step.h * propagator);
  }
  return from_factor(stacked, n, GramianKind::Observability);
}

NoiseSource perfect_model(int d) {
  return [d](int) { return Matrix::Zero(d, 1); };
}

GramianReport controllability_gramian(const OperatorSource& ops, const NoiseSource& f, int n) {
  if (n < 0) throw Error(ErrorKind::InvalidInput, "controllability window starts at step >= 0");
  const Eigen::Index d = ops(n + 1).a.rows();
  std::vector<Matrix> blocks;
  Eigen::Index total = 0;
  Matrix propagator = Matrix::Identity(d, d);  // B_{n+m:n+d}
  for (Eigen::Index m = d; m >= 1; --m) {
    if (m < d) propagator = propagator * ops(n + static_cast<int>(m) + 1).a;
    const Matrix fm = f(n + static_cast<int>(m));
    if (fm.rows() != d) throw Error(ErrorKind::InvalidInput, "F must have d rows");
    blocks.push_back(propagator * fm);
    total += fm.cols();
  }
  Matrix factor(d, total);
  Eigen::Index col = 0;
  for (const auto& b : blocks) {
    factor.middleCols(col, b.cols()) = b;
    col += b.cols();
  }
  return from_factor(factor.transpose(), n, GramianKind::Controllability);
}

ScanReport uniform_observability_scan(const OperatorSource& ops, const std::vector<int>& steps) {
  ScanReport report;
  report.min_eig = std::numeric_limits<double>::infinity();
  for (int n : steps) {
    const auto g = observability_gramian(ops, n);
    report.per_step.emplace_back(n, g.min_eig);
    if (g.min_eig < report.min_eig) {
      report.min_eig = g.min_eig;
      report.argmin = n;
    }
  }
  report.warn = steps.empty() || !(report.min_eig > kObservableThreshold);
  return report;
}

}  // namespace rrank::gramian
