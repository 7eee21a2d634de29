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
#include "rrank/lyapunov.hpp"

#include <algorithm>
#include <cmath>

#include "rrank/error.hpp"
#include "rrank/kalman.hpp"

namespace rrank::lyapunov {
namespace {

Matrix dense_product(const OperatorSource& ops, int n, int d) {
  Matrix b = Matrix::Identity(d, d);
  for (int k = 1; k <= n; ++k) b = ops(k).a * b;
  if (!linalg::all_finite(b)) throw NumericalBlowupError(n, "dense propagator");
  return b;
}

linalg::SortedSpectrum rooted(const Vector& singulars, const Matrix& vectors, int n) {
  linalg::SortedSpectrum s{Vector(singulars.size()), vectors};
  for (Eigen::Index j = 0; j < singulars.size(); ++j) {
    s.values(j) = std::pow(singulars(j), 1.0 / n);
    Eigen::Index imax = 0;
    s.vectors.col(j).cwiseAbs().maxCoeff(&imax);
    if (s.vectors(imax, j) < 0) s.vectors.col(j) *= -1.0;
  }
  return s;
}

}  // namespace

int count_nonnegative(const Vector& exponents, double threshold) {
  return static_cast<int>((exponents.array() >= -threshold).count());
}

LyapunovResult qr_exponents(const OperatorSource& ops, int steps) {
  const StepOperators first = ops(1);
  const auto d = static_cast<int>(first.a.rows());
  if (steps < d) {
    throw Error(ErrorKind::InvalidInput,
                "QR method needs at least d = " + std::to_string(d) + " steps");
  }
  LyapunovResult out;
  out.history.resize(d, steps);
  Matrix q = Matrix::Identity(d, d);
  Vector log_sum = Vector::Zero(d);
  Vector half_sum = Vector::Zero(d);
  double log_det = 0.0;
  const int half = steps / 2;
  for (int n = 1; n <= steps; ++n) {
    const Matrix a = n == 1 ? first.a : ops(n).a;
    const auto qr = linalg::qr_positive(a * q);
    q = qr.q;
    log_sum += qr.r.diagonal().array().log().matrix();
    log_det += linalg::log_abs_det(a);
    out.history.col(n - 1) = log_sum / n;
    if (n == half) half_sum = log_sum;
  }
  out.backward_basis = q;
  out.mean_log_det = log_det / steps;

  Vector mu = log_sum / steps;
  Vector tail = (log_sum - half_sum) / (steps - half);
  std::sort(mu.data(), mu.data() + d, std::greater<>());
  std::sort(tail.data(), tail.data() + d, std::greater<>());
  out.exponents = mu;
  out.tail_exponents = tail;
  out.d0 = count_nonnegative(mu);

  Matrix f = Matrix::Identity(d, d);
  for (int n = steps; n >= 1; --n) f = linalg::qr_positive(ops(n).a.transpose() * f).q;
  out.forward_basis = f;
  return out;
}

OseledetsSnapshot oseledets_direct(const OperatorSource& ops, int n) {
  if (n < 1 || n > kalman::kFactorMaxSteps) {
    throw Error(ErrorKind::OutOfValidatedRange,
                "Oseledets window " + std::to_string(n) + " outside [1, " +
                    std::to_string(kalman::kFactorMaxSteps) + "]");
  }
  const auto d = static_cast<int>(ops(1).a.rows());
  const auto f = linalg::svd(dense_product(ops, n, d));
  return {n, rooted(f.singulars, f.right, n), rooted(f.singulars, f.left, n)};
}

std::vector<ConvergencePoint> backward_convergence(const OperatorSource& ops,
                                                   const std::vector<int>& checkpoints) {
  std::vector<int> sorted = checkpoints;
  std::sort(sorted.begin(), sorted.end());
  std::vector<ConvergencePoint> out;
  if (sorted.empty()) return out;
  if (sorted.front() < 1 || sorted.back() > kalman::kFactorMaxSteps) {
    throw Error(ErrorKind::OutOfValidatedRange, "backward convergence checkpoints must lie in [1, " +
                                                    std::to_string(kalman::kFactorMaxSteps) + "]");
  }
  const auto d = static_cast<int>(ops(1).a.rows());
  Matrix q = Matrix::Identity(d, d);
  Matrix b = Matrix::Identity(d, d);
  std::size_t next = 0;
  for (int n = 1; n <= sorted.back(); ++n) {
    const Matrix a = ops(n).a;
    q = linalg::qr_positive(a * q).q;
    b = a * b;
    while (next < sorted.size() && sorted[next] == n) {
      const auto f = linalg::svd(b);
      ConvergencePoint p{n, {}};
      for (int j = 0; j < d; ++j) {
        p.angles.push_back(linalg::principal_angles(q.col(j), f.left.col(j)).front());
      }
      out.push_back(std::move(p));
      ++next;
    }
  }
  return out;
}

}  // namespace rrank::lyapunov
