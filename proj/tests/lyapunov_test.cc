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

#include <gtest/gtest.h>

#include "rrank/error.hpp"

namespace rrank::lyapunov {
namespace {

OperatorSource constant(const Matrix& a) {
  return [a](int n) { return StepOperators{n, a, Matrix::Identity(1, a.cols()), Matrix::Ones(1, 1)}; };
}

SystemSpec rotated(std::vector<double> spectrum, int horizon, std::uint64_t seed) {
  SystemSpec s;
  s.d = static_cast<int>(spectrum.size());
  s.q = 1;
  s.horizon = horizon;
  s.seed = seed;
  s.generator = GeneratorKind::RotatedDiagonal;
  s.bounds.c_a = std::abs(spectrum.front());
  s.spectrum = std::move(spectrum);
  return s;
}

TEST(QrExponents, DiagonalIsExact) {
  const auto r = qr_exponents(constant(Eigen::Vector2d(2, 0.5).asDiagonal()), 100);
  EXPECT_NEAR(r.exponents(0), std::log(2.0), 1e-14);
  EXPECT_NEAR(r.exponents(1), std::log(0.5), 1e-14);
  EXPECT_EQ(r.d0, 1);
  EXPECT_EQ(r.history.cols(), 100);
}

TEST(QrExponents, RotatedDiagonalRecoversLogSpectrum) {
  const std::vector<double> mags{2.0, 1.0, 0.5};
  const auto spec = rotated(mags, 500, 4);
  const auto r = qr_exponents(operator_source(spec), 500);
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(r.exponents(j), std::log(mags[static_cast<std::size_t>(j)]), 1e-8);
  EXPECT_EQ(r.d0, 2);
}

TEST(QrExponents, SumMatchesMeanLogDeterminant) {
  SystemSpec spec;
  spec.d = 6;
  spec.q = 2;
  spec.horizon = 200;
  spec.seed = 12;
  const auto r = qr_exponents(operator_source(spec), 200);
  double oracle = 0.0;
  for (int n = 1; n <= 200; ++n) oracle += linalg::log_abs_det(operators_at(spec, n).a);
  oracle /= 200.0;
  EXPECT_NEAR(r.exponents.sum(), oracle, 1e-10);
  EXPECT_NEAR(r.mean_log_det, oracle, 1e-10);
  for (Eigen::Index j = 0; j + 1 < 6; ++j) EXPECT_GE(r.exponents(j), r.exponents(j + 1));
}

TEST(QrExponents, IndependentOfObservationOperator) {
  const Matrix a = Eigen::Vector3d(1.5, 0.9, 0.3).asDiagonal();
  const auto with_h = [a](const Matrix& h) {
    return OperatorSource([a, h](int n) { return StepOperators{n, a, h, Matrix::Identity(h.rows(), h.rows())}; });
  };
  const auto r1 = qr_exponents(with_h(Matrix::Identity(1, 3)), 50);
  const auto r2 = qr_exponents(with_h(Matrix::Ones(2, 3)), 50);
  EXPECT_TRUE(r1.exponents == r2.exponents);
}

TEST(QrExponents, RequiresAtLeastDSteps) {
  EXPECT_THROW(qr_exponents(constant(Matrix::Identity(4, 4)), 3), Error);
}

TEST(CountNonnegative, UsesThreshold) {
  EXPECT_EQ(count_nonnegative(Eigen::Vector4d(0.5, 0.0, -5e-4, -0.1)), 3);
  EXPECT_EQ(count_nonnegative(Eigen::Vector4d(0.5, 0.0, -5e-4, -0.1), 1e-4), 2);
}

TEST(Oseledets, DirectSpectraMatchPropagatorSvd) {
  const auto spec = rotated({2.0, 1.0, 0.5}, 20, 8);
  const auto snap = oseledets_direct(operator_source(spec), 10);
  const Vector oracle = Eigen::Vector3d(2.0, 1.0, 0.5);
  EXPECT_LE((snap.ef_spectrum.values - oracle).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((snap.eb_spectrum.values - oracle).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW(oseledets_direct(operator_source(spec), 21), Error);
}

TEST(Oseledets, BackwardBasisAlignsWithLeftSingularVectors) {
  const auto spec = rotated({3.0, 1.0, 0.2}, 20, 10);
  const auto points = backward_convergence(operator_source(spec), {2, 10, 20});
  ASSERT_EQ(points.size(), 3u);
  for (const auto& p : points) {
    for (double angle : p.angles) EXPECT_LT(angle, 1e-8);
  }
}

TEST(QrExponents, ForwardBasisSpansSlowDirectionOfDiagonal) {
  const auto r = qr_exponents(constant(Eigen::Vector2d(2, 0.5).asDiagonal()), 60);
  EXPECT_NEAR(std::abs(r.forward_basis(0, 0)), 1.0, 1e-12);
  EXPECT_NEAR(std::abs(r.backward_basis(1, 1)), 1.0, 1e-12);
}

}  // namespace
}  // namespace rrank::lyapunov
