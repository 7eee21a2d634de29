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
#include "rrank/system.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "rrank/error.hpp"
#include "rrank/spectral.hpp"

namespace rrank {
namespace {

SystemSpec random_bounded(int d, int q, int horizon, std::uint64_t seed) {
  SystemSpec s;
  s.d = d;
  s.q = q;
  s.horizon = horizon;
  s.seed = seed;
  return s;
}

TEST(OperatorsAt, RandomBoundedShapesAndBounds) {
  const auto spec = random_bounded(30, 10, 50, 11);
  for (int n : {1, 17, 50}) {
    const auto ops = operators_at(spec, n);
    EXPECT_EQ(ops.n, n);
    EXPECT_EQ(ops.a.rows(), 30);
    EXPECT_EQ(ops.a.cols(), 30);
    EXPECT_EQ(ops.h.rows(), 10);
    EXPECT_EQ(ops.h.cols(), 30);
    EXPECT_EQ(ops.q.rows(), 10);
    EXPECT_EQ(ops.q.cols(), 10);
    const double na = linalg::op_norm(ops.a);
    EXPECT_GE(na, 0.5 * spec.bounds.c_a * (1 - 1e-12));
    EXPECT_LE(na, spec.bounds.c_a * (1 + 1e-12));
    EXPECT_LE(linalg::op_norm(ops.h), spec.bounds.c_h * (1 + 1e-12));
    EXPECT_LE(linalg::op_norm(ops.q), spec.bounds.c_q * (1 + 1e-12));
    EXPECT_GT(linalg::sym_eig(ops.q).values.minCoeff(), 0.0);
    const auto sv = linalg::svd(ops.a).singulars;
    EXPECT_GE(sv(29), 1e-6 * sv(0));
  }
}

TEST(OperatorsAt, DeterministicInSeedAndStep) {
  const auto spec = random_bounded(5, 2, 10, 3);
  const auto a = operators_at(spec, 4);
  const auto b = operators_at(spec, 4);
  EXPECT_TRUE(a.a == b.a && a.h == b.h && a.q == b.q);
  EXPECT_FALSE(operators_at(spec, 5).a == a.a);
  auto other = spec;
  other.seed = 4;
  EXPECT_FALSE(operators_at(other, 4).a == a.a);
}

TEST(OperatorsAt, RejectsOutOfRangeStep) {
  const auto spec = random_bounded(3, 1, 10, 1);
  EXPECT_THROW(operators_at(spec, 0), Error);
  EXPECT_THROW(operators_at(spec, 11), Error);
}

TEST(OperatorsAt, RotatedDiagonalPropagatorIsExact) {
  SystemSpec spec = random_bounded(4, 2, 20, 9);
  spec.generator = GeneratorKind::RotatedDiagonal;
  spec.spectrum = std::vector<double>{2.0, -1.0, 0.5, 0.25};
  EXPECT_TRUE(rotation_at(spec, 0) == Matrix::Identity(4, 4));
  const Vector dvals = rotated_diagonal(spec);
  Matrix b = Matrix::Identity(4, 4);
  for (int n = 1; n <= 20; ++n) {
    b = operators_at(spec, n).a * b;
    const Vector dn = dvals.array().pow(n);
    const Matrix oracle = rotation_at(spec, n) * dn.asDiagonal() * rotation_at(spec, 0).transpose();
    EXPECT_LE(linalg::op_norm(b - oracle), n * 1e-12 * dn.cwiseAbs().maxCoeff());
  }
}

TEST(OperatorsAt, AutonomousUnitSpectrum) {
  SystemSpec spec = random_bounded(6, 2, 10, 5);
  spec.generator = GeneratorKind::Autonomous;
  spec.spectrum = std::vector<double>(6, 1.0);
  const auto ops = operators_at(spec, 3);
  EXPECT_LE(linalg::op_norm(ops.a), spec.bounds.c_a * (1 + 1e-12));
  for (const auto& ev : spectral::sorted_eigenvalues(ops.a)) EXPECT_NEAR(std::abs(ev), 1.0, 1e-10);
  EXPECT_TRUE(operators_at(spec, 7).a == ops.a);
}

TEST(OperatorsAt, AutonomousPrescribedMagnitudes) {
  SystemSpec spec = random_bounded(5, 2, 10, 6);
  spec.generator = GeneratorKind::Autonomous;
  spec.spectrum = std::vector<double>{1.5, 1.1, 0.9, 0.4, 0.2};
  const auto ev = spectral::sorted_eigenvalues(operators_at(spec, 1).a);
  for (std::size_t j = 0; j < 5; ++j) EXPECT_NEAR(std::abs(ev[j]), (*spec.spectrum)[j], 1e-10);
}

TEST(Validate, RejectsBadSpecs) {
  auto spec = random_bounded(3, 4, 10, 1);
  EXPECT_THROW(spec.validate(), Error);
  spec = random_bounded(3, 1, 0, 1);
  EXPECT_THROW(spec.validate(), Error);
  spec = random_bounded(3, 1, 10, 1);
  spec.generator = GeneratorKind::RotatedDiagonal;
  EXPECT_THROW(spec.validate(), Error);
  spec.spectrum = std::vector<double>{1.0, 0.0, 0.5};
  EXPECT_THROW(spec.validate(), Error);
  spec.spectrum = std::vector<double>{1.0, 0.5};
  EXPECT_THROW(spec.validate(), Error);
  spec = random_bounded(2, 1, 10, 1);
  spec.bounds.c_h = 0.0;
  EXPECT_THROW(spec.validate(), Error);
  spec = random_bounded(2, 1, 10, 1);
  spec.delta0 = Delta0Kind::Explicit;
  spec.delta0_explicit = Eigen::Vector2d(1.0, 0.0).asDiagonal();
  EXPECT_THROW(spec.validate(), Error);
}

SystemSpec scalar(double a, double q_obs, int horizon) {
  SystemSpec s;
  s.d = 1;
  s.q = 1;
  s.horizon = horizon;
  s.generator = GeneratorKind::ExplicitSequence;
  s.explicit_steps = {{Matrix::Constant(1, 1, a), Matrix::Ones(1, 1), Matrix::Constant(1, 1, q_obs)}};
  return s;
}

TEST(SimulateTruth, ScalarDoublingClosedForm) {
  const auto traj = simulate_truth(scalar(2.0, 1.0, 30), Vector::Ones(1), 7);
  for (int n = 0; n <= 30; ++n) EXPECT_EQ(traj.truth[static_cast<std::size_t>(n)](0), std::ldexp(1.0, n));
}

TEST(SimulateTruth, SmallNoiseLimit) {
  const auto spec = scalar(1.0, 1e-12, 20);
  const auto traj = simulate_truth(spec, Vector::Ones(1), 3);
  for (int n = 1; n <= 20; ++n) EXPECT_NEAR(traj.y(n)(0), traj.truth[static_cast<std::size_t>(n)](0), 1e-5);
}

TEST(SimulateTruth, BitIdenticalAcrossRuns) {
  SystemSpec spec;
  spec.d = 2;
  spec.q = 2;
  spec.horizon = 15;
  spec.generator = GeneratorKind::ExplicitSequence;
  spec.explicit_steps = {{Matrix::Identity(2, 2), Matrix::Identity(2, 2), Matrix::Identity(2, 2)}};
  const Vector x0 = Eigen::Vector2d(1, 0);
  const auto a = simulate_truth(spec, x0, 99);
  const auto b = simulate_truth(spec, x0, 99);
  for (int n = 1; n <= 15; ++n) EXPECT_TRUE(a.y(n) == b.y(n));
  EXPECT_FALSE(simulate_truth(spec, x0, 100).y(1) == a.y(1));
}

TEST(OperatorSource, ListMapsToSteps) {
  std::vector<StepOperators> list(3, StepOperators{0, Matrix::Identity(1, 1), Matrix::Ones(1, 1), Matrix::Ones(1, 1)});
  list[1].a(0, 0) = 2.0;
  const auto src = operator_source(list);
  EXPECT_EQ(src(2).a(0, 0), 2.0);
  EXPECT_EQ(src(2).n, 2);
  EXPECT_THROW(src(4), Error);
}

}  // namespace
}  // namespace rrank
