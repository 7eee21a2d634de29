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

#include <cmath>

#include <gtest/gtest.h>

#include "rrank/error.hpp"
#include "rrank/rng.hpp"

namespace rrank::linalg {
namespace {

Matrix random_symmetric(CounterRng& rng, int d) {
  const Matrix g = rng.gaussian(d, d);
  return g + g.transpose();
}

TEST(SymEig, DiagonalSortsByMagnitude) {
  const Matrix z = Eigen::Vector3d(1, 2, 3).asDiagonal();
  const auto s = sym_eig(z);
  EXPECT_EQ(s.values, Eigen::Vector3d(3, 2, 1));
  Matrix expected = Matrix::Zero(3, 3);
  expected(2, 0) = expected(1, 1) = expected(0, 2) = 1.0;
  EXPECT_TRUE(s.vectors.isApprox(expected, 1e-15));
}

TEST(SymEig, IdentityHasUnitSpectrum) {
  EXPECT_TRUE(sym_eig(Matrix::Identity(4, 4)).values.isApprox(Vector::Ones(4)));
}

TEST(SymEig, ReconstructsRandomSymmetric) {
  CounterRng rng(1, 1);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix z = random_symmetric(rng, 5);
    const auto s = sym_eig(z);
    const Matrix back = s.vectors * s.values.asDiagonal() * s.vectors.transpose();
    EXPECT_LE(op_norm(z - back), 1e-12 * op_norm(z));
    for (Eigen::Index j = 0; j + 1 < 5; ++j) EXPECT_GE(std::abs(s.values(j)), std::abs(s.values(j + 1)));
    for (Eigen::Index j = 0; j < 5; ++j) {
      EXPECT_NEAR(s.vectors.col(j).norm(), 1.0, 1e-14);
      Eigen::Index imax = 0;
      s.vectors.col(j).cwiseAbs().maxCoeff(&imax);
      EXPECT_GT(s.vectors(imax, j), 0.0);
    }
  }
}

TEST(SymEig, RejectsNonFinite) {
  Matrix z = Matrix::Identity(2, 2);
  z(0, 1) = std::nan("");
  try {
    sym_eig(z);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidInput);
  }
}

TEST(Svd, DiagonalAndZero) {
  EXPECT_TRUE(svd(Eigen::Vector2d(2, 0.5).asDiagonal().toDenseMatrix()).singulars.isApprox(Eigen::Vector2d(2, 0.5)));
  EXPECT_TRUE(svd(Matrix::Zero(3, 2)).singulars.isZero(0.0));
}

TEST(Svd, SquaresMatchGramEigenvalues) {
  CounterRng rng(2, 1);
  const Matrix z = rng.gaussian(4, 3);
  const auto f = svd(z);
  const auto oracle = sym_eig(z.transpose() * z);
  for (Eigen::Index j = 0; j < 3; ++j) {
    EXPECT_NEAR(f.singulars(j) * f.singulars(j), oracle.values(j), 1e-10 * oracle.values(j));
  }
}

TEST(Svd, FactorInvariantsAcrossSizes) {
  CounterRng rng(3, 1);
  for (int d : {2, 5, 10, 30}) {
    for (int trial = 0; trial < 100; ++trial) {
      const Matrix z = rng.gaussian(d, d);
      const auto f = svd(z);
      const Matrix back = f.left * f.singulars.asDiagonal() * f.right.transpose();
      ASSERT_LE(op_norm(z - back), tol::kSvd * op_norm(z));
      ASSERT_LE(orthonormality_defect(f.left), tol::kOrth);
      ASSERT_LE(orthonormality_defect(f.right), tol::kOrth);
      for (Eigen::Index j = 0; j + 1 < d; ++j) ASSERT_GE(f.singulars(j), f.singulars(j + 1));
      ASSERT_GE(f.singulars.minCoeff(), 0.0);
    }
  }
}

TEST(PrincipalAngles, ElementaryCases) {
  const Matrix e1 = Matrix::Identity(3, 3).col(0);
  const Matrix e2 = Matrix::Identity(3, 3).col(1);
  EXPECT_EQ(principal_angles(e1, e1), std::vector<double>{0.0});
  EXPECT_NEAR(principal_angles(e1, e2)[0], M_PI_2, 1e-15);
  const Matrix diag = (e1 + e2) / std::sqrt(2.0);
  const double oracle = std::acos(e1.col(0).dot(diag.col(0)));
  EXPECT_NEAR(principal_angles(e1, diag)[0], oracle, 1e-15);
  EXPECT_NEAR(oracle, M_PI_4, 1e-15);
}

TEST(PrincipalAngles, ResolvesTinyAngles) {
  const double t = 1e-11;
  Matrix a(2, 1), b(2, 1);
  a << 1, 0;
  b << std::cos(t), std::sin(t);
  EXPECT_NEAR(principal_angles(a, b)[0], t, 1e-12 * t + 1e-24);
}

TEST(PrincipalAngles, SymmetricInArguments) {
  CounterRng rng(4, 1);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix wa = orthonormalize(rng.gaussian(7, 3));
    const Matrix wb = orthonormalize(rng.gaussian(7, 3));
    const auto ab = principal_angles(wa, wb);
    const auto ba = principal_angles(wb, wa);
    ASSERT_EQ(ab.size(), ba.size());
    for (std::size_t j = 0; j < ab.size(); ++j) ASSERT_NEAR(ab[j], ba[j], 1e-12);
    for (std::size_t j = 0; j + 1 < ab.size(); ++j) ASSERT_LE(ab[j], ab[j + 1]);
  }
}

TEST(PrincipalAngles, RejectsRowMismatchAndNonOrthonormal) {
  EXPECT_THROW(principal_angles(Matrix::Identity(3, 1), Matrix::Identity(4, 1)), Error);
  EXPECT_THROW(principal_angles(2.0 * Matrix::Identity(3, 1), Matrix::Identity(3, 1)), Error);
}

TEST(QrPositive, OrthonormalInputIsFixedPoint) {
  CounterRng rng(5, 1);
  const Matrix q0 = rng.rotation(4);
  const auto f = qr_positive(q0);
  EXPECT_TRUE(f.q.isApprox(q0, 1e-14));
  EXPECT_TRUE(f.r.isApprox(Matrix::Identity(4, 4), 1e-14));
}

TEST(QrPositive, SignConventionIsForced) {
  const auto f = qr_positive(Eigen::Vector2d(-2, 1).asDiagonal().toDenseMatrix());
  EXPECT_TRUE(f.q.isApprox(Eigen::Vector2d(-1, 1).asDiagonal().toDenseMatrix()));
  EXPECT_TRUE(f.r.isApprox(Eigen::Vector2d(2, 1).asDiagonal().toDenseMatrix()));
}

TEST(QrPositive, OrthogonalAndDeterministic) {
  CounterRng rng(6, 1);
  const Matrix z = rng.gaussian(6, 6);
  const auto f = qr_positive(z);
  EXPECT_LE((f.q.transpose() * f.q - Matrix::Identity(6, 6)).norm(), 1e-12);
  EXPECT_LE(op_norm(f.q * f.r - z), tol::kSvd * op_norm(z));
  EXPECT_GT(f.r.diagonal().minCoeff(), 0.0);
  const auto g = qr_positive(z);
  EXPECT_TRUE(f.q == g.q && f.r == g.r);
}

TEST(QrPositive, ReportsDeficientColumn) {
  Matrix z(3, 3);
  z << 1, 2, 0, 1, 2, 1, 1, 2, 2;
  try {
    qr_positive(z);
    FAIL();
  } catch (const RankDeficientError& e) {
    EXPECT_EQ(e.column(), 1);
    EXPECT_EQ(e.kind(), ErrorKind::RankDeficient);
  }
}

TEST(Solve, ElementaryCases) {
  CounterRng rng(7, 1);
  const Matrix b = rng.gaussian(3, 2);
  EXPECT_EQ(solve(Matrix::Identity(3, 3), b), b);
  EXPECT_TRUE(solve(Eigen::Vector2d(2, 4).asDiagonal().toDenseMatrix(), Matrix::Identity(2, 2))
                  .isApprox(Eigen::Vector2d(0.5, 0.25).asDiagonal().toDenseMatrix()));
}

TEST(Solve, AgreesWithExplicitInverseOnSpd) {
  CounterRng rng(8, 1);
  const Matrix g = rng.gaussian(8, 8);
  const Matrix spd = g * g.transpose() + Matrix::Identity(8, 8);
  const Matrix b = rng.gaussian(8, 3);
  const Matrix oracle = spd.inverse() * b;
  const Matrix x = solve(spd, b);
  EXPECT_LE((x - oracle).norm(), 1e-10 * oracle.norm());
  EXPECT_LE(op_norm(spd * x - b), tol::kSolve * op_norm(spd) * op_norm(x));
}

TEST(Solve, RejectsIllConditioned) {
  const Matrix z = Eigen::Vector2d(1, 1e-14).asDiagonal();
  try {
    solve(z, Matrix::Identity(2, 2));
    FAIL();
  } catch (const IllConditionedError& e) {
    EXPECT_GT(e.estimate(), tol::kMaxCondition);
  }
}

TEST(GradedSingularValues, MatchesDenseSvdWhenRepresentable) {
  CounterRng rng(9, 1);
  const Vector a = Eigen::Vector4d(3.0, 1.0, -2.0, -5.0);
  Matrix u = rng.gaussian(4, 4).triangularView<Eigen::Upper>();
  u.diagonal() = Vector::Ones(4);
  const Matrix g = a.array().exp().matrix().asDiagonal() * u;
  const Vector oracle = Eigen::JacobiSVD<Matrix>(g).singularValues().array().log();
  const Vector got = graded_log_singular_values(a, u);
  EXPECT_LE((got - oracle).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(GradedSingularValues, HandlesScalesBeyondDoubleRange) {
  Matrix u = Matrix::Identity(3, 3);
  u(0, 1) = 0.3;
  u(1, 2) = -0.7;
  const Vector a = Eigen::Vector3d(2000.0, 0.0, -2000.0);
  const Vector got = graded_log_singular_values(a, u);
  // Leading singular values follow the wedge norms of the leading rows.
  const Vector r0 = u.row(0).transpose();
  const Vector r1 = u.row(1).transpose();
  const double w1 = r0.norm();
  const double w2 = std::sqrt(r0.squaredNorm() * r1.squaredNorm() - std::pow(r0.dot(r1), 2));
  EXPECT_NEAR(got(0), 2000.0 + std::log(w1), 1e-9);
  EXPECT_NEAR(got(1), std::log(w2 / w1), 1e-9);
  EXPECT_NEAR(got(2), -2000.0 - std::log(w2), 1e-9);
}

TEST(LogAbsDet, MatchesProductOfDiagonal) {
  const Matrix z = Eigen::Vector3d(-2, 3, 0.5).asDiagonal();
  EXPECT_NEAR(log_abs_det(z), std::log(3.0), 1e-15);
}

}  // namespace
}  // namespace rrank::linalg
