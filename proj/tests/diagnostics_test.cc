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

#include <gtest/gtest.h>

#include "rrank/error.hpp"
#include "rrank/lyapunov.hpp"
#include "rrank/rng.hpp"

namespace rrank::diagnostics {
namespace {

TEST(EpsEigenspace, CountsSmallEigenvalues) {
  const Matrix z = Eigen::Vector3d(1.0, 1e-7, 0.0).asDiagonal();
  EXPECT_EQ(eps_eigenspace_dim(z, 1e-6), 2);
  EXPECT_EQ(eps_eigenspace_dim(z, 1e-8), 1);
  EXPECT_EQ(eps_eigenspace_dim(-z, 1e-6), 2);
  EXPECT_THROW(eps_eigenspace_dim(z, 0.0), Error);
}

TEST(Lemma, ElementaryCases) {
  const Matrix z = Eigen::Vector2d(1.0, 1e-8).asDiagonal();
  EXPECT_TRUE(lemma_subspace_bound_check(z, Matrix::Identity(2, 2).col(1), 1e-6));
  try {
    lemma_subspace_bound_check(z, Matrix::Identity(2, 2).col(0), 1e-6);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::HypothesisFailed);
  }
}

TEST(Lemma, HoldsOnRandomInstances) {
  CounterRng rng(31, 1);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 3 + trial % 6;
    const int k = 1 + trial % (d - 1);
    const Matrix v = rng.rotation(d);
    Vector lam(d);
    for (int j = 0; j < d; ++j) lam(j) = j < k ? rng.uniform(-1e-8, 1e-8) : rng.uniform(0.5, 2.0);
    const Matrix z = v * lam.asDiagonal() * v.transpose();
    ASSERT_TRUE(lemma_subspace_bound_check(z, v.leftCols(k), 1e-6));
    ASSERT_GE(eps_eigenspace_dim(z, 1e-6), k);
  }
}

TEST(Profiles, ProjectionAndRestriction) {
  const Matrix delta = Eigen::Vector3d(3.0, 2.0, 1e-9).asDiagonal();
  const Vector p = projection_profile(delta, Matrix::Identity(3, 3));
  EXPECT_TRUE(p.isApprox(Eigen::Vector3d(3.0, 2.0, 1e-9)));
  EXPECT_NEAR(restriction_norm(delta, Matrix::Identity(3, 3).col(2)), 1e-9, 1e-24);
  EXPECT_NEAR(restriction_norm(delta, Matrix::Identity(3, 3).rightCols(2)), 2.0, 1e-15);
  EXPECT_EQ(restriction_norm(delta, Matrix(3, 0)), 0.0);
}

TEST(StableMap, DiagonalMapsPreserveCoordinateAxes) {
  const Matrix m = Eigen::Vector3d(3.0, 0.1, -2.0).asDiagonal();
  const Matrix delta0 = Eigen::Vector3d(2.0, 5.0, 1.0).asDiagonal();
  const Matrix e = Matrix::Identity(3, 3);
  EXPECT_LT(stable_map_check(m, delta0, e.rightCols(2), e.rightCols(2)), 1e-14);
  EXPECT_NEAR(stable_map_check(m, delta0, e.col(2), e.col(0)), M_PI_2, 1e-14);
}

SystemSpec pair2(int horizon) {
  SystemSpec s;
  s.d = 2;
  s.q = 2;
  s.horizon = horizon;
  s.generator = GeneratorKind::ExplicitSequence;
  s.explicit_steps = {{Eigen::Vector2d(2.0, 0.5).asDiagonal(), Matrix::Identity(2, 2), Matrix::Identity(2, 2)}};
  return s;
}

TEST(Frames, DiagonalPairReachesKnownFixedPoints) {
  const auto spec = pair2(100);
  const Vector x0 = draw_initial_state(spec, Vector::Zero(2), 1);
  const auto run = kalman::run_filter(spec, simulate_truth(spec, x0, 2));
  const auto lyap = lyapunov::qr_exponents(operator_source(spec), 100);
  ASSERT_EQ(lyap.d0, 1);
  std::vector<DiagnosticsFrame> frames;
  for (std::size_t n = 1; n < run.states.size(); ++n) {
    frames.push_back(make_frame(run.states[n], lyap.backward_basis, lyap.d0));
  }
  const auto& last = frames.back();
  EXPECT_NEAR(last.delta_eigs(0), 0.75, 1e-12);
  EXPECT_LT(last.delta_eigs(1), 1e-50);
  EXPECT_LT(last.restriction_delta, 1e-50);
  EXPECT_NEAR(last.proj_norms(0), 0.75, 1e-12);
  EXPECT_EQ(last.eps_rank_delta, 1);
  EXPECT_EQ(last.eps_rank_sigma, 1);
  // Stable coordinate: 1/Delta_n = 4/Delta_{n-1} + 1 and Sigma_n = Delta_{n-1}/4.
  int oracle = 0;
  double delta = 1.0;
  for (int n = 1; n <= 100 && oracle == 0; ++n) {
    const double sigma = delta / 4.0;
    delta = 1.0 / (4.0 / delta + 1.0);
    if (delta < kDefaultEps && sigma < kDefaultEps) oracle = n;
  }
  EXPECT_EQ(collapse_step(frames, 1), oracle);
  EXPECT_EQ(collapse_step(frames, 2), -1);
}

TEST(CollapseStep, RequiresStableSuffix) {
  std::vector<DiagnosticsFrame> frames(5);
  const int ranks[] = {0, 2, 1, 2, 2};
  for (int i = 0; i < 5; ++i) {
    frames[static_cast<std::size_t>(i)].n = i + 1;
    frames[static_cast<std::size_t>(i)].eps_rank_delta = ranks[i];
    frames[static_cast<std::size_t>(i)].eps_rank_sigma = 2;
  }
  EXPECT_EQ(collapse_step(frames, 2), 4);
  EXPECT_EQ(collapse_step(frames, 1), 2);
  EXPECT_EQ(collapse_step(frames, 3), -1);
}

}  // namespace
}  // namespace rrank::diagnostics
