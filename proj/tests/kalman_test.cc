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
#include "rrank/kalman.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "rrank/error.hpp"
#include "rrank/rng.hpp"

namespace rrank::kalman {
namespace {

SystemSpec explicit_system(const Matrix& a, const Matrix& h, const Matrix& q, int horizon) {
  SystemSpec s;
  s.d = static_cast<int>(a.rows());
  s.q = static_cast<int>(h.rows());
  s.horizon = horizon;
  s.generator = GeneratorKind::ExplicitSequence;
  s.explicit_steps = {{a, h, q}};
  return s;
}

SystemSpec random_system(int d, int q, int horizon, std::uint64_t seed) {
  SystemSpec s;
  s.d = d;
  s.q = q;
  s.horizon = horizon;
  s.seed = seed;
  s.delta0 = Delta0Kind::RandomSPD;
  return s;
}

FilterRun run(const SystemSpec& spec, std::uint64_t seed, const FilterOptions& options = {}) {
  const Vector x0 = draw_initial_state(spec, Vector::Zero(spec.d), seed);
  return run_filter(spec, simulate_truth(spec, x0, seed + 1), options);
}

// Scalar recursion Sigma = a^2 Delta, Delta = Sigma r / (Sigma + r).
std::vector<double> scalar_oracle(double a, double r, double delta0, int steps) {
  std::vector<double> out{delta0};
  for (int n = 1; n <= steps; ++n) {
    const double sigma = a * a * out.back();
    out.push_back(sigma * r / (sigma + r));
  }
  return out;
}

TEST(Filter, ScalarUnstableFollowsRecursionAndFixedPoint) {
  const auto spec = explicit_system(Matrix::Constant(1, 1, 2.0), Matrix::Ones(1, 1), Matrix::Ones(1, 1), 60);
  const auto r = run(spec, 1);
  const auto oracle = scalar_oracle(2.0, 1.0, 1.0, 60);
  for (int n = 0; n <= 60; ++n) {
    EXPECT_NEAR(r.states[static_cast<std::size_t>(n)].delta(0, 0), oracle[static_cast<std::size_t>(n)], 1e-14);
  }
  EXPECT_NEAR(r.states.back().delta(0, 0), 0.75, 1e-12);
  EXPECT_NEAR(r.states.back().sigma(0, 0), 3.0, 1e-12);
}

TEST(Filter, ScalarStableCollapsesToZero) {
  const auto spec = explicit_system(Matrix::Constant(1, 1, 0.5), Matrix::Ones(1, 1), Matrix::Ones(1, 1), 60);
  const auto r = run(spec, 2);
  EXPECT_LT(r.states.back().delta(0, 0), 1e-30);
  EXPECT_GE(r.states.back().delta(0, 0), 0.0);
}

TEST(Filter, ForecastAndAnalysisMatchTextbookFormulas) {
  CounterRng rng(3, 1);
  StepOperators ops{1, rng.gaussian(4, 4), rng.gaussian(2, 4), Matrix::Identity(2, 2)};
  const Matrix g = rng.gaussian(4, 4);
  const Matrix delta0 = g * g.transpose() + Matrix::Identity(4, 4);
  const auto prev = initial_state(delta0, Vector::Ones(4), 2);
  const auto fc = forecast(prev, ops);
  EXPECT_TRUE(fc.sigma.isApprox(ops.a * delta0 * ops.a.transpose(), 1e-13));
  const Vector y = rng.gaussian(2, 1);
  const auto s = analyze(fc, ops, y);
  const Matrix innov = ops.h * fc.sigma * ops.h.transpose() + ops.q;
  const Matrix k = fc.sigma * ops.h.transpose() * innov.inverse();
  EXPECT_TRUE(s.gain.isApprox(k, 1e-10));
  EXPECT_TRUE(s.delta.isApprox((Matrix::Identity(4, 4) - k * ops.h) * fc.sigma, 1e-10));
  EXPECT_TRUE(s.x_a.isApprox(fc.x_f + k * (y - ops.h * fc.x_f), 1e-10));
  EXPECT_LE(s.gain_identity_residual, kGainIdentityTol);
  EXPECT_LE(s.joseph_residual, kJosephTol);
}

TEST(Filter, DegenerateInnovationIsReported) {
  StepOperators ops{1, Matrix::Identity(2, 2), Matrix::Zero(1, 2), Matrix::Zero(1, 1)};
  const auto prev = initial_state(Matrix::Identity(2, 2), Vector::Zero(2), 1);
  try {
    analyze(forecast(prev, ops), ops, Vector::Zero(1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateInnovation);
  }
}

TEST(Filter, GainIdentityAndCovarianceInvariantsOnRandomSystems) {
  for (int d : {2, 5, 10}) {
    const auto spec = random_system(d, std::max(1, d / 3), 80, 40 + static_cast<std::uint64_t>(d));
    const auto r = run(spec, 5);
    EXPECT_LE(r.max_gain_identity_residual, kGainIdentityTol);
    EXPECT_LE(r.max_joseph_residual, kJosephTol);
    for (const auto& s : r.states) {
      EXPECT_LE(linalg::op_norm(s.delta), linalg::op_norm(s.sigma) * (1 + 1e-10) + 1e-10);
    }
  }
}

TEST(Closure, FactorizationReproducesFilterCovariance) {
  for (int d : {2, 5, 10}) {
    const auto spec = random_system(d, 2, kFactorMaxSteps, 7 + static_cast<std::uint64_t>(d));
    FilterOptions opt;
    for (int n = 0; n <= kFactorMaxSteps; ++n) opt.snapshot_steps.push_back(n);
    const auto r = run(spec, 8, opt);
    const Matrix delta0 = initial_covariance(spec);
    for (int n = 1; n <= kFactorMaxSteps; ++n) {
      const Matrix& exact = r.states[static_cast<std::size_t>(n)].delta;
      const Matrix fact = factorized_delta(r.snapshots.at(n), delta0, n);
      EXPECT_LE(linalg::op_norm(fact - exact), 1e-8 * linalg::op_norm(exact)) << "d=" << d << " n=" << n;
    }
  }
}

TEST(Closure, DensePropagatorMatchesProduct) {
  const auto spec = random_system(4, 2, 10, 21);
  FilterOptions opt;
  opt.snapshot_steps = {10};
  const auto r = run(spec, 22, opt);
  Matrix b = Matrix::Identity(4, 4);
  Matrix m = Matrix::Identity(4, 4);
  for (int n = 1; n <= 10; ++n) {
    const auto ops = operators_at(spec, n);
    b = ops.a * b;
    m = (Matrix::Identity(4, 4) - r.states[static_cast<std::size_t>(n)].gain * ops.h) * ops.a * m;
  }
  const auto& acc = r.snapshots.at(10);
  EXPECT_LE(linalg::op_norm(dense_propagator(acc) - b), 1e-12 * linalg::op_norm(b));
  EXPECT_LE(linalg::op_norm(acc.m - m), 1e-12 * std::max(1.0, linalg::op_norm(m)));
}

TEST(Closure, FactorizationRangeIsEnforced) {
  auto acc = ClosureAccumulator::identity(2);
  EXPECT_THROW(factorized_delta(acc, Matrix::Identity(2, 2), 1), Error);
  acc.n = kFactorMaxSteps + 1;
  try {
    factorized_delta(acc, Matrix::Identity(2, 2), acc.n);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::OutOfValidatedRange);
  }
}

TEST(Closure, UnobservedGrowthTripsGuard) {
  Matrix h(1, 2);
  h << 1, 0;
  auto spec = explicit_system(Eigen::Vector2d(2, 10).asDiagonal(), h, Matrix::Ones(1, 1), 20);
  spec.bounds.c_a = 10.0;
  try {
    run(spec, 9);
    FAIL();
  } catch (const NumericalBlowupError& e) {
    ASSERT_TRUE(e.step().has_value());
    EXPECT_EQ(*e.step(), 9);
  }
}

TEST(Filter, RunIsBitReproducible) {
  const auto spec = random_system(5, 2, 40, 77);
  const auto a = run(spec, 3);
  const auto b = run(spec, 3);
  for (std::size_t n = 0; n < a.states.size(); ++n) {
    ASSERT_TRUE(a.states[n].delta == b.states[n].delta);
    ASSERT_TRUE(a.states[n].x_a == b.states[n].x_a);
  }
}

TEST(TailSlope, LinearAndConstantSeries) {
  std::vector<double> lin;
  for (int i = 0; i < 20; ++i) lin.push_back(3.0 * i - 1.0);
  EXPECT_NEAR(tail_slope(lin), 3.0, 1e-12);
  EXPECT_EQ(tail_slope(std::vector<double>(10, 2.0)), 0.0);
  EXPECT_EQ(tail_slope({1.0}), 0.0);
}

}  // namespace
}  // namespace rrank::kalman
