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

#include <algorithm>
#include <cmath>

#include "rrank/error.hpp"
#include "rrank/rng.hpp"

namespace rrank {
namespace {

enum StreamTag : std::uint32_t {
  kTagA = 1,
  kTagH = 2,
  kTagQ = 3,
  kTagRotation = 4,
  kTagAutonomous = 5,
  kTagDelta0 = 6,
  kTagNoise = 7,
  kTagInitial = 8,
  kTagSigns = 9,
};

constexpr int kMaxResamples = 50;
constexpr double kNearSingular = 1e-6;
constexpr double kBoundSlack = 1e-12;

// Q = c (W W^T / q + 0.1 I) / ||W W^T / q + 0.1 I||.
Matrix random_spd(CounterRng& rng, int dim, double bound) {
  const Matrix w = rng.gaussian(dim, dim);
  Matrix q = w * w.transpose() / dim + 0.1 * Matrix::Identity(dim, dim);
  q = linalg::symmetrize(q * (bound / linalg::op_norm(q)));
  return q;
}

Matrix random_observation(const SystemSpec& spec, std::uint64_t step) {
  CounterRng rng(spec.seed, stream_id(kTagH, step));
  const Matrix g = rng.gaussian(spec.q, spec.d);
  return g * (spec.bounds.c_h / linalg::op_norm(g));
}

Matrix random_noise_cov(const SystemSpec& spec, std::uint64_t step) {
  CounterRng rng(spec.seed, stream_id(kTagQ, step));
  return random_spd(rng, spec.q, spec.bounds.c_q);
}

Matrix random_bounded_dynamics(const SystemSpec& spec, int n) {
  // One stream per step; resamples continue along the same stream.
  CounterRng rng(spec.seed, stream_id(kTagA, static_cast<std::uint64_t>(n)));
  for (int attempt = 0; attempt < kMaxResamples; ++attempt) {
    const Matrix g = rng.gaussian(spec.d, spec.d);
    const Vector s = Eigen::JacobiSVD<Matrix>(g).singularValues();
    const double target = spec.bounds.c_a * rng.uniform(0.5, 1.0);
    if (s(s.size() - 1) >= kNearSingular * s(0)) return g * (target / s(0));
  }
  throw Error(ErrorKind::GenerationFailure,
              "random dynamics near-singular " + std::to_string(kMaxResamples) +
                  " consecutive times at step " + std::to_string(n));
}

std::vector<double> sorted_spectrum(const SystemSpec& spec) {
  std::vector<double> s = *spec.spectrum;
  std::stable_sort(s.begin(), s.end(),
                   [](double a, double b) { return std::abs(a) > std::abs(b); });
  return s;
}

const ExplicitStep& explicit_step(const SystemSpec& spec, int n) {
  const auto period = spec.explicit_steps.size();
  return spec.explicit_steps[static_cast<std::size_t>(n - 1) % period];
}

}  // namespace

const char* to_string(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::RandomBounded: return "RandomBounded";
    case GeneratorKind::RotatedDiagonal: return "RotatedDiagonal";
    case GeneratorKind::Autonomous: return "Autonomous";
    case GeneratorKind::ExplicitSequence: return "ExplicitSequence";
  }
  return "?";
}

const char* to_string(Delta0Kind kind) {
  switch (kind) {
    case Delta0Kind::Identity: return "Identity";
    case Delta0Kind::RandomSPD: return "RandomSPD";
    case Delta0Kind::Explicit: return "Explicit";
  }
  return "?";
}

void SystemSpec::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::InvalidInput, msg); };
  if (d < 1) fail("d must be >= 1");
  if (q < 1 || q > d) fail("q must satisfy 1 <= q <= d");
  if (horizon < 1) fail("horizon must be >= 1");
  if (!(bounds.c_a > 0 && bounds.c_h > 0 && bounds.c_q > 0)) fail("bounds must be positive");

  const bool needs_spectrum =
      generator == GeneratorKind::RotatedDiagonal || generator == GeneratorKind::Autonomous;
  if (needs_spectrum && !spectrum) fail(std::string(to_string(generator)) + " requires a spectrum");
  if (spectrum) {
    if (static_cast<int>(spectrum->size()) != d) fail("spectrum length must equal d");
    for (double s : *spectrum) {
      if (s == 0.0 || !std::isfinite(s)) fail("spectrum entries must be finite and non-zero");
    }
    if (generator == GeneratorKind::RotatedDiagonal) {
      const double top = std::abs(sorted_spectrum(*this).front());
      if (top > bounds.c_a * (1 + kBoundSlack)) fail("spectrum magnitude exceeds c_a");
    }
  }
  if (generator == GeneratorKind::Autonomous && !(autonomous_skew >= 0 && autonomous_skew < 1)) {
    fail("autonomous_skew must lie in [0, 1)");
  }
  if (generator == GeneratorKind::ExplicitSequence) {
    if (explicit_steps.empty()) fail("ExplicitSequence requires at least one step");
    for (const auto& s : explicit_steps) {
      if (s.a.rows() != d || s.a.cols() != d) fail("explicit A must be d x d");
      if (s.h.rows() != q || s.h.cols() != d) fail("explicit H must be q x d");
      if (s.q.rows() != q || s.q.cols() != q) fail("explicit Q must be q x q");
    }
  }
  if (delta0 == Delta0Kind::Explicit) {
    if (delta0_explicit.rows() != d || delta0_explicit.cols() != d) fail("Delta0 must be d x d");
    if (!linalg::all_finite(delta0_explicit)) fail("Delta0 has non-finite entries");
    if ((delta0_explicit - delta0_explicit.transpose()).norm() >
        linalg::tol::kSym * std::max(1.0, delta0_explicit.norm())) {
      fail("Delta0 must be symmetric");
    }
    const auto spec = linalg::sym_eig(delta0_explicit);
    if (!(spec.values.minCoeff() > 0)) fail("Delta0 must be positive definite");
  }
}

Vector rotated_diagonal(const SystemSpec& spec) {
  const auto s = sorted_spectrum(spec);
  return Eigen::Map<const Vector>(s.data(), static_cast<Eigen::Index>(s.size()));
}

Matrix rotation_at(const SystemSpec& spec, int n) {
  if (n == 0) return Matrix::Identity(spec.d, spec.d);
  CounterRng rng(spec.seed, stream_id(kTagRotation, static_cast<std::uint64_t>(n)));
  return rng.rotation(spec.d);
}

AutonomousConstruction autonomous_construction(const SystemSpec& spec) {
  if (!spec.spectrum) throw Error(ErrorKind::InvalidInput, "autonomous construction needs a spectrum");
  const auto mags = sorted_spectrum(spec);
  const int d = spec.d;
  CounterRng rng(spec.seed, stream_id(kTagAutonomous, 0));
  CounterRng signs(spec.seed, stream_id(kTagSigns, 0));
  Vector eig(d);
  for (int j = 0; j < d; ++j) eig(j) = (signs.uniform() < 0.5 ? -1.0 : 1.0) * std::abs(mags[j]);

  for (int attempt = 0; attempt < kMaxResamples; ++attempt) {
    const Matrix o = rng.rotation(d);
    Matrix e = rng.gaussian(d, d);
    e /= linalg::op_norm(e);
    const Matrix v = o * (Matrix::Identity(d, d) + spec.autonomous_skew * e);
    // A^T = V^{-T} (V D)^T, i.e. A = V D V^{-1} without an explicit inverse.
    const Matrix vd = v * eig.asDiagonal();
    Matrix a;
    try {
      a = linalg::solve(v.transpose(), vd.transpose()).transpose();
    } catch (const IllConditionedError&) {
      continue;
    }
    if (linalg::op_norm(a) <= spec.bounds.c_a) return {a, v, eig};
  }
  throw Error(ErrorKind::GenerationFailure,
              "no autonomous matrix within c_a after " + std::to_string(kMaxResamples) + " draws");
}

StepOperators operators_at(const SystemSpec& spec, int n) {
  if (n < 1 || n > spec.horizon) {
    throw Error(ErrorKind::InvalidInput,
                "step " + std::to_string(n) + " outside [1, " + std::to_string(spec.horizon) + "]");
  }
  StepOperators ops;
  ops.n = n;
  const auto step = static_cast<std::uint64_t>(n);
  switch (spec.generator) {
    case GeneratorKind::RandomBounded:
      ops.a = random_bounded_dynamics(spec, n);
      ops.h = random_observation(spec, step);
      ops.q = random_noise_cov(spec, step);
      break;
    case GeneratorKind::RotatedDiagonal:
      ops.a = rotation_at(spec, n) * rotated_diagonal(spec).asDiagonal() *
              rotation_at(spec, n - 1).transpose();
      ops.h = random_observation(spec, step);
      ops.q = random_noise_cov(spec, step);
      break;
    case GeneratorKind::Autonomous:
      ops.a = autonomous_construction(spec).a;
      ops.h = random_observation(spec, 0);
      ops.q = random_noise_cov(spec, 0);
      break;
    case GeneratorKind::ExplicitSequence: {
      const auto& s = explicit_step(spec, n);
      ops.a = s.a;
      ops.h = s.h;
      ops.q = s.q;
      break;
    }
  }
  check_operators(ops, spec.bounds);
  return ops;
}

void check_operators(const StepOperators& ops, const Bounds& bounds) {
  auto fail = [&](const std::string& msg) {
    throw Error(ErrorKind::InvalidInput, "operators at step " + std::to_string(ops.n) + ": " + msg);
  };
  if (!linalg::all_finite(ops.a) || !linalg::all_finite(ops.h) || !linalg::all_finite(ops.q)) {
    fail("non-finite entries");
  }
  const Vector sa = Eigen::JacobiSVD<Matrix>(ops.a).singularValues();
  if (!(sa(sa.size() - 1) > linalg::tol::kRank)) fail("A is singular");
  if (sa(0) > bounds.c_a * (1 + kBoundSlack)) fail("||A|| exceeds c_a");
  if (linalg::op_norm(ops.h) > bounds.c_h * (1 + kBoundSlack)) fail("||H|| exceeds c_h");
  const auto qs = linalg::sym_eig(ops.q);
  if (!(qs.values.minCoeff() > 0)) fail("Q is not positive definite");
  if (std::abs(qs.values(0)) > bounds.c_q * (1 + kBoundSlack)) fail("||Q|| exceeds c_q");
}

Matrix initial_covariance(const SystemSpec& spec) {
  switch (spec.delta0) {
    case Delta0Kind::Identity: return Matrix::Identity(spec.d, spec.d);
    case Delta0Kind::RandomSPD: {
      CounterRng rng(spec.seed, stream_id(kTagDelta0, 0));
      return random_spd(rng, spec.d, 1.0);
    }
    case Delta0Kind::Explicit: return linalg::symmetrize(spec.delta0_explicit);
  }
  return {};
}

Vector draw_initial_state(const SystemSpec& spec, const Vector& prior_mean, std::uint64_t seed) {
  CounterRng rng(seed, stream_id(kTagInitial, 0));
  const Matrix l = Eigen::LLT<Matrix>(initial_covariance(spec)).matrixL();
  return prior_mean + l * rng.gaussian(spec.d, 1);
}

Trajectory simulate_truth(const SystemSpec& spec, const Vector& x0, std::uint64_t noise_seed) {
  if (x0.size() != spec.d || !x0.allFinite()) {
    throw Error(ErrorKind::InvalidInput, "simulate_truth: x0 must be finite with length d");
  }
  Trajectory traj;
  traj.truth.reserve(static_cast<std::size_t>(spec.horizon) + 1);
  traj.observations.reserve(static_cast<std::size_t>(spec.horizon));
  traj.truth.push_back(x0);
  for (int n = 1; n <= spec.horizon; ++n) {
    const auto ops = operators_at(spec, n);
    Vector x = ops.a * traj.truth.back();
    CounterRng rng(noise_seed, stream_id(kTagNoise, static_cast<std::uint64_t>(n)));
    const Matrix l = Eigen::LLT<Matrix>(ops.q).matrixL();
    Vector y = ops.h * x + l * rng.gaussian(spec.q, 1);
    if (!x.allFinite() || !y.allFinite()) throw NumericalBlowupError(n, "truth simulation");
    traj.truth.push_back(std::move(x));
    traj.observations.push_back(std::move(y));
  }
  return traj;
}

OperatorSource operator_source(const SystemSpec& spec) {
  if (spec.generator == GeneratorKind::Autonomous) {
    // Time-invariant: build once, restamp the step index.
    const StepOperators fixed = operators_at(spec, 1);
    return [fixed, horizon = spec.horizon](int n) {
      if (n < 1 || n > horizon) {
        throw Error(ErrorKind::InvalidInput, "operator stream has no step " + std::to_string(n));
      }
      StepOperators s = fixed;
      s.n = n;
      return s;
    };
  }
  return [spec](int n) { return operators_at(spec, n); };
}

OperatorSource operator_source(std::vector<StepOperators> ops) {
  return [ops = std::move(ops)](int n) {
    if (n < 1 || n > static_cast<int>(ops.size())) {
      throw Error(ErrorKind::InvalidInput, "operator stream has no step " + std::to_string(n));
    }
    StepOperators s = ops[static_cast<std::size_t>(n - 1)];
    s.n = n;
    return s;
  };
}

}  // namespace rrank
