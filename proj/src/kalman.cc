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

#include <algorithm>
#include <cmath>
#include <string>

#include "rrank/error.hpp"

namespace rrank::kalman {
namespace {

double relative(double num, double den) { return den > 0 ? num / den : num; }

// what() without the "<kind>: " prefix added by Error.
std::string bare_message(const Error& e) {
  const std::string what = e.what();
  const std::string prefix = std::string(to_string(e.kind())) + ": ";
  return what.rfind(prefix, 0) == 0 ? what.substr(prefix.size()) : what;
}

[[noreturn]] void rethrow_at_step(const Error& e, int n) {
  if (const auto* blowup = dynamic_cast<const NumericalBlowupError*>(&e)) {
    if (blowup->step()) throw *blowup;
    throw NumericalBlowupError(n, bare_message(e));
  }
  throw Error(e.kind(), "step " + std::to_string(n) + ": " + bare_message(e));
}

}  // namespace

ClosureAccumulator ClosureAccumulator::identity(int d) {
  return {0, Matrix::Identity(d, d), Matrix::Identity(d, d), Vector::Zero(d),
          Matrix::Identity(d, d)};
}

FilterState initial_state(const Matrix& delta0, const Vector& prior_mean, int q) {
  FilterState s;
  s.n = 0;
  s.x_f = prior_mean;
  s.x_a = prior_mean;
  s.sigma = linalg::symmetrize(delta0);
  s.delta = s.sigma;
  s.gain = Matrix::Zero(delta0.rows(), q);
  return s;
}

Forecast forecast(const FilterState& prev, const StepOperators& ops) {
  Forecast fc{ops.a * prev.x_a, linalg::symmetrize(ops.a * prev.delta * ops.a.transpose())};
  if (!fc.x_f.allFinite() || !linalg::all_finite(fc.sigma)) {
    throw NumericalBlowupError(ops.n, "forecast");
  }
  return fc;
}

FilterState analyze(const Forecast& fc, const StepOperators& ops, const Vector& y) {
  const Matrix& h = ops.h;
  const Eigen::Index d = fc.sigma.rows();
  const Matrix innovation = linalg::symmetrize(h * fc.sigma * h.transpose() + ops.q);
  Eigen::LLT<Matrix> llt(innovation);
  if (llt.info() != Eigen::Success || !(llt.matrixL().toDenseMatrix().diagonal().minCoeff() > 0)) {
    throw Error(ErrorKind::DegenerateInnovation,
                "innovation covariance not positive definite at step " + std::to_string(ops.n));
  }

  FilterState s;
  s.n = ops.n;
  s.x_f = fc.x_f;
  s.sigma = fc.sigma;
  // S K^T = H Sigma since both S and Sigma are symmetric.
  s.gain = linalg::solve(innovation, h * fc.sigma).transpose();

  const Matrix i_kh = Matrix::Identity(d, d) - s.gain * h;
  s.delta = linalg::symmetrize(i_kh * fc.sigma * i_kh.transpose() +
                               s.gain * ops.q * s.gain.transpose());
  s.x_a = fc.x_f + s.gain * (y - h * fc.x_f);
  if (!s.x_a.allFinite() || !linalg::all_finite(s.delta) || !linalg::all_finite(s.gain)) {
    throw NumericalBlowupError(ops.n, "analysis");
  }

  const Matrix plain = i_kh * fc.sigma;
  s.joseph_residual = relative(linalg::op_norm(s.delta - plain), linalg::op_norm(s.delta));

  const Matrix gain_from_delta = linalg::solve(ops.q, h * s.delta).transpose();
  s.gain_identity_residual =
      relative(linalg::op_norm(s.gain - gain_from_delta), linalg::op_norm(s.gain));
  return s;
}

void check_state(const FilterState& state) {
  auto fail = [&](const std::string& msg) {
    throw Error(ErrorKind::InvariantViolation, "step " + std::to_string(state.n) + ": " + msg);
  };
  for (const Matrix* cov : {&state.sigma, &state.delta}) {
    const double norm = linalg::op_norm(*cov);
    if ((*cov - cov->transpose()).norm() > linalg::tol::kSym * std::max(norm, 1e-300)) {
      fail("covariance not symmetric");
    }
    const auto spec = linalg::sym_eig(*cov);
    if (spec.values.minCoeff() < -kPsdTol * norm) fail("covariance not positive semidefinite");
  }
  const double sigma_norm = linalg::op_norm(state.sigma);
  if (linalg::op_norm(state.delta) > sigma_norm * (1 + kPsdTol) + kPsdTol) {
    fail("analysis covariance exceeds forecast covariance in norm");
  }
  if (state.gain_identity_residual > kGainIdentityTol) {
    fail("gain identity residual " + std::to_string(state.gain_identity_residual));
  }
}

ClosureAccumulator step_closure(const ClosureAccumulator& acc, const StepOperators& ops,
                                const Matrix& gain) {
  const Eigen::Index d = acc.m.rows();
  ClosureAccumulator next;
  next.n = acc.n + 1;
  next.m = (Matrix::Identity(d, d) - gain * ops.h) * ops.a * acc.m;
  if (!linalg::all_finite(next.m) || linalg::op_norm(next.m) > kMaxClosureNorm) {
    throw NumericalBlowupError(next.n, "||M_n|| exceeds " + std::to_string(kMaxClosureNorm));
  }

  const auto qr = linalg::qr_positive(ops.a * acc.b_q);
  next.b_q = qr.q;
  next.b_logr = acc.b_logr + qr.r.diagonal().array().log().matrix();

  // diag(e^{L'}) U' = R diag(e^{L}) U, so U' = T U with
  // T(i, j) = R(i, j) / R(i, i) * e^{L_j - L_i}.
  Matrix t = Matrix::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i; j < d; ++j) {
      if (j != i && qr.r(i, j) == 0.0) continue;
      const double gap = acc.b_logr(j) - acc.b_logr(i);
      if (gap > 700.0) throw NumericalBlowupError(next.n, "propagator remainder overflow");
      t(i, j) = qr.r(i, j) / qr.r(i, i) * std::exp(gap);
    }
  }
  next.b_r = (t * acc.b_r).triangularView<Eigen::Upper>();
  return next;
}

Matrix dense_propagator(const ClosureAccumulator& acc) {
  if (acc.n > kFactorMaxSteps) {
    throw Error(ErrorKind::OutOfValidatedRange,
                "dense propagator requested at step " + std::to_string(acc.n) + " > " +
                    std::to_string(kFactorMaxSteps));
  }
  return acc.b_q * acc.b_logr.array().exp().matrix().asDiagonal() * acc.b_r;
}

Matrix factorized_delta(const ClosureAccumulator& acc, const Matrix& delta0, int n) {
  if (n > kFactorMaxSteps) {
    throw Error(ErrorKind::OutOfValidatedRange,
                "factorized covariance requested at step " + std::to_string(n));
  }
  if (n != acc.n) {
    throw Error(ErrorKind::InvalidInput, "accumulator is at step " + std::to_string(acc.n) +
                                             ", not " + std::to_string(n));
  }
  return acc.m * delta0 * dense_propagator(acc).transpose();
}

FilterRun run_filter(const SystemSpec& spec, const Trajectory& traj, const FilterOptions& options) {
  spec.validate();
  return run_filter(operator_source(spec), spec.horizon, initial_covariance(spec), traj, options);
}

FilterRun run_filter(const OperatorSource& ops, int horizon, const Matrix& delta0,
                     const Trajectory& traj, const FilterOptions& options) {
  if (static_cast<int>(traj.observations.size()) < horizon || traj.truth.empty()) {
    throw Error(ErrorKind::InvalidInput, "trajectory shorter than the horizon");
  }
  const auto d = static_cast<int>(delta0.rows());
  const auto q = static_cast<int>(traj.observations.front().size());
  FilterRun run;
  FilterState state = initial_state(delta0, Vector::Zero(d), q);
  ClosureAccumulator acc = ClosureAccumulator::identity(d);
  if (options.keep_states) run.states.push_back(state);
  auto wants_snapshot = [&](int n) {
    return std::find(options.snapshot_steps.begin(), options.snapshot_steps.end(), n) !=
           options.snapshot_steps.end();
  };
  if (wants_snapshot(0)) run.snapshots.emplace(0, acc);

  for (int n = 1; n <= horizon; ++n) {
    try {
      const StepOperators step = ops(n);
      state = analyze(forecast(state, step), step, traj.y(n));
      check_state(state);
      if (options.enforce_joseph && state.joseph_residual > kJosephTol) {
        throw Error(ErrorKind::InvariantViolation,
                    "Joseph and plain updates differ by " + std::to_string(state.joseph_residual));
      }
      acc = step_closure(acc, step, state.gain);
    } catch (const Error& e) {
      rethrow_at_step(e, n);
    }
    run.max_gain_identity_residual =
        std::max(run.max_gain_identity_residual, state.gain_identity_residual);
    run.max_joseph_residual = std::max(run.max_joseph_residual, state.joseph_residual);
    if (options.on_step) options.on_step(state, acc);
    if (wants_snapshot(n)) run.snapshots.emplace(n, acc);
    if (options.keep_states) run.states.push_back(state);
  }
  return run;
}

double tail_slope(const std::vector<double>& series) {
  const std::size_t start = series.size() / 2;
  const std::size_t count = series.size() - start;
  if (count < 2) return 0.0;
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (std::size_t i = start; i < series.size(); ++i) {
    mean_x += static_cast<double>(i);
    mean_y += series[i];
  }
  mean_x /= static_cast<double>(count);
  mean_y /= static_cast<double>(count);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = start; i < series.size(); ++i) {
    const double dx = static_cast<double>(i) - mean_x;
    sxy += dx * (series[i] - mean_y);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

}  // namespace rrank::kalman
