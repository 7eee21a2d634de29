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
#include "rrank/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "rrank/diagnostics.hpp"
#include "rrank/error.hpp"
#include "rrank/kalman.hpp"
#include "rrank/rng.hpp"

namespace rrank::spectral {
namespace {

constexpr std::uint64_t kPowerSeed = 0x5eed0f0e7;
constexpr std::uint32_t kTagPowerStart = 10;

double block_magnitude(const Matrix& t, Eigen::Index s, int size) {
  if (size == 1) return std::abs(t(s, s));
  return std::sqrt(std::abs(t.block(s, s, 2, 2).determinant()));
}

// Rotates a 2x2 diagonal block with real eigenvalues to upper-triangular form.
void split_real_pair(Matrix& t, Matrix& q, Eigen::Index s) {
  const double a = t(s, s), b = t(s, s + 1), c = t(s + 1, s), d = t(s + 1, s + 1);
  const double half_tr = 0.5 * (a + d);
  const double disc = std::sqrt(std::max(0.0, half_tr * half_tr - (a * d - b * c)));
  const double lambda = half_tr + (half_tr >= 0 ? disc : -disc);
  Eigen::Vector2d v(b, lambda - a);
  if (v.norm() < std::abs(lambda - d) + std::abs(c)) v = Eigen::Vector2d(lambda - d, c);
  v.normalize();
  Matrix g(2, 2);
  g << v(0), -v(1), v(1), v(0);
  t.middleRows(s, 2) = g.transpose() * t.middleRows(s, 2);
  t.middleCols(s, 2) = t.middleCols(s, 2) * g;
  q.middleCols(s, 2) = q.middleCols(s, 2) * g;
  t(s + 1, s) = 0.0;
}

// Exchanges adjacent diagonal blocks of sizes p (at s) and r (at s + p).
void swap_blocks(Matrix& t, Matrix& q, Eigen::Index s, int p, int r) {
  const Eigen::Index m = p + r;
  const Matrix a11 = t.block(s, s, p, p);
  const Matrix a22 = t.block(s + p, s + p, r, r);
  const Matrix a12 = t.block(s, s + p, p, r);

  // A11 X - X A22 = -A12 in Kronecker form; [X; I] then spans the
  // invariant subspace belonging to A22.
  Matrix kron = Matrix::Zero(p * r, p * r);
  for (int j = 0; j < r; ++j) {
    for (int l = 0; l < r; ++l) {
      auto blk = kron.block(j * p, l * p, p, p);
      if (j == l) blk += a11;
      blk -= a22(l, j) * Matrix::Identity(p, p);
    }
  }
  const Vector rhs = -Eigen::Map<const Vector>(Matrix(a12).data(), p * r);
  const Vector x = kron.fullPivLu().solve(rhs);

  Matrix z(m, r);
  z.topRows(p) = Eigen::Map<const Matrix>(x.data(), p, r);
  z.bottomRows(r) = Matrix::Identity(r, r);
  const Eigen::HouseholderQR<Matrix> qr(z);
  const Matrix qf = qr.householderQ() * Matrix::Identity(m, m);

  t.middleRows(s, m) = qf.transpose() * t.middleRows(s, m);
  t.middleCols(s, m) = t.middleCols(s, m) * qf;
  q.middleCols(s, m) = q.middleCols(s, m) * qf;
  t.block(s + r, s, p, r).setZero();
}

// Q diag(e^logr) U tracks A^n Q0 with U unit upper triangular.
class ScaledPower {
 public:
  explicit ScaledPower(const Matrix& a) : a_(a) {
    const Eigen::Index d = a.rows();
    CounterRng rng(kPowerSeed, stream_id(kTagPowerStart, static_cast<std::uint64_t>(d)));
    q_ = rng.rotation(d);
    logr_ = Vector::Zero(d);
    u_ = Matrix::Identity(d, d);
  }

  void step() {
    const Eigen::Index d = a_.rows();
    const auto qr = linalg::qr_positive(a_ * q_);
    Matrix t = Matrix::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = i; j < d; ++j) {
        if (j != i && qr.r(i, j) == 0.0) continue;
        const double gap = logr_(j) - logr_(i);
        if (gap > 700.0) throw NumericalBlowupError(n_ + 1, "power remainder overflow");
        t(i, j) = qr.r(i, j) / qr.r(i, i) * std::exp(gap);
      }
    }
    q_ = qr.q;
    logr_ += qr.r.diagonal().array().log().matrix();
    u_ = (t * u_).triangularView<Eigen::Upper>();
    ++n_;
  }

  int n() const { return n_; }
  const Matrix& basis() const { return q_; }
  Vector log_singular_values() const { return linalg::graded_log_singular_values(logr_, u_); }

 private:
  Matrix a_;
  Matrix q_;
  Vector logr_;
  Matrix u_;
  int n_ = 0;
};

std::vector<int> checked_sorted(std::vector<int> n_values, int cap) {
  for (int n : n_values) {
    if (n < 1) throw Error(ErrorKind::InvalidInput, "power exponents must be >= 1");
    if (cap > 0 && n > cap) {
      throw Error(ErrorKind::OutOfValidatedRange,
                  "power " + std::to_string(n) + " exceeds " + std::to_string(cap));
    }
  }
  std::sort(n_values.begin(), n_values.end());
  n_values.erase(std::unique(n_values.begin(), n_values.end()), n_values.end());
  return n_values;
}

// Rooted log-singular values of a^n at each requested n (sorted ascending).
std::vector<Vector> rooted_powers(const Matrix& a, const std::vector<int>& sorted_n) {
  ScaledPower power(a);
  std::vector<Vector> out;
  for (int n : sorted_n) {
    while (power.n() < n) power.step();
    out.push_back((power.log_singular_values() / n).array().exp().matrix());
  }
  return out;
}

}  // namespace

SchurForm real_schur(const Matrix& z) {
  if (z.rows() != z.cols()) throw Error(ErrorKind::InvalidInput, "real_schur: not square");
  if (!linalg::all_finite(z)) throw Error(ErrorKind::InvalidInput, "real_schur: non-finite input");
  const Eigen::RealSchur<Matrix> schur(z);
  if (schur.info() != Eigen::Success) {
    throw Error(ErrorKind::InvalidInput, "real_schur: QR iteration did not converge");
  }
  SchurForm form{schur.matrixU(), schur.matrixT(), {}};
  const Eigen::Index d = z.rows();
  for (Eigen::Index i = 0; i < d;) {
    if (i + 1 < d && form.t(i + 1, i) != 0.0) {
      const Matrix blk = form.t.block(i, i, 2, 2);
      const double half_tr = 0.5 * blk.trace();
      if (half_tr * half_tr - blk.determinant() >= 0.0) {
        split_real_pair(form.t, form.q, i);
        form.block_sizes.push_back(1);
        ++i;
        continue;
      }
      form.block_sizes.push_back(2);
      i += 2;
    } else {
      form.block_sizes.push_back(1);
      ++i;
    }
  }
  return form;
}

int order_schur(SchurForm& form, double alpha) {
  struct Block {
    int size;
    bool selected;
  };
  std::vector<Block> blocks;
  Eigen::Index s = 0;
  int count = 0;
  for (int size : form.block_sizes) {
    const bool sel = block_magnitude(form.t, s, size) < alpha;
    blocks.push_back({size, sel});
    if (sel) count += size;
    s += size;
  }
  // Bubble selected blocks upward, one adjacent exchange at a time.
  for (bool moved = true; moved;) {
    moved = false;
    Eigen::Index start = 0;
    for (std::size_t b = 0; b + 1 < blocks.size(); ++b) {
      if (!blocks[b].selected && blocks[b + 1].selected) {
        swap_blocks(form.t, form.q, start, blocks[b].size, blocks[b + 1].size);
        std::swap(blocks[b], blocks[b + 1]);
        moved = true;
      }
      start += blocks[b].size;
    }
  }
  form.block_sizes.clear();
  for (const auto& b : blocks) form.block_sizes.push_back(b.size);
  return count;
}

std::vector<std::complex<double>> sorted_eigenvalues(const Matrix& a) {
  const Eigen::EigenSolver<Matrix> es(a, false);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::InvalidInput, "eigen-solver failed");
  std::vector<std::complex<double>> ev(es.eigenvalues().data(),
                                       es.eigenvalues().data() + es.eigenvalues().size());
  std::stable_sort(ev.begin(), ev.end(),
                   [](auto x, auto y) { return std::abs(x) > std::abs(y); });
  return ev;
}

Matrix stable_space(const Matrix& a, double alpha) {
  if (!(alpha > 0)) throw Error(ErrorKind::InvalidInput, "alpha must be positive");
  for (const auto& ev : sorted_eigenvalues(a)) {
    if (std::abs(std::abs(ev) - alpha) < kGapTolerance) {
      throw Error(ErrorKind::SpectralGapViolation,
                  "eigenvalue magnitude " + std::to_string(std::abs(ev)) + " within " +
                      std::to_string(kGapTolerance) + " of alpha");
    }
  }
  SchurForm form = real_schur(a.transpose());
  const int k = order_schur(form, alpha);
  return form.q.leftCols(k);
}

AutonomousAnalysis analyze_autonomous(const Matrix& a) {
  AutonomousAnalysis out;
  out.a = a;
  const auto ev = sorted_eigenvalues(a);
  out.eig_mags.resize(static_cast<Eigen::Index>(ev.size()));
  for (std::size_t j = 0; j < ev.size(); ++j) out.eig_mags(static_cast<Eigen::Index>(j)) = std::abs(ev[j]);
  out.stable_space_at = stable_space(a, 1.0);
  out.d0 = static_cast<int>(a.rows() - out.stable_space_at.cols());
  return out;
}

Matrix similarity(const Matrix& v, const Matrix& j) {
  // A^T = V^{-T} (V J)^T.
  return linalg::solve(v.transpose(), (v * j).transpose()).transpose();
}

Matrix jordan_block(std::complex<double> lambda, int k) {
  if (k < 1) throw Error(ErrorKind::InvalidInput, "Jordan block size must be >= 1");
  if (lambda.imag() == 0.0) {
    Matrix j = lambda.real() * Matrix::Identity(k, k);
    for (int i = 0; i + 1 < k; ++i) j(i, i + 1) = 1.0;
    return j;
  }
  Matrix j = Matrix::Zero(2 * k, 2 * k);
  Matrix c(2, 2);
  c << lambda.real(), -lambda.imag(), lambda.imag(), lambda.real();
  for (int i = 0; i < k; ++i) {
    j.block(2 * i, 2 * i, 2, 2) = c;
    if (i + 1 < k) j.block(2 * i, 2 * i + 2, 2, 2) = Matrix::Identity(2, 2);
  }
  return j;
}

std::vector<PowerSpectrum> ef_eigenvalue_convergence(const Matrix& a,
                                                     const std::vector<int>& n_values) {
  if (a.rows() != a.cols()) throw Error(ErrorKind::InvalidInput, "A must be square");
  const auto sorted_n = checked_sorted(n_values, kPowMax);
  const auto rooted = rooted_powers(a, sorted_n);
  std::vector<PowerSpectrum> out;
  for (std::size_t i = 0; i < sorted_n.size(); ++i) out.push_back({sorted_n[i], rooted[i]});
  return out;
}

JordanBlockProbe jordan_probe(std::complex<double> lambda, int k,
                              const std::vector<int>& n_values) {
  if (k < 1 || k > kJordanMaxSize) {
    throw Error(ErrorKind::InvalidInput, "Jordan probe size must be in [1, 6]");
  }
  const double mag = std::abs(lambda);
  if (mag != 0.0 && (mag < 1e-3 || mag > 1e3)) {
    throw Error(ErrorKind::InvalidInput, "|lambda| must be 0 or within [1e-3, 1e3]");
  }
  JordanBlockProbe probe;
  probe.lambda = lambda;
  probe.k = k;
  probe.n_values = checked_sorted(n_values, 0);
  probe.measured = Matrix::Zero(k, static_cast<Eigen::Index>(probe.n_values.size()));
  const Matrix j = jordan_block(lambda, k);

  if (mag == 0.0) {
    // Nilpotent block: integer powers are exact.
    for (std::size_t c = 0; c < probe.n_values.size(); ++c) {
      const int n = probe.n_values[c];
      Matrix p = Matrix::Identity(k, k);
      for (int i = 0; i < std::min(n, k); ++i) p = p * j;
      const Vector sv = Eigen::JacobiSVD<Matrix>(p).singularValues();
      for (int r = 0; r < k; ++r) probe.measured(r, c) = std::pow(sv(r), 1.0 / n);
    }
    return probe;
  }

  const auto rooted = rooted_powers(j, probe.n_values);
  const int stride = lambda.imag() == 0.0 ? 1 : 2;  // realified singular values come in pairs
  for (std::size_t c = 0; c < rooted.size(); ++c) {
    for (int r = 0; r < k; ++r) probe.measured(r, c) = rooted[c](r * stride);
  }
  return probe;
}

EigenspaceComparison eigenspace_equality_check(const Matrix& a, double alpha, int n) {
  if (n < 1 || n > kPowMax) {
    throw Error(ErrorKind::OutOfValidatedRange, "power outside [1, " + std::to_string(kPowMax) + "]");
  }
  const Matrix target = stable_space(a, alpha);
  ScaledPower power(a);
  while (power.n() < n) power.step();
  EigenspaceComparison out;
  out.n = n;
  out.stable_dim = static_cast<int>(target.cols());
  out.angle = linalg::max_principal_angle(power.basis().rightCols(target.cols()), target);
  return out;
}

NullspaceReport nullspace_profile(const Matrix& a, const Matrix& delta) {
  const Eigen::Index d = a.rows();
  const AutonomousAnalysis analysis = analyze_autonomous(a);
  NullspaceReport report;
  report.eig_mags = analysis.eig_mags;
  report.d0 = analysis.d0;
  report.stable_dim = static_cast<int>(analysis.stable_space_at.cols());
  report.final_delta = delta;
  report.restriction = diagnostics::restriction_norm(delta, analysis.stable_space_at);

  const Eigen::EigenSolver<Matrix> es(a.transpose());
  std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
  for (Eigen::Index j = 0; j < d; ++j) order[static_cast<std::size_t>(j)] = j;
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) {
    return std::abs(es.eigenvalues()(x)) > std::abs(es.eigenvalues()(y));
  });
  report.direction_norms.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const Eigen::VectorXcd v = es.eigenvectors().col(order[static_cast<std::size_t>(j)]).normalized();
    const double re = (delta * v.real()).squaredNorm();
    const double im = (delta * v.imag()).squaredNorm();
    report.direction_norms(j) = std::sqrt(re + im);
  }
  return report;
}

Matrix time_invariant_dynamics(const SystemSpec& spec) {
  if (spec.generator == GeneratorKind::Autonomous) return autonomous_construction(spec).a;
  if (spec.generator == GeneratorKind::ExplicitSequence && spec.explicit_steps.size() == 1) {
    return spec.explicit_steps.front().a;
  }
  throw Error(ErrorKind::InvalidInput, "system is not time-invariant");
}

NullspaceReport autonomous_nullspace_check(const SystemSpec& spec) {
  spec.validate();
  const Matrix a = time_invariant_dynamics(spec);
  const Eigen::Index d = a.rows();
  const Vector x0 = draw_initial_state(spec, Vector::Zero(d), spec.seed);
  const Trajectory traj = simulate_truth(spec, x0, spec.seed);
  Matrix prev = initial_covariance(spec);
  double increment = 0.0;
  std::optional<int> settled;
  kalman::FilterOptions options;
  options.keep_states = false;
  options.on_step = [&](const kalman::FilterState& state, const kalman::ClosureAccumulator&) {
    increment = linalg::op_norm(state.delta - prev);
    if (increment > kSettledIncrement) {
      settled.reset();
    } else if (!settled) {
      settled = state.n;
    }
    prev = state.delta;
  };
  kalman::run_filter(spec, traj, options);
  NullspaceReport report = nullspace_profile(a, prev);
  report.final_increment = increment;
  report.settled_step = settled;
  return report;
}

}  // namespace rrank::spectral
