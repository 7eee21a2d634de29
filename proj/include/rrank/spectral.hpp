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
#pragma once

// Autonomous-system spectral checks: stable invariant subspaces of A^T,
// growth rates of matrix powers, and Jordan-block probes.

#include <complex>
#include <optional>
#include <vector>

#include "rrank/linalg.hpp"
#include "rrank/system.hpp"

namespace rrank::spectral {

inline constexpr double kGapTolerance = 1e-6;
inline constexpr int kPowMax = 5000;
inline constexpr int kJordanMaxSize = 6;
inline constexpr double kSettledIncrement = 1e-10;

/// Real Schur form Z = q t q^T with explicitly tracked diagonal block sizes.
struct SchurForm {
  Matrix q;
  Matrix t;
  std::vector<int> block_sizes;
};

SchurForm real_schur(const Matrix& z);

/// Reorders so that blocks whose eigenvalue magnitude is below alpha come first.
/// Returns the number of leading columns of q spanning that invariant subspace.
int order_schur(SchurForm& form, double alpha);

/// Orthonormal basis of E^alpha(A^T): the A^T-invariant subspace for |lambda| < alpha.
/// Throws SpectralGapViolation if some |lambda| lies within kGapTolerance of alpha.
Matrix stable_space(const Matrix& a, double alpha);

/// Eigenvalues of A sorted by magnitude, descending.
std::vector<std::complex<double>> sorted_eigenvalues(const Matrix& a);

struct AutonomousAnalysis {
  Matrix a;
  Vector eig_mags;         // descending
  Matrix stable_space_at;  // d x (d - d0)
  int d0 = 0;              // count of |lambda| >= 1
};

AutonomousAnalysis analyze_autonomous(const Matrix& a);

/// A = V J V^{-1}, computed with solves.
Matrix similarity(const Matrix& v, const Matrix& j);

/// Real k x k (or realified 2k x 2k for complex lambda) Jordan block.
Matrix jordan_block(std::complex<double> lambda, int k);

struct PowerSpectrum {
  int n = 0;
  Vector values;  // [sigma_j(A^n)]^{1/n}, descending
};

/// Rooted singular values of A^n via log-scaled QR powering, for 1 <= n <= kPowMax.
std::vector<PowerSpectrum> ef_eigenvalue_convergence(const Matrix& a,
                                                     const std::vector<int>& n_values);

struct JordanBlockProbe {
  std::complex<double> lambda;
  int k = 0;
  std::vector<int> n_values;
  Matrix measured;  // (j, column of n) -> [sigma_j(J^n)]^{1/n}
};

JordanBlockProbe jordan_probe(std::complex<double> lambda, int k, const std::vector<int>& n_values);

struct EigenspaceComparison {
  int n = 0;
  int stable_dim = 0;
  double angle = 0.0;
};

/// Largest principal angle between the trailing columns of the backward QR basis
/// of A^n and E^alpha(A^T).
EigenspaceComparison eigenspace_equality_check(const Matrix& a, double alpha, int n = 400);

struct NullspaceReport {
  double restriction = 0.0;     // ||Delta_N L L^T|| over E^1(A^T)
  Vector eig_mags;              // |lambda_j(A)|, descending
  Vector direction_norms;       // ||Delta_N v_j(A^T)|| in the same order
  int d0 = 0;
  int stable_dim = 0;
  double final_increment = 0.0; // ||Delta_N - Delta_{N-1}||
  std::optional<int> settled_step;  // first n with increment <= kSettledIncrement
  Matrix final_delta;
};

/// A for Autonomous specs and single-step ExplicitSequence specs; InvalidInput otherwise.
Matrix time_invariant_dynamics(const SystemSpec& spec);

/// Fills restriction, eigenvalue magnitudes and per-direction norms for a given Delta.
NullspaceReport nullspace_profile(const Matrix& a, const Matrix& delta);

/// Runs the filter on a time-invariant system (Autonomous, or ExplicitSequence with one step).
NullspaceReport autonomous_nullspace_check(const SystemSpec& spec);

}  // namespace rrank::spectral
