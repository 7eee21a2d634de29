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

#include <cstdint>
#include <limits>
#include <optional>

#include "rrank/linalg.hpp"

namespace rrank {

/// Counter-based generator: draw k of stream s under seed is
/// splitmix64(key(seed, s) + k * golden_gamma). Every (seed, stream) pair is an
/// independent, random-access sequence, so operators at step n can be
/// regenerated without replaying steps 1..n-1.
class CounterRng {
 public:
  using result_type = std::uint64_t;
  static constexpr const char* kName = "splitmix64-counter";

  CounterRng(std::uint64_t seed, std::uint64_t stream);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal via Box-Muller.
  double normal();

  Matrix gaussian(Eigen::Index rows, Eigen::Index cols);
  /// Haar-distributed orthogonal matrix (QR of a Gaussian with sign fix).
  Matrix rotation(Eigen::Index d);

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::optional<double> spare_;
};

/// Stream identifier for a (purpose tag, step) pair.
constexpr std::uint64_t stream_id(std::uint32_t tag, std::uint64_t step) {
  return (static_cast<std::uint64_t>(tag) << 40) ^ step;
}

}  // namespace rrank
