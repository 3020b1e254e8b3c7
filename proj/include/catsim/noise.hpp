// Copyright 2026 The catsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


/**
 * @file
 * Unitary eigenphase noise. Every gate acts nontrivially only on a
 * two-dimensional block (the target qubit, within the subspace where all
 * controls are 1). A noisy application diagonalizes that block,
 * multiplies its two eigenvalues by exp(i eta_1) and exp(i eta_2) with
 * eta drawn uniformly from (-epsilon, epsilon), and leaves everything
 * outside the block untouched.
 */

#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <utility>

#include "catsim/circuit.hpp"

namespace catsim {

using Complex = std::complex<double>;

/// Row-major 2x2 complex matrix acting on (|0>, |1>) of the target qubit.
struct Mat2 {
  Complex m00, m01, m10, m11;
};

/// The exact block of a gate (X for NOT/CNOT/TOFFOLI, H, diag(1, e^{i theta})).
Mat2 gate_block(const Gate &gate);

/// The gate block with eigenvalue k multiplied by exp(i eta_k). For the
/// bit-flip kinds eigenvector 1 is (|0>+|1>)/sqrt 2 (eigenvalue +1); for
/// HADAMARD it is the +1 eigenvector; for the phase kinds it is |0>.
Mat2 perturbed_block(const Gate &gate, double eta1, double eta2);

/// A seeded stream of eigenphase kicks, two per gate application.
class NoiseModel {
 public:
  /// Throws ValidationError for epsilon < 0 or non-finite.
  NoiseModel(double epsilon, std::uint64_t seed);

  double epsilon() const { return epsilon_; }
  std::uint64_t seed() const { return seed_; }
  /// Number of eta values consumed so far.
  std::uint64_t draws() const { return draws_; }

  std::pair<double, double> next_kicks();

 private:
  double epsilon_;
  std::uint64_t seed_;
  std::uint64_t draws_ = 0;
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> eta_;
};

}  // namespace catsim
