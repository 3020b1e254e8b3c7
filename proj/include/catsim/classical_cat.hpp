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
 * Exact integer arithmetic for the discretized Arnold cat map
 *
 *     y' = y + x  (mod N),   x' = y' + x = 2x + y  (mod N)
 *
 * read as a kick on the momentum followed by a free rotation of the
 * position. This is the oracle every quantum circuit is checked against.
 */

#pragma once

#include <cmath>
#include <cstdint>

#include "catsim/lattice.hpp"

namespace catsim {

struct CatConstants {
  /// Stretching factor per iteration, (3 + sqrt 5) / 2.
  double lambda;
  /// Kolmogorov-Sinai entropy ln(lambda), in nats per iteration.
  double entropy;
};

inline CatConstants cat_constants() {
  const double lambda = (3.0 + std::sqrt(5.0)) / 2.0;
  return {lambda, std::log(lambda)};
}

/// Kick then rotation: j' = (j + i) mod N, i' = (j' + i) mod N.
CellIndex cat_step(CellIndex cell, const LatticeSpec &spec);

/// Rotation then kick: i' = (i + j) mod N, j' = (j + i') mod N. Conjugating
/// this by momentum_negate gives the inverse of cat_step.
CellIndex cat_step_reversed(CellIndex cell, const LatticeSpec &spec);

/// Time inversion j -> (N - j) mod N. An involution.
CellIndex momentum_negate(CellIndex cell, const LatticeSpec &spec);

enum class StepOrder { Forward, Reversed };

LatticePermutation cat_permutation(const LatticeSpec &spec, StepOrder order);
LatticePermutation momentum_negation(const LatticeSpec &spec);

/// Pushes every cell's weight through `steps` iterations of the map.
DensityGrid evolve_density(const DensityGrid &grid, std::uint64_t steps,
                           StepOrder order = StepOrder::Forward);

/// Which coordinates a classical error displaces.
enum class ErrorAxes { X, Y, Both };

/// A rigid lattice permutation standing in for a classical computer error.
struct ErrorSpec {
  enum class Kind { LsbFlip, Shift };

  Kind kind = Kind::Shift;
  /// Shift in cells along i and j; unused for LsbFlip.
  std::uint64_t di = 1;
  std::uint64_t dj = 1;
  /// Axes flipped by LsbFlip.
  ErrorAxes axes = ErrorAxes::Both;

  /// i -> i XOR 1 and/or j -> j XOR 1.
  static ErrorSpec lsb_flip(ErrorAxes axes = ErrorAxes::Both);
  static ErrorSpec shift(std::uint64_t di, std::uint64_t dj);
  /// Rigid shift by delta = max(1, round(amplitude * N)) cells along `axes`.
  static ErrorSpec from_amplitude(double amplitude, const LatticeSpec &spec,
                                  ErrorAxes axes = ErrorAxes::Both);
};

/// Throws ValidationError when a shift component is >= N.
void validate(const ErrorSpec &error, const LatticeSpec &spec);

CellIndex apply_error(CellIndex cell, const ErrorSpec &error, const LatticeSpec &spec);
LatticePermutation error_permutation(const ErrorSpec &error, const LatticeSpec &spec);
DensityGrid apply_classical_error(const DensityGrid &grid, const ErrorSpec &error);

/// (sum_ij sqrt(a_ij b_ij))^2, the overlap |<psi_a|psi_b>|^2 of the
/// non-negative amplitudes sqrt(rho).
double bhattacharyya_fidelity(const DensityGrid &a, const DensityGrid &b);

/// Iterations for an initial error `err` in (0, 1) to grow to order one: ln(1/err)/h.
double divergence_time(double err);

/// Time scale ln(N)/h up to which the lattice tracks the continuous map.
double ehrenfest_time(const LatticeSpec &spec);

}  // namespace catsim
