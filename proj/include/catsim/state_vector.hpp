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
 * Dense state-vector simulation over the 3 n_q - 1 qubits of the cat-map
 * algorithm. Basis index = x + N y + N^2 c, so the x register occupies bits
 * 0..n_q-1, y the next n_q bits and the carries the top n_q - 1 bits.
 *
 * Reductions (norms, inner products, marginals) sum in a fixed blocked
 * order so results do not depend on the number of worker threads.
 */

#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <vector>

#include "catsim/circuit.hpp"
#include "catsim/lattice.hpp"
#include "catsim/noise.hpp"

namespace catsim {

class StateVector {
 public:
  /// Largest register count accepted; 2^40 amplitudes is already 16 TiB.
  static constexpr unsigned kMaxQubits = 40;

  /// |x=0>|y=0>|c=0>.
  explicit StateVector(LatticeSpec spec);

  /// |x>|y>|0>. Throws ValidationError outside the lattice.
  static StateVector basis(CellIndex cell, LatticeSpec spec);
  /// Amplitude sqrt(rho_ij) at (i, j, c = 0). The grid must be normalized.
  static StateVector from_density(const DensityGrid &grid);
  /// Takes ownership of raw amplitudes; checks length and unit norm (1e-9).
  static StateVector from_amplitudes(LatticeSpec spec, std::vector<Complex> amplitudes);

  const LatticeSpec &spec() const { return spec_; }
  unsigned qubit_count() const { return spec_.total_qubits(); }
  std::uint64_t size() const { return amps_.size(); }

  std::span<const Complex> amplitudes() const { return amps_; }
  std::span<Complex> amplitudes() { return amps_; }
  Complex amplitude(CellIndex cell, std::uint64_t carry = 0) const {
    return amps_[flat_index(spec_, cell) + spec_.cell_count() * carry];
  }

  double norm_squared() const;

 private:
  StateVector(LatticeSpec spec, std::vector<Complex> amplitudes);

  LatticeSpec spec_;
  std::vector<Complex> amps_;
};

void apply_gate(StateVector &state, const Gate &gate);
/// Draws two eigenphase kicks from `noise`, then applies the perturbed gate.
void apply_gate(StateVector &state, const Gate &gate, NoiseModel &noise);

/// A circuit regrouped for cache-friendly application. Consecutive gates
/// whose qubits fit in a small window are applied together, one block of
/// the state at a time; every amplitude still sees the gates in circuit
/// order, so results are bit-identical to gate-by-gate application.
class CompiledCircuit {
 public:
  explicit CompiledCircuit(Circuit circuit);

  const Circuit &circuit() const { return circuit_; }
  std::size_t group_count() const { return groups_.size(); }

  struct Group {
    std::size_t first_gate = 0;
    std::size_t gate_count = 0;
    /// Bits not touched by the group; enumerated as block bases.
    std::uint64_t free_mask = 0;
    std::uint64_t block_count = 0;
    /// Per gate: offsets of i0 (target bit clear, controls set) in a block.
    std::vector<std::vector<std::uint64_t>> offsets;
  };

  std::span<const Group> groups() const { return groups_; }

 private:
  Circuit circuit_;
  std::vector<Group> groups_;
};

/// Throws ValidationError if the circuit width differs from the state's.
void apply_circuit(StateVector &state, const Circuit &circuit);
void apply_circuit(StateVector &state, const Circuit &circuit, NoiseModel &noise);
void apply_circuit(StateVector &state, const CompiledCircuit &circuit);
/// Kicks for a group are drawn in gate order before the group is applied.
void apply_circuit(StateVector &state, const CompiledCircuit &circuit, NoiseModel &noise);

/// Applies `matrix` to the target of `gate` on the subspace where all of
/// its controls are 1. Exposed for tests that build their own blocks.
void apply_block(StateVector &state, const Gate &gate, const Mat2 &matrix);

/// Moves the amplitude at (x, y, c) to (perm(x, y), c).
void apply_lattice_permutation(StateVector &state, const LatticePermutation &perm);

/// <a|b>.
Complex inner_product(const StateVector &a, const StateVector &b);
/// |<a|b>|^2.
double fidelity(const StateVector &a, const StateVector &b);

/// rho_ij = sum_c |a(i, j, c)|^2.
DensityGrid density_xy(const StateVector &state);

enum class LatticeAxis { X, Y };

/// Probability of each value of the x or y register.
std::vector<double> marginal(const StateVector &state, LatticeAxis axis);
inline std::vector<double> marginal_x(const StateVector &state) {
  return marginal(state, LatticeAxis::X);
}

/// Total probability on carry values c != 0.
double carry_leakage(const StateVector &state);

/// Independent measurements of one register.
std::vector<std::uint64_t> sample_register(const StateVector &state, LatticeAxis axis,
                                           std::uint64_t shots, std::mt19937_64 &rng);

/// Debug snapshot: u32 n_q, u64 amplitude count, then (re, im) pairs as
/// little-endian IEEE doubles.
void write_snapshot(std::ostream &out, const StateVector &state);
StateVector read_snapshot(std::istream &in);

}  // namespace catsim
