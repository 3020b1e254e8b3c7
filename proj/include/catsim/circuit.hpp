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
 * Gate sequences for the quantum cat map: ripple-carry modular adders,
 * one full map iteration in either factor order, the line-state
 * preparation and the quantum Fourier transform.
 *
 * Register layout over 3 n_q - 1 qubits (qubit 0 is the least significant
 * bit of x):
 *
 *     x     : qubits 0       .. n_q - 1
 *     y     : qubits n_q     .. 2 n_q - 1
 *     carry : qubits 2 n_q   .. 3 n_q - 2   (c_1 .. c_{n_q-1})
 */

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "catsim/lattice.hpp"

namespace catsim {

struct QubitId {
  unsigned index = 0;

  friend auto operator<=>(const QubitId &, const QubitId &) = default;
};

/// A contiguous run of qubits holding an unsigned integer, LSB first.
struct Register {
  unsigned offset = 0;
  unsigned width = 0;

  QubitId operator[](unsigned bit) const { return QubitId{offset + bit}; }
  bool overlaps(const Register &other) const {
    return width != 0 && other.width != 0 && offset < other.offset + other.width &&
           other.offset < offset + width;
  }
};

struct RegisterLayout {
  Register x;
  Register y;
  Register carry;
  unsigned qubit_count = 0;

  static RegisterLayout for_spec(const LatticeSpec &spec);
};

enum class GateKind { Not, Hadamard, Cnot, Toffoli, Phase, CPhase };

inline constexpr std::array<GateKind, 6> kAllGateKinds = {
    GateKind::Not,     GateKind::Hadamard, GateKind::Cnot,
    GateKind::Toffoli, GateKind::Phase,    GateKind::CPhase};

std::string_view gate_name(GateKind kind);
/// Number of control qubits for the kind (0, 1 or 2).
unsigned control_count(GateKind kind);

/// One gate. Controls come first in `qubits`; the target is always last.
class Gate {
 public:
  static Gate x(QubitId target);
  static Gate hadamard(QubitId target);
  static Gate cnot(QubitId control, QubitId target);
  static Gate toffoli(QubitId control1, QubitId control2, QubitId target);
  static Gate phase(double theta, QubitId target);
  static Gate cphase(double theta, QubitId control, QubitId target);

  GateKind kind() const { return kind_; }
  std::span<const QubitId> qubits() const { return {qubits_.data(), arity_}; }
  std::span<const QubitId> controls() const { return {qubits_.data(), arity_ - 1u}; }
  QubitId target() const { return qubits_[arity_ - 1]; }
  /// Rotation angle in radians; zero for non-phase kinds.
  double theta() const { return theta_; }

  /// The gate whose action undoes this one.
  Gate inverse() const;

  friend bool operator==(const Gate &, const Gate &) = default;

 private:
  Gate(GateKind kind, std::array<QubitId, 3> qubits, unsigned arity, double theta);

  GateKind kind_;
  std::array<QubitId, 3> qubits_;
  unsigned arity_;
  double theta_;
};

class Circuit {
 public:
  explicit Circuit(unsigned qubit_count) : qubit_count_(qubit_count) {}

  unsigned qubit_count() const { return qubit_count_; }
  std::span<const Gate> gates() const { return gates_; }
  std::size_t size() const { return gates_.size(); }
  bool empty() const { return gates_.empty(); }

  /// Throws ValidationError if the gate reaches past qubit_count.
  void add(const Gate &gate);
  /// Appends every gate of `other`; its qubit count must not exceed ours.
  void append(const Circuit &other);

  /// Reversed sequence of inverted gates.
  Circuit inverse() const;

  /// Removes the gate at `position`. Used to build negative controls.
  void erase(std::size_t position);

 private:
  unsigned qubit_count_;
  std::vector<Gate> gates_;
};

struct GateCount {
  std::array<std::uint64_t, kAllGateKinds.size()> per_kind{};
  std::uint64_t total = 0;

  std::uint64_t of(GateKind kind) const { return per_kind[static_cast<std::size_t>(kind)]; }
};

GateCount count_gates(const Circuit &circuit);

/// dst := (dst + src) mod 2^n with src unchanged and the carries returned
/// to |0>. Uses 4n-6 Toffoli and 4n-5 CNOT gates for n >= 2, one CNOT for
/// n = 1. The carry register must have width n - 1.
Circuit build_mod_adder(const Register &src, const Register &dst, const Register &carry,
                        unsigned qubit_count);

/// y += x then x += y, i.e. the forward map step.
Circuit build_cat_iteration(const LatticeSpec &spec);
/// x += y then y += x, i.e. the rotation-first step used after time inversion.
Circuit build_cat_iteration_reversed(const LatticeSpec &spec);

/// |0> -> |x = N/2> (uniform superposition over y). n_q + 1 gates.
Circuit build_line_prep(const LatticeSpec &spec);

/// Quantum Fourier transform of `reg` without the final swaps: the output
/// frequency bit b ends up on qubit reg[width - 1 - b].
Circuit build_qft(const Register &reg, unsigned qubit_count);

/// Reverses the low `width` bits of `value`.
std::uint64_t reverse_bits(std::uint64_t value, unsigned width);

/// Runs a circuit made only of permutation gates (NOT/CNOT/TOFFOLI) on a
/// computational basis state. Returns nullopt if a non-classical gate occurs.
std::optional<std::uint64_t> apply_to_basis(const Circuit &circuit, std::uint64_t basis);

struct AdderCounterexample {
  std::uint64_t a = 0;
  std::uint64_t b = 0;
  /// Raw output basis index over the adder's 3n - 1 qubits.
  std::uint64_t output = 0;
};

struct AdderReport {
  unsigned width = 0;
  std::uint64_t inputs_checked = 0;
  std::uint64_t inputs_passed = 0;
  std::optional<AdderCounterexample> counterexample;

  bool passed() const { return inputs_checked > 0 && inputs_passed == inputs_checked; }
};

/// Standalone adder layout for width n: a on 0..n-1, b on n..2n-1, carries after.
RegisterLayout adder_layout(unsigned width);

/// Exhaustively checks `adder` on every |a>|b>|0> with a, b < 2^n.
AdderReport verify_adder(const Circuit &adder, unsigned width);
/// Builds the adder for width n (1 <= n <= 8) and verifies it.
AdderReport verify_adder(unsigned width);

/// One gate per line: `KIND q_a q_b q_c [theta]`.
void print_circuit(std::ostream &out, const Circuit &circuit);
std::string to_string(const Circuit &circuit);

}  // namespace catsim
