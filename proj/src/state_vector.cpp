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


#include "catsim/state_vector.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <iterator>
#include <ostream>
#include <string>
#include <utility>

#include "catsim/error.hpp"

namespace catsim {
namespace {

// Reductions are summed block by block in index order; the block partials
// are then summed in block order.
constexpr std::uint64_t kReductionBlock = std::uint64_t{1} << 12;
constexpr std::int64_t kParallelThreshold = std::int64_t{1} << 12;

/// Index pairs (i0, i0 | target_bit) with every control bit set. The free
/// (non-gate) bits are enumerated in increasing order with the subset
/// successor ((v | ~free) + 1) & free.
struct ActivePairs {
  std::uint64_t target_bit = 0;
  std::uint64_t control_mask = 0;
  std::uint64_t free_mask = 0;
  std::array<unsigned, 3> fixed{};
  unsigned fixed_count = 0;
  std::uint64_t count = 0;

  ActivePairs(const Gate &gate, unsigned qubit_count) {
    std::uint64_t fixed_mask = 0;
    for (QubitId q : gate.qubits()) {
      fixed[fixed_count++] = q.index;
      fixed_mask |= std::uint64_t{1} << q.index;
    }
    for (QubitId c : gate.controls()) {
      control_mask |= std::uint64_t{1} << c.index;
    }
    target_bit = std::uint64_t{1} << gate.target().index;
    std::sort(fixed.begin(), fixed.begin() + fixed_count);
    free_mask = ((std::uint64_t{1} << qubit_count) - 1) & ~fixed_mask;
    count = std::uint64_t{1} << (qubit_count - fixed_count);
  }

  /// The k-th free-bit pattern.
  std::uint64_t deposit(std::uint64_t k) const {
    for (unsigned f = 0; f < fixed_count; ++f) {
      const unsigned p = fixed[f];
      const std::uint64_t low = k & ((std::uint64_t{1} << p) - 1);
      k = ((k >> p) << (p + 1)) | low;
    }
    return k;
  }
};

constexpr std::uint64_t kPairChunk = std::uint64_t{1} << 10;

template <class Kernel>
void for_each_pair(const ActivePairs &pairs, Complex *amps, Kernel kernel) {
  const std::uint64_t chunk = std::min(pairs.count, kPairChunk);
  const auto chunks = static_cast<std::int64_t>(pairs.count / chunk);
  const std::uint64_t fixed_bits = ~pairs.free_mask;
  const std::uint64_t free = pairs.free_mask;
  const std::uint64_t controls = pairs.control_mask;
  const std::uint64_t tb = pairs.target_bit;
#pragma omp parallel for schedule(static) if (static_cast<std::int64_t>(pairs.count) >= kParallelThreshold)
  for (std::int64_t c = 0; c < chunks; ++c) {
    std::uint64_t v = pairs.deposit(static_cast<std::uint64_t>(c) * chunk);
    for (std::uint64_t r = 0; r < chunk; ++r) {
      const std::uint64_t i0 = v | controls;
      kernel(amps[i0], amps[i0 | tb]);
      v = ((v | fixed_bits) + 1) & free;
    }
  }
}

bool is_bit_flip(GateKind kind) {
  return kind == GateKind::Not || kind == GateKind::Cnot || kind == GateKind::Toffoli;
}

void check_gate_fits(const StateVector &state, const Gate &gate) {
  for (QubitId q : gate.qubits()) {
    require(q.index < state.qubit_count(), "gate qubit outside the state");
  }
}

template <class Term>
double blocked_sum(std::uint64_t n, Term term) {
  const std::uint64_t blocks = (n + kReductionBlock - 1) / kReductionBlock;
  std::vector<double> partial(blocks, 0.0);
  const auto block_count = static_cast<std::int64_t>(blocks);
#pragma omp parallel for schedule(static) if (block_count > 1)
  for (std::int64_t b = 0; b < block_count; ++b) {
    const std::uint64_t begin = static_cast<std::uint64_t>(b) * kReductionBlock;
    const std::uint64_t end = std::min(n, begin + kReductionBlock);
    double s = 0.0;
    for (std::uint64_t k = begin; k < end; ++k) {
      s += term(k);
    }
    partial[static_cast<std::size_t>(b)] = s;
  }
  double total = 0.0;
  for (double p : partial) {
    total += p;
  }
  return total;
}

void put_u64(std::ostream &out, std::uint64_t v) {
  char bytes[8];
  for (int b = 0; b < 8; ++b) {
    bytes[b] = static_cast<char>((v >> (8 * b)) & 0xffu);
  }
  out.write(bytes, 8);
}

std::uint64_t get_u64(std::istream &in, int width = 8) {
  unsigned char bytes[8] = {};
  in.read(reinterpret_cast<char *>(bytes), width);
  if (!in) {
    throw ValidationError("truncated state snapshot");
  }
  std::uint64_t v = 0;
  for (int b = 0; b < width; ++b) {
    v |= std::uint64_t{bytes[b]} << (8 * b);
  }
  return v;
}

}  // namespace

StateVector::StateVector(LatticeSpec spec, std::vector<Complex> amplitudes)
    : spec_(spec), amps_(std::move(amplitudes)) {}

StateVector::StateVector(LatticeSpec spec) : spec_(spec) {
  require(spec.total_qubits() <= kMaxQubits,
          "state vector of " + std::to_string(spec.total_qubits()) + " qubits is too large");
  amps_.assign(std::uint64_t{1} << spec.total_qubits(), Complex{0.0, 0.0});
  amps_[0] = 1.0;
}

StateVector StateVector::basis(CellIndex cell, LatticeSpec spec) {
  require(contains(spec, cell), "basis state outside the lattice");
  StateVector s(spec);
  s.amps_[0] = 0.0;
  s.amps_[flat_index(spec, cell)] = 1.0;
  return s;
}

StateVector StateVector::from_density(const DensityGrid &grid) {
  require(grid.is_normalized(1e-9), "initial density must be normalized");
  StateVector s(grid.spec());
  const auto w = grid.weights();
  for (std::uint64_t k = 0; k < w.size(); ++k) {
    s.amps_[k] = std::sqrt(w[k]);
  }
  return s;
}

StateVector StateVector::from_amplitudes(LatticeSpec spec, std::vector<Complex> amplitudes) {
  require(spec.total_qubits() <= kMaxQubits, "state vector too large");
  require(amplitudes.size() == (std::uint64_t{1} << spec.total_qubits()),
          "amplitude count does not match 2^(3 n_q - 1)");
  StateVector s(spec, std::move(amplitudes));
  require(std::abs(s.norm_squared() - 1.0) < 1e-9, "amplitudes are not normalized");
  return s;
}

double StateVector::norm_squared() const {
  return blocked_sum(amps_.size(), [this](std::uint64_t k) { return std::norm(amps_[k]); });
}

void apply_block(StateVector &state, const Gate &gate, const Mat2 &m) {
  check_gate_fits(state, gate);
  const ActivePairs pairs(gate, state.qubit_count());
  // Spelled out in real arithmetic: std::complex multiplication carries
  // NaN/inf recovery that dominates the kernel.
  const double r00 = m.m00.real(), i00 = m.m00.imag(), r01 = m.m01.real(), i01 = m.m01.imag();
  const double r10 = m.m10.real(), i10 = m.m10.imag(), r11 = m.m11.real(), i11 = m.m11.imag();
  for_each_pair(pairs, state.amplitudes().data(), [=](Complex &a0, Complex &a1) {
    const double x0 = a0.real(), y0 = a0.imag(), x1 = a1.real(), y1 = a1.imag();
    a0 = {r00 * x0 - i00 * y0 + r01 * x1 - i01 * y1, r00 * y0 + i00 * x0 + r01 * y1 + i01 * x1};
    a1 = {r10 * x0 - i10 * y0 + r11 * x1 - i11 * y1, r10 * y0 + i10 * x0 + r11 * y1 + i11 * x1};
  });
}

void apply_gate(StateVector &state, const Gate &gate) {
  check_gate_fits(state, gate);
  const ActivePairs pairs(gate, state.qubit_count());
  Complex *amps = state.amplitudes().data();
  if (is_bit_flip(gate.kind())) {
    for_each_pair(pairs, amps, [](Complex &a0, Complex &a1) { std::swap(a0, a1); });
  } else if (gate.kind() == GateKind::Hadamard) {
    const double s = 1.0 / std::sqrt(2.0);
    for_each_pair(pairs, amps, [s](Complex &a0, Complex &a1) {
      const Complex sum = (a0 + a1) * s;
      a1 = (a0 - a1) * s;
      a0 = sum;
    });
  } else {
    const double c = std::cos(gate.theta());
    const double s = std::sin(gate.theta());
    for_each_pair(pairs, amps, [c, s](Complex &, Complex &a1) {
      a1 = {c * a1.real() - s * a1.imag(), c * a1.imag() + s * a1.real()};
    });
  }
}

void apply_gate(StateVector &state, const Gate &gate, NoiseModel &noise) {
  const auto [eta1, eta2] = noise.next_kicks();
  if (eta1 == 0.0 && eta2 == 0.0) {
    apply_gate(state, gate);
    return;
  }
  apply_block(state, gate, perturbed_block(gate, eta1, eta2));
}

namespace {

// Window of qubits a compiled group may touch; 2^10 cache lines fit in L2.
constexpr unsigned kGroupWindow = 10;
// Below this size the whole state is cache resident anyway.
constexpr unsigned kCompileThreshold = 14;

/// Per-gate action inside a compiled group.
struct GateOp {
  enum class Kind { Swap, Hadamard, Phase, Block } kind = Kind::Block;
  std::uint64_t target_bit = 0;
  Mat2 m{};
};

GateOp exact_op(const Gate &gate) {
  GateOp op;
  op.target_bit = std::uint64_t{1} << gate.target().index;
  op.m = gate_block(gate);
  if (is_bit_flip(gate.kind())) {
    op.kind = GateOp::Kind::Swap;
  } else if (gate.kind() == GateKind::Hadamard) {
    op.kind = GateOp::Kind::Hadamard;
  } else {
    op.kind = GateOp::Kind::Phase;
  }
  return op;
}

inline void apply_op(const GateOp &op, Complex *amps, std::uint64_t base,
                     const std::vector<std::uint64_t> &offsets) {
  const std::uint64_t tb = op.target_bit;
  switch (op.kind) {
    case GateOp::Kind::Swap:
      for (std::uint64_t off : offsets) {
        std::swap(amps[base | off], amps[base | off | tb]);
      }
      break;
    case GateOp::Kind::Hadamard: {
      const double s = 1.0 / std::sqrt(2.0);
      for (std::uint64_t off : offsets) {
        Complex &a0 = amps[base | off];
        Complex &a1 = amps[base | off | tb];
        const Complex sum = (a0 + a1) * s;
        a1 = (a0 - a1) * s;
        a0 = sum;
      }
      break;
    }
    case GateOp::Kind::Phase: {
      const double c = op.m.m11.real(), s = op.m.m11.imag();
      for (std::uint64_t off : offsets) {
        Complex &a1 = amps[base | off | tb];
        a1 = {c * a1.real() - s * a1.imag(), c * a1.imag() + s * a1.real()};
      }
      break;
    }
    case GateOp::Kind::Block: {
      const Mat2 &m = op.m;
      const double r00 = m.m00.real(), i00 = m.m00.imag(), r01 = m.m01.real(), i01 = m.m01.imag();
      const double r10 = m.m10.real(), i10 = m.m10.imag(), r11 = m.m11.real(), i11 = m.m11.imag();
      for (std::uint64_t off : offsets) {
        Complex &a0 = amps[base | off];
        Complex &a1 = amps[base | off | tb];
        const double x0 = a0.real(), y0 = a0.imag(), x1 = a1.real(), y1 = a1.imag();
        a0 = {r00 * x0 - i00 * y0 + r01 * x1 - i01 * y1, r00 * y0 + i00 * x0 + r01 * y1 + i01 * x1};
        a1 = {r10 * x0 - i10 * y0 + r11 * x1 - i11 * y1, r10 * y0 + i10 * x0 + r11 * y1 + i11 * x1};
      }
      break;
    }
  }
}

void run_compiled(StateVector &state, const CompiledCircuit &compiled, NoiseModel *noise) {
  require(compiled.circuit().qubit_count() == state.qubit_count(),
          "circuit has " + std::to_string(compiled.circuit().qubit_count()) +
              " qubits, state has " + std::to_string(state.qubit_count()));
  const auto gates = compiled.circuit().gates();
  Complex *amps = state.amplitudes().data();
  std::vector<GateOp> ops;
  for (const CompiledCircuit::Group &group : compiled.groups()) {
    ops.clear();
    for (std::size_t g = 0; g < group.gate_count; ++g) {
      const Gate &gate = gates[group.first_gate + g];
      GateOp op = exact_op(gate);
      if (noise != nullptr) {
        const auto [eta1, eta2] = noise->next_kicks();
        if (eta1 != 0.0 || eta2 != 0.0) {
          op.kind = GateOp::Kind::Block;
          op.m = perturbed_block(gate, eta1, eta2);
        }
      }
      ops.push_back(op);
    }
    const std::uint64_t fixed_bits = ~group.free_mask;
    const std::uint64_t free = group.free_mask;
    const auto blocks = static_cast<std::int64_t>(group.block_count);
    // Consecutive block bases differ in their lowest free bits, so the
    // cache lines of one block are reused by the next.
    constexpr std::int64_t kBlocksPerTask = 64;
    const std::int64_t tasks = (blocks + kBlocksPerTask - 1) / kBlocksPerTask;
#pragma omp parallel for schedule(static) if (tasks > 1)
    for (std::int64_t task = 0; task < tasks; ++task) {
      const std::int64_t first = task * kBlocksPerTask;
      const std::int64_t last = std::min(blocks, first + kBlocksPerTask);
      std::uint64_t base = 0;
      {
        // Deposit `first` into the free bits.
        std::uint64_t k = static_cast<std::uint64_t>(first);
        for (std::uint64_t bits = free; bits != 0 && k != 0; bits &= bits - 1) {
          if (k & 1u) {
            base |= bits & (~bits + 1);
          }
          k >>= 1;
        }
      }
      for (std::int64_t b = first; b < last; ++b) {
        for (std::size_t g = 0; g < ops.size(); ++g) {
          apply_op(ops[g], amps, base, group.offsets[g]);
        }
        base = ((base | fixed_bits) + 1) & free;
      }
    }
  }
}

}  // namespace

CompiledCircuit::CompiledCircuit(Circuit circuit) : circuit_(std::move(circuit)) {
  const unsigned n = circuit_.qubit_count();
  const std::uint64_t all = n >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
  const unsigned window = std::min(n, kGroupWindow);
  const auto gates = circuit_.gates();

  std::size_t g = 0;
  while (g < gates.size()) {
    Group group;
    group.first_gate = g;
    std::uint64_t used = 0;
    while (g < gates.size()) {
      std::uint64_t mask = used;
      for (QubitId q : gates[g].qubits()) {
        mask |= std::uint64_t{1} << q.index;
      }
      if (std::popcount(mask) > static_cast<int>(window) && group.gate_count > 0) {
        break;
      }
      used = mask;
      ++group.gate_count;
      ++g;
    }
    // Pad the window with the lowest unused bits so blocks cover whole
    // cache lines.
    for (unsigned b = 0; b < n && std::popcount(used) < static_cast<int>(window); ++b) {
      used |= std::uint64_t{1} << b;
    }
    group.free_mask = all & ~used;
    group.block_count = std::uint64_t{1} << (n - std::popcount(used));

    std::vector<unsigned> local_bits;
    for (unsigned b = 0; b < n; ++b) {
      if ((used >> b) & 1u) {
        local_bits.push_back(b);
      }
    }
    const std::uint64_t local_count = std::uint64_t{1} << local_bits.size();
    for (std::size_t k = 0; k < group.gate_count; ++k) {
      const Gate &gate = gates[group.first_gate + k];
      std::uint64_t controls = 0;
      for (QubitId c : gate.controls()) {
        controls |= std::uint64_t{1} << c.index;
      }
      const std::uint64_t tb = std::uint64_t{1} << gate.target().index;
      std::vector<std::uint64_t> offsets;
      for (std::uint64_t local = 0; local < local_count; ++local) {
        std::uint64_t global = 0;
        for (std::size_t b = 0; b < local_bits.size(); ++b) {
          if ((local >> b) & 1u) {
            global |= std::uint64_t{1} << local_bits[b];
          }
        }
        if ((global & tb) == 0 && (global & controls) == controls) {
          offsets.push_back(global);
        }
      }
      group.offsets.push_back(std::move(offsets));
    }
    groups_.push_back(std::move(group));
  }
}

void apply_circuit(StateVector &state, const CompiledCircuit &circuit) {
  run_compiled(state, circuit, nullptr);
}

void apply_circuit(StateVector &state, const CompiledCircuit &circuit, NoiseModel &noise) {
  run_compiled(state, circuit, &noise);
}

void apply_circuit(StateVector &state, const Circuit &circuit) {
  require(circuit.qubit_count() == state.qubit_count(),
          "circuit has " + std::to_string(circuit.qubit_count()) + " qubits, state has " +
              std::to_string(state.qubit_count()));
  if (state.qubit_count() >= kCompileThreshold) {
    run_compiled(state, CompiledCircuit(circuit), nullptr);
    return;
  }
  for (const Gate &g : circuit.gates()) {
    apply_gate(state, g);
  }
}

void apply_circuit(StateVector &state, const Circuit &circuit, NoiseModel &noise) {
  require(circuit.qubit_count() == state.qubit_count(),
          "circuit has " + std::to_string(circuit.qubit_count()) + " qubits, state has " +
              std::to_string(state.qubit_count()));
  if (state.qubit_count() >= kCompileThreshold) {
    run_compiled(state, CompiledCircuit(circuit), &noise);
    return;
  }
  for (const Gate &g : circuit.gates()) {
    apply_gate(state, g, noise);
  }
}

void apply_lattice_permutation(StateVector &state, const LatticePermutation &perm) {
  require(perm.spec() == state.spec(), "permutation and state live on different lattices");
  const std::uint64_t cells = state.spec().cell_count();
  const std::uint64_t slices = state.size() / cells;
  auto amps = state.amplitudes();
  std::vector<Complex> slice(cells);
  const auto table = perm.table();
  for (std::uint64_t c = 0; c < slices; ++c) {
    Complex *src = amps.data() + c * cells;
    for (std::uint64_t k = 0; k < cells; ++k) {
      slice[table[k]] = src[k];
    }
    std::copy(slice.begin(), slice.end(), src);
  }
}

Complex inner_product(const StateVector &a, const StateVector &b) {
  require(a.spec() == b.spec(), "inner product of states on different lattices");
  const auto x = a.amplitudes();
  const auto y = b.amplitudes();
  const double re = blocked_sum(x.size(), [&](std::uint64_t k) {
    return x[k].real() * y[k].real() + x[k].imag() * y[k].imag();
  });
  const double im = blocked_sum(x.size(), [&](std::uint64_t k) {
    return x[k].real() * y[k].imag() - x[k].imag() * y[k].real();
  });
  return {re, im};
}

double fidelity(const StateVector &a, const StateVector &b) {
  // Identical states would otherwise come out a few ulps short of 1.
  if (a.spec() == b.spec() && std::ranges::equal(a.amplitudes(), b.amplitudes())) {
    return 1.0;
  }
  return std::min(1.0, std::norm(inner_product(a, b)));
}

DensityGrid density_xy(const StateVector &state) {
  const std::uint64_t cells = state.spec().cell_count();
  const std::uint64_t slices = state.size() / cells;
  const auto amps = state.amplitudes();
  std::vector<double> rho(cells, 0.0);
  for (std::uint64_t c = 0; c < slices; ++c) {
    const Complex *src = amps.data() + c * cells;
    for (std::uint64_t k = 0; k < cells; ++k) {
      rho[k] += std::norm(src[k]);
    }
  }
  return DensityGrid(state.spec(), std::move(rho));
}

std::vector<double> marginal(const StateVector &state, LatticeAxis axis) {
  const std::uint64_t n = state.spec().size();
  const DensityGrid rho = density_xy(state);
  const auto w = rho.weights();
  std::vector<double> out(n, 0.0);
  for (std::uint64_t j = 0; j < n; ++j) {
    for (std::uint64_t i = 0; i < n; ++i) {
      out[axis == LatticeAxis::X ? i : j] += w[i + n * j];
    }
  }
  return out;
}

double carry_leakage(const StateVector &state) {
  const std::uint64_t cells = state.spec().cell_count();
  const auto amps = state.amplitudes();
  return blocked_sum(state.size() - cells,
                     [&](std::uint64_t k) { return std::norm(amps[cells + k]); });
}

std::vector<std::uint64_t> sample_register(const StateVector &state, LatticeAxis axis,
                                           std::uint64_t shots, std::mt19937_64 &rng) {
  require(shots >= 1, "need at least one shot");
  const std::vector<double> p = marginal(state, axis);
  std::vector<double> cumulative(p.size());
  double running = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    running += p[k];
    cumulative[k] = running;
  }
  std::vector<std::uint64_t> outcomes;
  outcomes.reserve(shots);
  for (std::uint64_t s = 0; s < shots; ++s) {
    const double u = std::generate_canonical<double, 53>(rng) * running;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    // u can round up to the total; fall back to the last reachable value.
    if (it == cumulative.end()) {
      it = std::prev(it);
    }
    std::size_t k = static_cast<std::size_t>(it - cumulative.begin());
    while (p[k] == 0.0 && k > 0) {
      --k;
    }
    outcomes.push_back(k);
  }
  return outcomes;
}

void write_snapshot(std::ostream &out, const StateVector &state) {
  const std::uint32_t nq = state.spec().qubits_per_register();
  char header[4];
  for (int b = 0; b < 4; ++b) {
    header[b] = static_cast<char>((nq >> (8 * b)) & 0xffu);
  }
  out.write(header, 4);
  put_u64(out, state.size());
  for (const Complex &a : state.amplitudes()) {
    put_u64(out, std::bit_cast<std::uint64_t>(a.real()));
    put_u64(out, std::bit_cast<std::uint64_t>(a.imag()));
  }
  if (!out) {
    throw RuntimeError("failed writing state snapshot");
  }
}

StateVector read_snapshot(std::istream &in) {
  const auto nq = static_cast<unsigned>(get_u64(in, 4));
  const LatticeSpec spec(nq);
  const std::uint64_t count = get_u64(in);
  require(spec.total_qubits() <= StateVector::kMaxQubits &&
              count == (std::uint64_t{1} << spec.total_qubits()),
          "snapshot amplitude count does not match its n_q");
  std::vector<Complex> amps(count);
  for (auto &a : amps) {
    const double re = std::bit_cast<double>(get_u64(in));
    const double im = std::bit_cast<double>(get_u64(in));
    a = {re, im};
  }
  return StateVector::from_amplitudes(spec, std::move(amps));
}

}  // namespace catsim
