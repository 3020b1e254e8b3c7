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


#include "catsim/circuit.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "catsim/error.hpp"

namespace catsim {

RegisterLayout RegisterLayout::for_spec(const LatticeSpec &spec) {
  const unsigned n = spec.qubits_per_register();
  return {Register{0, n}, Register{n, n}, Register{2 * n, n - 1}, 3 * n - 1};
}

std::string_view gate_name(GateKind kind) {
  switch (kind) {
    case GateKind::Not: return "NOT";
    case GateKind::Hadamard: return "HADAMARD";
    case GateKind::Cnot: return "CNOT";
    case GateKind::Toffoli: return "TOFFOLI";
    case GateKind::Phase: return "PHASE";
    case GateKind::CPhase: return "CPHASE";
  }
  return "?";
}

unsigned control_count(GateKind kind) {
  switch (kind) {
    case GateKind::Cnot:
    case GateKind::CPhase: return 1;
    case GateKind::Toffoli: return 2;
    default: return 0;
  }
}

Gate::Gate(GateKind kind, std::array<QubitId, 3> qubits, unsigned arity, double theta)
    : kind_(kind), qubits_(qubits), arity_(arity), theta_(theta) {
  for (unsigned a = 0; a < arity_; ++a) {
    for (unsigned b = a + 1; b < arity_; ++b) {
      require(qubits_[a] != qubits_[b], std::string(gate_name(kind_)) + " uses a qubit twice");
    }
  }
}

Gate Gate::x(QubitId target) { return Gate(GateKind::Not, {target}, 1, 0.0); }
Gate Gate::hadamard(QubitId target) { return Gate(GateKind::Hadamard, {target}, 1, 0.0); }
Gate Gate::cnot(QubitId control, QubitId target) {
  return Gate(GateKind::Cnot, {control, target}, 2, 0.0);
}
Gate Gate::toffoli(QubitId control1, QubitId control2, QubitId target) {
  return Gate(GateKind::Toffoli, {control1, control2, target}, 3, 0.0);
}
Gate Gate::phase(double theta, QubitId target) {
  return Gate(GateKind::Phase, {target}, 1, theta);
}
Gate Gate::cphase(double theta, QubitId control, QubitId target) {
  return Gate(GateKind::CPhase, {control, target}, 2, theta);
}

Gate Gate::inverse() const {
  Gate g = *this;
  g.theta_ = -theta_;
  return g;
}

void Circuit::add(const Gate &gate) {
  for (QubitId q : gate.qubits()) {
    require(q.index < qubit_count_, "gate qubit " + std::to_string(q.index) +
                                        " outside a circuit of " +
                                        std::to_string(qubit_count_) + " qubits");
  }
  gates_.push_back(gate);
}

void Circuit::append(const Circuit &other) {
  require(other.qubit_count_ <= qubit_count_, "appending a wider circuit");
  gates_.insert(gates_.end(), other.gates_.begin(), other.gates_.end());
}

Circuit Circuit::inverse() const {
  Circuit out(qubit_count_);
  out.gates_.reserve(gates_.size());
  for (auto it = gates_.rbegin(); it != gates_.rend(); ++it) {
    out.gates_.push_back(it->inverse());
  }
  return out;
}

void Circuit::erase(std::size_t position) {
  require(position < gates_.size(), "erase position past the end of the circuit");
  gates_.erase(gates_.begin() + static_cast<std::ptrdiff_t>(position));
}

GateCount count_gates(const Circuit &circuit) {
  GateCount count;
  for (const Gate &g : circuit.gates()) {
    ++count.per_kind[static_cast<std::size_t>(g.kind())];
    ++count.total;
  }
  return count;
}

Circuit build_mod_adder(const Register &a, const Register &b, const Register &c,
                        unsigned qubit_count) {
  const unsigned n = a.width;
  require(n >= 1, "adder width must be at least 1");
  require(b.width == n, "adder source and destination widths differ");
  require(c.width == n - 1, "adder needs exactly n - 1 carry qubits");
  require(!a.overlaps(b) && !a.overlaps(c) && !b.overlaps(c), "adder registers overlap");
  for (const Register *r : {&a, &b, &c}) {
    require(r->offset + r->width <= qubit_count, "adder register outside the circuit");
  }

  Circuit circuit(qubit_count);
  if (n == 1) {
    circuit.add(Gate::cnot(a[0], b[0]));
    return circuit;
  }
  // c[k - 1] holds carry c_k into bit k.
  auto carry = [&](unsigned k) { return c[k - 1]; };

  circuit.add(Gate::toffoli(a[0], b[0], carry(1)));
  for (unsigned i = 1; i + 1 < n; ++i) {
    circuit.add(Gate::toffoli(a[i], b[i], carry(i + 1)));
    circuit.add(Gate::cnot(a[i], b[i]));
    circuit.add(Gate::toffoli(carry(i), b[i], carry(i + 1)));
  }

  circuit.add(Gate::cnot(a[n - 1], b[n - 1]));
  circuit.add(Gate::cnot(carry(n - 1), b[n - 1]));

  for (unsigned i = n - 2; i >= 1; --i) {
    circuit.add(Gate::toffoli(carry(i), b[i], carry(i + 1)));
    circuit.add(Gate::cnot(a[i], b[i]));
    circuit.add(Gate::toffoli(a[i], b[i], carry(i + 1)));
    circuit.add(Gate::cnot(a[i], b[i]));
    circuit.add(Gate::cnot(carry(i), b[i]));
  }

  circuit.add(Gate::toffoli(a[0], b[0], carry(1)));
  circuit.add(Gate::cnot(a[0], b[0]));
  return circuit;
}

Circuit build_cat_iteration(const LatticeSpec &spec) {
  const RegisterLayout r = RegisterLayout::for_spec(spec);
  Circuit circuit(r.qubit_count);
  circuit.append(build_mod_adder(r.x, r.y, r.carry, r.qubit_count));
  circuit.append(build_mod_adder(r.y, r.x, r.carry, r.qubit_count));
  return circuit;
}

Circuit build_cat_iteration_reversed(const LatticeSpec &spec) {
  const RegisterLayout r = RegisterLayout::for_spec(spec);
  Circuit circuit(r.qubit_count);
  circuit.append(build_mod_adder(r.y, r.x, r.carry, r.qubit_count));
  circuit.append(build_mod_adder(r.x, r.y, r.carry, r.qubit_count));
  return circuit;
}

Circuit build_line_prep(const LatticeSpec &spec) {
  const RegisterLayout r = RegisterLayout::for_spec(spec);
  Circuit circuit(r.qubit_count);
  circuit.add(Gate::x(r.x[r.x.width - 1]));
  for (unsigned k = 0; k < r.y.width; ++k) {
    circuit.add(Gate::hadamard(r.y[k]));
  }
  return circuit;
}

Circuit build_qft(const Register &reg, unsigned qubit_count) {
  require(reg.width >= 1 && reg.offset + reg.width <= qubit_count,
          "QFT register outside the circuit");
  constexpr double kPi = 3.14159265358979323846;
  Circuit circuit(qubit_count);
  for (unsigned k = reg.width; k-- > 0;) {
    circuit.add(Gate::hadamard(reg[k]));
    for (unsigned m = 1; m <= k; ++m) {
      circuit.add(Gate::cphase(kPi / static_cast<double>(std::uint64_t{1} << m), reg[k - m],
                               reg[k]));
    }
  }
  return circuit;
}

std::uint64_t reverse_bits(std::uint64_t value, unsigned width) {
  std::uint64_t out = 0;
  for (unsigned b = 0; b < width; ++b) {
    out = (out << 1) | ((value >> b) & 1u);
  }
  return out;
}

std::optional<std::uint64_t> apply_to_basis(const Circuit &circuit, std::uint64_t basis) {
  for (const Gate &g : circuit.gates()) {
    bool active = true;
    for (QubitId c : g.controls()) {
      active = active && ((basis >> c.index) & 1u);
    }
    switch (g.kind()) {
      case GateKind::Not:
      case GateKind::Cnot:
      case GateKind::Toffoli:
        if (active) {
          basis ^= std::uint64_t{1} << g.target().index;
        }
        break;
      default:
        return std::nullopt;
    }
  }
  return basis;
}

RegisterLayout adder_layout(unsigned width) {
  require(width >= 1, "adder width must be at least 1");
  return {Register{0, width}, Register{width, width}, Register{2 * width, width - 1},
          3 * width - 1};
}

AdderReport verify_adder(const Circuit &adder, unsigned width) {
  require(width >= 1 && width <= 8, "exhaustive adder verification supports widths 1..8");
  const RegisterLayout r = adder_layout(width);
  require(adder.qubit_count() >= r.qubit_count, "adder circuit narrower than its layout");
  const std::uint64_t span = std::uint64_t{1} << width;
  AdderReport report;
  report.width = width;
  for (std::uint64_t a = 0; a < span; ++a) {
    for (std::uint64_t b = 0; b < span; ++b) {
      const std::uint64_t input = a | (b << width);
      const std::uint64_t expected = a | (((a + b) & (span - 1)) << width);
      const auto output = apply_to_basis(adder, input);
      ++report.inputs_checked;
      if (output && *output == expected) {
        ++report.inputs_passed;
      } else if (!report.counterexample) {
        report.counterexample = AdderCounterexample{a, b, output.value_or(~std::uint64_t{0})};
      }
    }
  }
  return report;
}

AdderReport verify_adder(unsigned width) {
  require(width >= 1 && width <= 8, "exhaustive adder verification supports widths 1..8");
  const RegisterLayout r = adder_layout(width);
  return verify_adder(build_mod_adder(r.x, r.y, r.carry, r.qubit_count), width);
}

void print_circuit(std::ostream &out, const Circuit &circuit) {
  for (const Gate &g : circuit.gates()) {
    out << gate_name(g.kind());
    for (QubitId q : g.qubits()) {
      out << ' ' << q.index;
    }
    if (g.kind() == GateKind::Phase || g.kind() == GateKind::CPhase) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", g.theta());
      out << ' ' << buf;
    }
    out << '\n';
  }
}

std::string to_string(const Circuit &circuit) {
  std::ostringstream out;
  print_circuit(out, circuit);
  return out.str();
}

}  // namespace catsim
