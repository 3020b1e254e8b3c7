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


// Independent reference computations shared by the test suites. Nothing
// here goes through the engine's pair kernels or the circuit builders.

#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "catsim/circuit.hpp"
#include "catsim/lattice.hpp"
#include "catsim/state_vector.hpp"

namespace oracle {

using cd = std::complex<double>;
inline constexpr double kPi = 3.14159265358979323846;

/// The 2x2 block of a gate written out from textbook definitions.
inline Eigen::Matrix2cd textbook_block(const catsim::Gate &gate) {
  Eigen::Matrix2cd m;
  switch (gate.kind()) {
    case catsim::GateKind::Not:
    case catsim::GateKind::Cnot:
    case catsim::GateKind::Toffoli:
      m << 0, 1, 1, 0;
      break;
    case catsim::GateKind::Hadamard:
      m << 1, 1, 1, -1;
      m /= std::sqrt(2.0);
      break;
    default:
      m << 1, 0, 0, std::polar(1.0, gate.theta());
  }
  return m;
}

/// Diagonalizes the block numerically and multiplies eigenvalue k by
/// exp(i eta_k). Eigenvalue 1 is the one closest to +1 (bit flips, H) or
/// the |0> eigenvalue 1 (phase kinds).
inline Eigen::Matrix2cd perturbed_textbook_block(const catsim::Gate &gate, double eta1,
                                                 double eta2) {
  const Eigen::Matrix2cd m = textbook_block(gate);
  Eigen::ComplexEigenSolver<Eigen::Matrix2cd> solver(m);
  Eigen::Matrix2cd v = solver.eigenvectors();
  Eigen::Vector2cd lambda = solver.eigenvalues();
  const bool phase_kind =
      gate.kind() == catsim::GateKind::Phase || gate.kind() == catsim::GateKind::CPhase;
  std::size_t first = 0;
  if (phase_kind) {
    first = std::abs(v(0, 0)) > std::abs(v(0, 1)) ? 0 : 1;
  } else {
    first = std::abs(lambda(0) - 1.0) < std::abs(lambda(1) - 1.0) ? 0 : 1;
  }
  const std::size_t second = 1 - first;
  Eigen::Vector2cd kicked;
  kicked(first) = lambda(first) * std::polar(1.0, eta1);
  kicked(second) = lambda(second) * std::polar(1.0, eta2);
  // Eigenvectors of a normal matrix from ComplexEigenSolver are orthonormal
  // up to rounding for distinct eigenvalues.
  return v * kicked.asDiagonal() * v.inverse();
}

/// Full 2^n x 2^n matrix: `block` on the target where all controls are 1,
/// identity elsewhere.
inline Eigen::MatrixXcd dense_gate(const catsim::Gate &gate, unsigned n,
                                   const Eigen::Matrix2cd &block) {
  const std::uint64_t dim = std::uint64_t{1} << n;
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(dim, dim);
  const std::uint64_t tb = std::uint64_t{1} << gate.target().index;
  for (std::uint64_t col = 0; col < dim; ++col) {
    bool active = true;
    for (catsim::QubitId c : gate.controls()) {
      active = active && ((col >> c.index) & 1u);
    }
    if (!active) {
      u(col, col) = 1.0;
      continue;
    }
    const int bit = (col & tb) ? 1 : 0;
    const std::uint64_t c0 = col & ~tb;
    const std::uint64_t c1 = col | tb;
    u(c0, col) = block(0, bit);
    u(c1, col) = block(1, bit);
  }
  return u;
}

inline Eigen::VectorXcd to_eigen(const catsim::StateVector &s) {
  Eigen::VectorXcd v(s.size());
  for (std::uint64_t k = 0; k < s.size(); ++k) {
    v(k) = s.amplitudes()[k];
  }
  return v;
}

inline std::vector<cd> random_amplitudes(std::uint64_t size, std::mt19937_64 &rng) {
  std::normal_distribution<double> g;
  std::vector<cd> a(size);
  double norm = 0.0;
  for (auto &x : a) {
    x = {g(rng), g(rng)};
    norm += std::norm(x);
  }
  for (auto &x : a) {
    x /= std::sqrt(norm);
  }
  return a;
}

inline catsim::StateVector random_state(const catsim::LatticeSpec &spec, std::mt19937_64 &rng) {
  return catsim::StateVector::from_amplitudes(
      spec, random_amplitudes(std::uint64_t{1} << spec.total_qubits(), rng));
}

inline catsim::DensityGrid random_density(const catsim::LatticeSpec &spec,
                                          std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> w(spec.cell_count());
  for (auto &x : w) {
    x = u(rng);
  }
  return catsim::DensityGrid(spec, std::move(w)).normalized();
}

/// out[k] = N^{-1/2} sum_x in[x] exp(2 pi i x k / N).
inline std::vector<cd> dft(const std::vector<cd> &in) {
  const std::size_t n = in.size();
  std::vector<cd> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    cd s = 0.0;
    for (std::size_t x = 0; x < n; ++x) {
      s += in[x] * std::polar(1.0, 2.0 * kPi * static_cast<double>((x * k) % n) /
                                       static_cast<double>(n));
    }
    out[k] = s / std::sqrt(static_cast<double>(n));
  }
  return out;
}

}  // namespace oracle
