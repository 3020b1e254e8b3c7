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
 * The discretized phase-space torus: an N x N lattice of cells with
 * N = 2^n_q, densities on it, and bijective cell maps.
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace catsim {

class LatticeSpec {
 public:
  static constexpr unsigned kMaxQubitsPerRegister = 31;

  /// Throws ValidationError unless 1 <= qubits_per_register <= 31.
  explicit LatticeSpec(unsigned qubits_per_register);

  unsigned qubits_per_register() const { return n_q_; }
  /// Cells per axis, N = 2^n_q.
  std::uint64_t size() const { return std::uint64_t{1} << n_q_; }
  std::uint64_t cell_count() const { return size() * size(); }
  /// Qubits used by the quantum algorithm: two registers plus n_q - 1 carries.
  unsigned total_qubits() const { return 3 * n_q_ - 1; }

  friend bool operator==(const LatticeSpec &, const LatticeSpec &) = default;

 private:
  unsigned n_q_;
};

/// Cell (i, j) sits at position x_i = i/N and momentum y_j = j/N.
struct CellIndex {
  std::uint64_t i = 0;
  std::uint64_t j = 0;

  friend bool operator==(const CellIndex &, const CellIndex &) = default;
};

inline bool contains(const LatticeSpec &spec, CellIndex cell) {
  return cell.i < spec.size() && cell.j < spec.size();
}

/// Flat index used by every dense lattice array: i + N * j.
inline std::uint64_t flat_index(const LatticeSpec &spec, CellIndex cell) {
  return cell.i + spec.size() * cell.j;
}

inline CellIndex cell_at(const LatticeSpec &spec, std::uint64_t flat) {
  return {flat % spec.size(), flat / spec.size()};
}

/// Non-negative weights on the N x N lattice, stored at flat_index(i, j).
class DensityGrid {
 public:
  /// All-zero grid.
  explicit DensityGrid(LatticeSpec spec);
  /// Throws ValidationError on negative/non-finite weights or wrong length.
  DensityGrid(LatticeSpec spec, std::vector<double> weights);

  static DensityGrid point_mass(LatticeSpec spec, CellIndex cell);
  static DensityGrid uniform(LatticeSpec spec);

  const LatticeSpec &spec() const { return spec_; }
  std::span<const double> weights() const { return weights_; }

  double at(CellIndex cell) const { return weights_[flat_index(spec_, cell)]; }
  void set(CellIndex cell, double weight);

  double total() const;
  bool is_normalized(double tolerance = 1e-12) const;
  /// Throws ValidationError for an all-zero grid.
  DensityGrid normalized() const;

  friend bool operator==(const DensityGrid &, const DensityGrid &) = default;

 private:
  LatticeSpec spec_;
  std::vector<double> weights_;
};

/// A bijection of the lattice cells, stored as a flat-index lookup table.
class LatticePermutation {
 public:
  /// Tabulates `map` over every cell; throws ValidationError if it leaves
  /// the lattice or is not a bijection.
  LatticePermutation(LatticeSpec spec,
                     const std::function<CellIndex(CellIndex)> &map);

  static LatticePermutation identity(LatticeSpec spec);

  const LatticeSpec &spec() const { return spec_; }
  std::uint64_t image(std::uint64_t flat) const { return table_[flat]; }
  CellIndex operator()(CellIndex cell) const {
    return cell_at(spec_, table_[flat_index(spec_, cell)]);
  }
  std::span<const std::uint64_t> table() const { return table_; }

  /// (this after first)(cell) = this(first(cell)).
  LatticePermutation after(const LatticePermutation &first) const;

 private:
  LatticePermutation(LatticeSpec spec, std::vector<std::uint64_t> table);

  LatticeSpec spec_;
  std::vector<std::uint64_t> table_;
};

/// Moves the weight of every cell c to perm(c).
DensityGrid push_forward(const DensityGrid &grid, const LatticePermutation &perm);

}  // namespace catsim
