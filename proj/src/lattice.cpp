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


#include "catsim/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "catsim/error.hpp"

namespace catsim {

LatticeSpec::LatticeSpec(unsigned qubits_per_register) : n_q_(qubits_per_register) {
  require(n_q_ >= 1 && n_q_ <= kMaxQubitsPerRegister,
          "qubits per register must lie in [1, 31], got " + std::to_string(n_q_));
}

DensityGrid::DensityGrid(LatticeSpec spec)
    : spec_(spec), weights_(spec.cell_count(), 0.0) {}

DensityGrid::DensityGrid(LatticeSpec spec, std::vector<double> weights)
    : spec_(spec), weights_(std::move(weights)) {
  require(weights_.size() == spec_.cell_count(),
          "density grid needs N*N = " + std::to_string(spec_.cell_count()) +
              " weights, got " + std::to_string(weights_.size()));
  for (double w : weights_) {
    require(std::isfinite(w) && w >= 0.0, "density weights must be finite and non-negative");
  }
}

DensityGrid DensityGrid::point_mass(LatticeSpec spec, CellIndex cell) {
  require(contains(spec, cell), "point mass outside the lattice");
  DensityGrid grid(spec);
  grid.weights_[flat_index(spec, cell)] = 1.0;
  return grid;
}

DensityGrid DensityGrid::uniform(LatticeSpec spec) {
  DensityGrid grid(spec);
  const double w = 1.0 / static_cast<double>(spec.cell_count());
  std::fill(grid.weights_.begin(), grid.weights_.end(), w);
  return grid;
}

void DensityGrid::set(CellIndex cell, double weight) {
  require(contains(spec_, cell), "cell outside the lattice");
  require(std::isfinite(weight) && weight >= 0.0, "density weights must be finite and non-negative");
  weights_[flat_index(spec_, cell)] = weight;
}

double DensityGrid::total() const {
  return std::accumulate(weights_.begin(), weights_.end(), 0.0);
}

bool DensityGrid::is_normalized(double tolerance) const {
  return std::abs(total() - 1.0) <= tolerance;
}

DensityGrid DensityGrid::normalized() const {
  const double sum = total();
  require(sum > 0.0, "cannot normalize an all-zero density");
  DensityGrid out(spec_);
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    out.weights_[k] = weights_[k] / sum;
  }
  return out;
}

LatticePermutation::LatticePermutation(LatticeSpec spec, std::vector<std::uint64_t> table)
    : spec_(spec), table_(std::move(table)) {}

LatticePermutation::LatticePermutation(LatticeSpec spec,
                                       const std::function<CellIndex(CellIndex)> &map)
    : spec_(spec), table_(spec.cell_count()) {
  std::vector<bool> hit(table_.size(), false);
  for (std::uint64_t k = 0; k < table_.size(); ++k) {
    const CellIndex dst = map(cell_at(spec, k));
    require(contains(spec, dst), "lattice map leaves the lattice");
    const std::uint64_t d = flat_index(spec, dst);
    require(!hit[d], "lattice map is not a bijection");
    hit[d] = true;
    table_[k] = d;
  }
}

LatticePermutation LatticePermutation::identity(LatticeSpec spec) {
  std::vector<std::uint64_t> table(spec.cell_count());
  std::iota(table.begin(), table.end(), std::uint64_t{0});
  return LatticePermutation(spec, std::move(table));
}

LatticePermutation LatticePermutation::after(const LatticePermutation &first) const {
  require(first.spec_ == spec_, "composing permutations on different lattices");
  std::vector<std::uint64_t> table(table_.size());
  for (std::uint64_t k = 0; k < table.size(); ++k) {
    table[k] = table_[first.table_[k]];
  }
  return LatticePermutation(spec_, std::move(table));
}

DensityGrid push_forward(const DensityGrid &grid, const LatticePermutation &perm) {
  require(grid.spec() == perm.spec(), "density and permutation live on different lattices");
  std::vector<double> out(grid.weights().size(), 0.0);
  const auto in = grid.weights();
  for (std::uint64_t k = 0; k < in.size(); ++k) {
    out[perm.image(k)] = in[k];
  }
  return DensityGrid(grid.spec(), std::move(out));
}

}  // namespace catsim
