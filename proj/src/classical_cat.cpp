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


#include "catsim/classical_cat.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "catsim/error.hpp"

namespace catsim {

CellIndex cat_step(CellIndex cell, const LatticeSpec &spec) {
  const std::uint64_t mask = spec.size() - 1;
  const std::uint64_t j = (cell.j + cell.i) & mask;
  const std::uint64_t i = (j + cell.i) & mask;
  return {i, j};
}

CellIndex cat_step_reversed(CellIndex cell, const LatticeSpec &spec) {
  const std::uint64_t mask = spec.size() - 1;
  const std::uint64_t i = (cell.i + cell.j) & mask;
  const std::uint64_t j = (cell.j + i) & mask;
  return {i, j};
}

CellIndex momentum_negate(CellIndex cell, const LatticeSpec &spec) {
  return {cell.i, (spec.size() - cell.j) & (spec.size() - 1)};
}

LatticePermutation cat_permutation(const LatticeSpec &spec, StepOrder order) {
  if (order == StepOrder::Forward) {
    return LatticePermutation(spec, [&](CellIndex c) { return cat_step(c, spec); });
  }
  return LatticePermutation(spec, [&](CellIndex c) { return cat_step_reversed(c, spec); });
}

LatticePermutation momentum_negation(const LatticeSpec &spec) {
  return LatticePermutation(spec, [&](CellIndex c) { return momentum_negate(c, spec); });
}

DensityGrid evolve_density(const DensityGrid &grid, std::uint64_t steps, StepOrder order) {
  if (steps == 0) {
    return grid;
  }
  const LatticePermutation step = cat_permutation(grid.spec(), order);
  DensityGrid current = grid;
  for (std::uint64_t t = 0; t < steps; ++t) {
    current = push_forward(current, step);
  }
  return current;
}

ErrorSpec ErrorSpec::lsb_flip(ErrorAxes axes) {
  ErrorSpec e;
  e.kind = Kind::LsbFlip;
  e.di = 0;
  e.dj = 0;
  e.axes = axes;
  return e;
}

ErrorSpec ErrorSpec::shift(std::uint64_t di, std::uint64_t dj) {
  ErrorSpec e;
  e.kind = Kind::Shift;
  e.di = di;
  e.dj = dj;
  e.axes = di == 0 ? ErrorAxes::Y : (dj == 0 ? ErrorAxes::X : ErrorAxes::Both);
  return e;
}

ErrorSpec ErrorSpec::from_amplitude(double amplitude, const LatticeSpec &spec, ErrorAxes axes) {
  require(std::isfinite(amplitude) && amplitude >= 0.0, "classical error amplitude must be >= 0");
  const double cells = std::round(amplitude * static_cast<double>(spec.size()));
  const auto delta = static_cast<std::uint64_t>(std::max(1.0, cells));
  require(delta < spec.size(), "classical error of " + std::to_string(delta) +
                                   " cells does not fit a lattice of size " +
                                   std::to_string(spec.size()));
  return shift(axes == ErrorAxes::Y ? 0 : delta, axes == ErrorAxes::X ? 0 : delta);
}

void validate(const ErrorSpec &error, const LatticeSpec &spec) {
  if (error.kind == ErrorSpec::Kind::Shift) {
    require(error.di < spec.size() && error.dj < spec.size(),
            "classical error shift must be smaller than the lattice size");
  }
}

CellIndex apply_error(CellIndex cell, const ErrorSpec &error, const LatticeSpec &spec) {
  const std::uint64_t mask = spec.size() - 1;
  if (error.kind == ErrorSpec::Kind::LsbFlip) {
    const bool flip_i = error.axes != ErrorAxes::Y;
    const bool flip_j = error.axes != ErrorAxes::X;
    return {flip_i ? cell.i ^ 1u : cell.i, flip_j ? cell.j ^ 1u : cell.j};
  }
  return {(cell.i + error.di) & mask, (cell.j + error.dj) & mask};
}

LatticePermutation error_permutation(const ErrorSpec &error, const LatticeSpec &spec) {
  validate(error, spec);
  return LatticePermutation(spec, [&](CellIndex c) { return apply_error(c, error, spec); });
}

DensityGrid apply_classical_error(const DensityGrid &grid, const ErrorSpec &error) {
  return push_forward(grid, error_permutation(error, grid.spec()));
}

double bhattacharyya_fidelity(const DensityGrid &a, const DensityGrid &b) {
  require(a.spec() == b.spec(), "fidelity between densities on different lattices");
  const auto wa = a.weights();
  const auto wb = b.weights();
  double overlap = 0.0;
  for (std::size_t k = 0; k < wa.size(); ++k) {
    overlap += std::sqrt(wa[k] * wb[k]);
  }
  return std::min(1.0, overlap * overlap);
}

double divergence_time(double err) {
  require(err > 0.0 && err < 1.0, "divergence_time needs 0 < err < 1");
  return std::log(1.0 / err) / cat_constants().entropy;
}

double ehrenfest_time(const LatticeSpec &spec) {
  return std::log(static_cast<double>(spec.size())) / cat_constants().entropy;
}

}  // namespace catsim
