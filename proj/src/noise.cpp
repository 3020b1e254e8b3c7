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


#include "catsim/noise.hpp"

#include <cmath>

#include "catsim/error.hpp"

namespace catsim {
namespace {

constexpr double kPi = 3.14159265358979323846;

Complex phase_factor(double angle) { return std::polar(1.0, angle); }

}  // namespace

Mat2 gate_block(const Gate &gate) {
  const double s = 1.0 / std::sqrt(2.0);
  switch (gate.kind()) {
    case GateKind::Not:
    case GateKind::Cnot:
    case GateKind::Toffoli:
      return {0.0, 1.0, 1.0, 0.0};
    case GateKind::Hadamard:
      return {s, s, s, -s};
    case GateKind::Phase:
    case GateKind::CPhase:
      return {1.0, 0.0, 0.0, phase_factor(gate.theta())};
  }
  return {1.0, 0.0, 0.0, 1.0};
}

Mat2 perturbed_block(const Gate &gate, double eta1, double eta2) {
  const Complex e1 = phase_factor(eta1);
  const Complex e2 = phase_factor(eta2);
  switch (gate.kind()) {
    case GateKind::Not:
    case GateKind::Cnot:
    case GateKind::Toffoli: {
      // e1 |+><+| - e2 |-><-|
      const Complex d = 0.5 * (e1 - e2);
      const Complex o = 0.5 * (e1 + e2);
      return {d, o, o, d};
    }
    case GateKind::Hadamard: {
      // +1 eigenvector (cos pi/8, sin pi/8), -1 eigenvector (-sin pi/8, cos pi/8).
      const double c = std::cos(kPi / 8.0);
      const double s = std::sin(kPi / 8.0);
      return {e1 * (c * c) - e2 * (s * s), (e1 + e2) * (c * s), (e1 + e2) * (c * s),
              e1 * (s * s) - e2 * (c * c)};
    }
    case GateKind::Phase:
    case GateKind::CPhase:
      return {e1, 0.0, 0.0, phase_factor(gate.theta() + eta2)};
  }
  return {1.0, 0.0, 0.0, 1.0};
}

NoiseModel::NoiseModel(double epsilon, std::uint64_t seed)
    : epsilon_(epsilon), seed_(seed), engine_(seed), eta_(-epsilon, epsilon) {
  require(std::isfinite(epsilon) && epsilon >= 0.0, "noise amplitude must be finite and >= 0");
}

std::pair<double, double> NoiseModel::next_kicks() {
  draws_ += 2;
  if (epsilon_ == 0.0) {
    return {0.0, 0.0};
  }
  const double eta1 = eta_(engine_);
  const double eta2 = eta_(engine_);
  return {eta1, eta2};
}

}  // namespace catsim
