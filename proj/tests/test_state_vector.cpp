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


#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "catsim/circuit.hpp"
#include "catsim/classical_cat.hpp"
#include "catsim/error.hpp"
#include "catsim/noise.hpp"
#include "catsim/state_vector.hpp"
#include "oracles.hpp"

using namespace catsim;
using Catch::Approx;

namespace {

double max_difference(const StateVector &a, const StateVector &b) {
  double worst = 0.0;
  for (std::uint64_t k = 0; k < a.size(); ++k) {
    worst = std::max(worst, std::abs(a.amplitudes()[k] - b.amplitudes()[k]));
  }
  return worst;
}

bool bit_identical(const StateVector &a, const StateVector &b) {
  for (std::uint64_t k = 0; k < a.size(); ++k) {
    if (a.amplitudes()[k] != b.amplitudes()[k]) return false;
  }
  return true;
}

Gate random_gate(unsigned n, std::mt19937_64 &rng) {
  std::uniform_int_distribution<unsigned> kind(0, 5);
  std::vector<unsigned> q(n);
  for (unsigned k = 0; k < n; ++k) q[k] = k;
  std::shuffle(q.begin(), q.end(), rng);
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  switch (kind(rng)) {
    case 0: return Gate::x(QubitId{q[0]});
    case 1: return Gate::hadamard(QubitId{q[0]});
    case 2: return Gate::cnot(QubitId{q[0]}, QubitId{q[1]});
    case 3: return Gate::toffoli(QubitId{q[0]}, QubitId{q[1]}, QubitId{q[2]});
    case 4: return Gate::phase(angle(rng), QubitId{q[0]});
    default: return Gate::cphase(angle(rng), QubitId{q[0]}, QubitId{q[1]});
  }
}

}  // namespace

TEST_CASE("state construction", "[engine]") {
  const LatticeSpec n4(2);
  const StateVector zero(n4);
  CHECK(zero.size() == 32);
  CHECK(zero.amplitudes()[0] == Complex(1.0, 0.0));

  const StateVector b = StateVector::basis({1, 2}, n4);
  CHECK(b.amplitudes()[9] == Complex(1.0, 0.0));
  CHECK(b.norm_squared() == 1.0);
  CHECK_THROWS_AS(StateVector::basis({4, 0}, n4), ValidationError);

  CHECK(bit_identical(StateVector::from_density(DensityGrid::point_mass(n4, {1, 2})), b));
  const StateVector u = StateVector::from_density(DensityGrid::uniform(n4));
  for (std::uint64_t k = 0; k < 16; ++k) CHECK(u.amplitudes()[k] == Complex(0.25, 0.0));
  for (std::uint64_t k = 16; k < 32; ++k) CHECK(u.amplitudes()[k] == Complex(0.0, 0.0));

  std::vector<double> w(16, 0.1);
  CHECK_THROWS_AS(StateVector::from_density(DensityGrid(n4, w)), ValidationError);
  CHECK_THROWS_AS(StateVector::from_amplitudes(n4, std::vector<Complex>(32, 1.0)),
                  ValidationError);
  CHECK_THROWS_AS(StateVector::from_amplitudes(n4, std::vector<Complex>(16, 0.25)),
                  ValidationError);

  std::mt19937_64 rng(1);
  const LatticeSpec n32(5);
  const DensityGrid g = oracle::random_density(n32, rng);
  const DensityGrid back = density_xy(StateVector::from_density(g));
  for (std::uint64_t k = 0; k < g.weights().size(); ++k) {
    REQUIRE(std::abs(back.weights()[k] - g.weights()[k]) < 1e-12);
  }
}

TEST_CASE("exact gate semantics", "[engine]") {
  const LatticeSpec spec(2);
  StateVector s(spec);
  apply_gate(s, Gate::x(QubitId{0}));
  CHECK(s.amplitudes()[1] == Complex(1.0, 0.0));

  // |q0 q1 q2> = |1 1 0> -> |1 1 1>; |1 0 0> unchanged.
  StateVector t = StateVector::basis({3, 0}, spec);
  apply_gate(t, Gate::toffoli(QubitId{0}, QubitId{1}, QubitId{2}));
  CHECK(t.amplitudes()[7] == Complex(1.0, 0.0));
  StateVector u = StateVector::basis({1, 0}, spec);
  apply_gate(u, Gate::toffoli(QubitId{0}, QubitId{1}, QubitId{2}));
  CHECK(u.amplitudes()[1] == Complex(1.0, 0.0));

  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    const Gate g = random_gate(5, rng);
    const StateVector start = oracle::random_state(spec, rng);
    StateVector got = start;
    apply_gate(got, g);
    const Eigen::VectorXcd want =
        oracle::dense_gate(g, 5, oracle::textbook_block(g)) * oracle::to_eigen(start);
    for (std::uint64_t k = 0; k < got.size(); ++k) {
      REQUIRE(std::abs(got.amplitudes()[k] - want(k)) < 1e-12);
    }
  }
}

TEST_CASE("noisy gates match a dense eigendecomposition oracle", "[engine]") {
  const LatticeSpec spec(2);
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> eta(-0.5, 0.5);
  for (int trial = 0; trial < 1000; ++trial) {
    const Gate g = random_gate(5, rng);
    const double e1 = eta(rng);
    const double e2 = eta(rng);
    const StateVector start = oracle::random_state(spec, rng);
    StateVector got = start;
    apply_block(got, g, perturbed_block(g, e1, e2));
    const Eigen::VectorXcd want =
        oracle::dense_gate(g, 5, oracle::perturbed_textbook_block(g, e1, e2)) *
        oracle::to_eigen(start);
    INFO(to_string([&] {
      Circuit c(5);
      c.add(g);
      return c;
    }()));
    for (std::uint64_t k = 0; k < got.size(); ++k) {
      REQUIRE(std::abs(got.amplitudes()[k] - want(k)) < 1e-12);
    }
  }
}

TEST_CASE("noisy apply_gate consumes two draws and uses them", "[engine]") {
  const LatticeSpec spec(2);
  NoiseModel noise(0.2, 77);
  NoiseModel replay(0.2, 77);
  std::mt19937_64 rng(4);
  StateVector a = oracle::random_state(spec, rng);
  StateVector b = a;
  const Gate g = Gate::toffoli(QubitId{0}, QubitId{3}, QubitId{4});
  apply_gate(a, g, noise);
  CHECK(noise.draws() == 2);
  const auto [e1, e2] = replay.next_kicks();
  CHECK(std::abs(e1) < 0.2);
  CHECK(std::abs(e2) < 0.2);
  apply_block(b, g, perturbed_block(g, e1, e2));
  CHECK(bit_identical(a, b));

  // Noisy CNOT on |control=1, target=0>: the amplitude left behind on the
  // target-0 state has probability sin^2((eta1 - eta2) / 2).
  NoiseModel cnot_noise(0.3, 5);
  NoiseModel cnot_replay(0.3, 5);
  StateVector c = StateVector::basis({1, 0}, spec);
  apply_gate(c, Gate::cnot(QubitId{0}, QubitId{1}), cnot_noise);
  const auto [k1, k2] = cnot_replay.next_kicks();
  CHECK(std::norm(c.amplitudes()[1]) == Approx(std::pow(std::sin((k1 - k2) / 2), 2)).margin(1e-15));
  CHECK(std::norm(c.amplitudes()[3]) == Approx(std::pow(std::cos((k1 - k2) / 2), 2)).epsilon(1e-12));
}

TEST_CASE("zero noise is bit-identical to the exact path", "[engine]") {
  for (unsigned nq : {2u, 4u, 5u}) {
    const LatticeSpec spec(nq);
    std::mt19937_64 rng(nq);
    const StateVector start = StateVector::from_density(oracle::random_density(spec, rng));
    const Circuit it = build_cat_iteration(spec);
    StateVector exact = start;
    StateVector noisy = start;
    NoiseModel zero(0.0, 1);
    for (int t = 0; t < 3; ++t) {
      apply_circuit(exact, it);
      apply_circuit(noisy, it, zero);
    }
    CHECK(bit_identical(exact, noisy));
    CHECK(zero.draws() == 6 * it.size());
  }
}

TEST_CASE("compiled circuits agree with gate-by-gate application", "[engine]") {
  for (unsigned nq : {3u, 4u, 5u}) {
    const LatticeSpec spec(nq);
    const Circuit it = build_cat_iteration(spec);
    const CompiledCircuit compiled(it);
    std::mt19937_64 rng(100 + nq);
    const StateVector start = oracle::random_state(spec, rng);

    StateVector by_gate = start;
    for (const Gate &g : it.gates()) apply_gate(by_gate, g);
    StateVector fast = start;
    apply_circuit(fast, compiled);
    CHECK(bit_identical(by_gate, fast));

    NoiseModel n1(0.05, 9);
    NoiseModel n2(0.05, 9);
    StateVector noisy_gate = start;
    for (const Gate &g : it.gates()) apply_gate(noisy_gate, g, n1);
    StateVector noisy_fast = start;
    apply_circuit(noisy_fast, compiled, n2);
    CHECK(max_difference(noisy_gate, noisy_fast) < 1e-14);
    CHECK(n1.draws() == n2.draws());
  }
}

TEST_CASE("apply_circuit checks widths", "[engine]") {
  StateVector s(LatticeSpec(2));
  CHECK_THROWS_AS(apply_circuit(s, build_cat_iteration(LatticeSpec(3))), ValidationError);
  const StateVector before = s;
  apply_circuit(s, Circuit(5));
  CHECK(bit_identical(s, before));
}

TEST_CASE("cat iteration on basis states and densities", "[engine]") {
  const LatticeSpec n4(2);
  StateVector s = StateVector::basis({1, 2}, n4);
  apply_circuit(s, build_cat_iteration(n4));
  CHECK(max_difference(s, StateVector::basis({0, 3}, n4)) == 0.0);

  for (unsigned nq = 2; nq <= 6; ++nq) {
    const LatticeSpec spec(nq);
    const Circuit it = build_cat_iteration(spec);
    // Distinct weights on every cell: one run checks all N^2 basis states.
    std::vector<double> w(spec.cell_count());
    for (std::uint64_t k = 0; k < w.size(); ++k) w[k] = static_cast<double>(k + 1);
    const DensityGrid g = DensityGrid(spec, w).normalized();
    StateVector q = StateVector::from_density(g);
    apply_circuit(q, it);
    const DensityGrid got = density_xy(q);
    const DensityGrid want = evolve_density(g, 1);
    for (std::uint64_t k = 0; k < w.size(); ++k) {
      REQUIRE(std::abs(got.weights()[k] - want.weights()[k]) < 1e-12);
    }
    CHECK(carry_leakage(q) < 1e-12);
  }
}

TEST_CASE("norm preservation under heavy noise", "[engine]") {
  SECTION("1e5 gate applications at epsilon 0.3") {
    const LatticeSpec spec(3);
    std::mt19937_64 rng(12);
    StateVector s = oracle::random_state(spec, rng);
    NoiseModel noise(0.3, 3);
    for (int k = 0; k < 100000; ++k) apply_gate(s, random_gate(8, rng), noise);
    CHECK(std::abs(s.norm_squared() - 1.0) < 1e-9);
  }
  SECTION("400 iterations at epsilon 0.03, n_q = 5") {
    const LatticeSpec spec(5);
    StateVector s(spec);
    apply_circuit(s, build_line_prep(spec));
    const CompiledCircuit it(build_cat_iteration(spec));
    NoiseModel noise(0.03, 8);
    for (int t = 0; t < 400; ++t) apply_circuit(s, it, noise);
    CHECK(std::abs(s.norm_squared() - 1.0) < 1e-9);
  }
}

TEST_CASE("carry hygiene under noise", "[engine]") {
  const LatticeSpec spec(5);
  std::mt19937_64 rng(2);
  const StateVector start = StateVector::from_density(oracle::random_density(spec, rng));
  const RegisterLayout r = RegisterLayout::for_spec(spec);
  const Circuit adder = build_mod_adder(r.x, r.y, r.carry, r.qubit_count);

  StateVector exact = start;
  apply_circuit(exact, adder);
  CHECK(carry_leakage(exact) < 1e-12);

  double per_eps2[2];
  const double eps[2] = {0.01, 0.02};
  for (int k = 0; k < 2; ++k) {
    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      StateVector s = start;
      NoiseModel noise(eps[k], seed);
      apply_circuit(s, adder, noise);
      total += carry_leakage(s);
    }
    per_eps2[k] = total / 20.0 / (eps[k] * eps[k]);
  }
  WARN("carry leakage per adder / eps^2: " << per_eps2[0] << " (eps 0.01), " << per_eps2[1]
                                           << " (eps 0.02)");
  CHECK(per_eps2[0] > 0.0);
  CHECK(per_eps2[1] / per_eps2[0] == Approx(1.0).margin(0.5));
}

TEST_CASE("small-noise continuity of the fidelity", "[engine]") {
  const LatticeSpec spec(5);
  StateVector start(spec);
  apply_circuit(start, build_line_prep(spec));
  const Circuit it = build_cat_iteration(spec);
  StateVector exact = start;
  apply_circuit(exact, it);
  const double gates = static_cast<double>(it.size());

  std::vector<double> cs;
  for (double eps : {1e-3, 3e-3, 1e-2}) {
    double loss = 0.0;
    const int runs = 30;
    for (int seed = 0; seed < runs; ++seed) {
      StateVector s = start;
      NoiseModel noise(eps, static_cast<std::uint64_t>(seed));
      apply_circuit(s, it, noise);
      loss += 1.0 - fidelity(s, exact);
    }
    cs.push_back(loss / runs / (eps * eps * gates));
  }
  WARN("measured C in 1 - f <= C eps^2 gates: " << cs[0] << ", " << cs[1] << ", " << cs[2]);
  for (double c : cs) {
    CHECK(c > 0.0);
    CHECK(c < 1.0);
  }
  CHECK(cs[2] / cs[0] == Approx(1.0).margin(0.5));
}

TEST_CASE("lattice permutations on states", "[engine]") {
  const LatticeSpec spec(3);
  StateVector s = StateVector::basis({3, 5}, spec);
  apply_lattice_permutation(s, momentum_negation(spec));
  CHECK(max_difference(s, StateVector::basis({3, 3}, spec)) == 0.0);

  std::mt19937_64 rng(6);
  const StateVector r = oracle::random_state(spec, rng);
  StateVector same = r;
  apply_lattice_permutation(same, LatticePermutation::identity(spec));
  CHECK(bit_identical(same, r));
  StateVector moved = r;
  apply_lattice_permutation(moved, cat_permutation(spec, StepOrder::Forward));
  CHECK(moved.norm_squared() == Approx(1.0).epsilon(1e-14));
  // Carry slices move independently.
  const CellIndex c{2, 6};
  CHECK(moved.amplitude(cat_step(c, spec), 3) == r.amplitude(c, 3));
}

TEST_CASE("fidelity and marginals", "[engine]") {
  const LatticeSpec spec(3);
  std::mt19937_64 rng(8);
  const StateVector a = oracle::random_state(spec, rng);
  CHECK(fidelity(a, a) == Approx(1.0).epsilon(1e-14));
  CHECK(fidelity(StateVector::basis({1, 1}, spec), StateVector::basis({1, 2}, spec)) == 0.0);
  std::vector<Complex> rotated(a.amplitudes().begin(), a.amplitudes().end());
  for (auto &z : rotated) z *= std::polar(1.0, 0.7);
  CHECK(fidelity(a, StateVector::from_amplitudes(spec, rotated)) ==
        Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(fidelity(a, StateVector(LatticeSpec(2))), ValidationError);

  StateVector line(spec);
  apply_circuit(line, build_line_prep(spec));
  const DensityGrid d = density_xy(line);
  for (std::uint64_t y = 0; y < 8; ++y) CHECK(d.at({4, y}) == Approx(0.125).epsilon(1e-12));

  const auto wx = marginal_x(a);
  const DensityGrid da = density_xy(a);
  for (std::uint64_t x = 0; x < 8; ++x) {
    double row = 0.0;
    for (std::uint64_t y = 0; y < 8; ++y) row += da.at({x, y});
    CHECK(std::abs(row - wx[x]) < 1e-12);
  }
  const auto wu = marginal_x(StateVector::from_density(DensityGrid::uniform(spec)));
  for (double p : wu) CHECK(p == Approx(0.125).epsilon(1e-12));
}

TEST_CASE("register sampling", "[engine]") {
  const LatticeSpec spec(3);
  StateVector line(spec);
  apply_circuit(line, build_line_prep(spec));
  std::mt19937_64 rng(1);
  for (std::uint64_t x : sample_register(line, LatticeAxis::X, 1000, rng)) REQUIRE(x == 4);

  const StateVector u = StateVector::from_density(DensityGrid::uniform(spec));
  const std::uint64_t shots = 100000;
  std::mt19937_64 r1(42);
  const auto samples = sample_register(u, LatticeAxis::Y, shots, r1);
  std::vector<double> counts(8, 0.0);
  for (std::uint64_t v : samples) counts[v] += 1.0;
  const double mean = shots / 8.0;
  const double sigma = std::sqrt(shots * (1.0 / 8.0) * (7.0 / 8.0));
  for (double c : counts) CHECK(std::abs(c - mean) < 5.0 * sigma);

  std::mt19937_64 r2(42);
  CHECK(sample_register(u, LatticeAxis::Y, shots, r2) == samples);
}

TEST_CASE("snapshot round trip", "[engine]") {
  const LatticeSpec spec(3);
  std::mt19937_64 rng(15);
  const StateVector a = oracle::random_state(spec, rng);
  std::stringstream buf;
  write_snapshot(buf, a);
  CHECK(buf.str().size() == 4 + 8 + a.size() * 16);
  const StateVector b = read_snapshot(buf);
  CHECK(b.spec() == spec);
  CHECK(bit_identical(a, b));

  std::stringstream truncated(buf.str().substr(0, 40));
  CHECK_THROWS(read_snapshot(truncated));
}
