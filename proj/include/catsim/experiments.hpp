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
 * Experiment drivers: time-inversion echoes, fidelity decay under gate
 * noise, fidelity after classical errors, the fidelity time scale t_f and
 * its scaling with epsilon^2 n_q, non-return estimation from register
 * measurements, and Fourier harmonics of the density.
 *
 * All drivers are deterministic functions of their configuration and seed.
 */

#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <variant>
#include <vector>

#include "catsim/circuit.hpp"
#include "catsim/classical_cat.hpp"
#include "catsim/lattice.hpp"
#include "catsim/noise.hpp"
#include "catsim/state_vector.hpp"

namespace catsim {

/// The line x = 1/2, uniform in y, prepared by n_q + 1 gates.
struct LineInitial {};
struct PointInitial {
  CellIndex cell;
};
struct DensityInitial {
  DensityGrid grid;
};
using InitialSource = std::variant<LineInitial, PointInitial, DensityInitial>;

/// The bundled smiling-face picture: face outline, two eyes and a mouth.
DensityGrid smile_density(const LatticeSpec &spec);

/// Classical density matching an initial source.
DensityGrid initial_density(const LatticeSpec &spec, const InitialSource &initial);

StateVector prepare_state(const LatticeSpec &spec, const InitialSource &initial);
/// As above; the line preparation gates draw kicks from `noise`. Density and
/// point sources are loaded exactly.
StateVector prepare_state(const LatticeSpec &spec, const InitialSource &initial,
                          NoiseModel &noise);

struct CatCircuits {
  CompiledCircuit forward;
  CompiledCircuit reversed;

  static CatCircuits for_spec(const LatticeSpec &spec);
};

struct FidelityPoint {
  double t = 0.0;
  double f = 0.0;
};

struct FidelitySeries {
  std::vector<FidelityPoint> points;
};

/// First time the series falls below `level`, linearly interpolated
/// between samples. nullopt if it never does.
std::optional<double> crossing_time(const FidelitySeries &series, double level = 0.5);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double rms_residual = 0.0;
  std::size_t points = 0;
};

/// Ordinary least squares y = intercept + slope x. Needs two distinct x.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

// ---------------------------------------------------------------------------
// Time-inversion echo

struct EchoConfig {
  LatticeSpec spec{7};
  std::uint64_t t_r = 10;
  double epsilon_q = 0.0;
  /// Applied right after the momentum inversion.
  std::optional<ErrorSpec> classical_error;
  InitialSource initial = LineInitial{};
  std::uint64_t seed = 1;
  /// Times in [0, 2 t_r] at which to record the density.
  std::vector<std::uint64_t> snapshot_times;
  bool noisy_preparation = false;
};

struct EchoSnapshot {
  std::uint64_t t = 0;
  DensityGrid density;
};

struct EchoResult {
  std::vector<EchoSnapshot> snapshots;
  double return_fidelity = 0.0;
  StateVector initial_state;
  StateVector final_state;
};

/// t_r noisy forward iterations, momentum inversion (exact), optional
/// classical error, t_r noisy rotation-first iterations, inversion again.
/// Snapshots after the inversion are shown in the original momentum frame.
EchoResult run_echo(const EchoConfig &config);

// ---------------------------------------------------------------------------
// Fidelity under gate noise

/// An exact and a noisy copy of the same initial state, stepped together.
class FidelityRun {
 public:
  FidelityRun(const LatticeSpec &spec, const InitialSource &initial, double epsilon,
              std::uint64_t seed);

  void step();
  std::uint64_t time() const { return t_; }
  double fidelity() const;
  const StateVector &exact() const { return exact_; }
  const StateVector &noisy() const { return noisy_; }

 private:
  CatCircuits circuits_;
  NoiseModel noise_;
  StateVector exact_;
  StateVector noisy_;
  std::uint64_t t_ = 0;
};

/// f(t) = |<psi_eps(t)|psi_0(t)>|^2 for t = 0..t_max.
FidelitySeries fidelity_vs_time(const LatticeSpec &spec, const InitialSource &initial,
                                double epsilon, std::uint64_t t_max, std::uint64_t seed);

struct NoiseSetting {
  double epsilon = 0.0;
  std::uint64_t seed = 1;
};

/// fidelity_vs_time for several (epsilon, seed) pairs at once, sharing one
/// exact reference. Holds runs.size() + 1 state vectors in memory.
std::vector<FidelitySeries> fidelity_ensemble(const LatticeSpec &spec,
                                              const InitialSource &initial,
                                              std::span<const NoiseSetting> runs,
                                              std::uint64_t t_max);

struct TfMeasurement {
  double t_f = 0.0;
  /// True when f stayed >= 0.5 up to t_max; t_f is then t_max.
  bool saturated = false;
};

/// Time at which f(t) first drops below 0.5; epsilon = 0 always saturates.
TfMeasurement find_tf(const LatticeSpec &spec, double epsilon, const InitialSource &initial,
                      std::uint64_t seed, std::uint64_t t_max);

struct TfScanConfig {
  std::vector<unsigned> qubits;
  std::vector<double> epsilons;
  std::vector<std::uint64_t> seeds;
  InitialSource initial = LineInitial{};
  std::uint64_t t_max = 20000;
};

struct TfRow {
  unsigned n_q = 0;
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  double t_f = 0.0;
  bool saturated = false;

  double eps2nq() const { return epsilon * epsilon * n_q; }
};

/// log t_f = log C + slope log(eps^2 n_q); slope is close to -1.
struct TfFit {
  double prefactor = 0.0;
  double slope = 0.0;
  double r_squared = 0.0;
  double rms_residual = 0.0;
  std::size_t points = 0;
};

struct TfScanResult {
  std::vector<TfRow> rows;
  TfFit fit;
};

/// Measures t_f on every (n_q, epsilon, seed) and fits the unsaturated rows.
/// Needs >= 6 grid points and >= 3 seeds.
TfScanResult tf_scan(const TfScanConfig &config);

struct TfGridPoint {
  unsigned n_q = 0;
  double epsilon = 0.0;
  double median_t_f = 0.0;
  double min_t_f = 0.0;
  double max_t_f = 0.0;
  std::size_t runs = 0;
};

/// Median and spread of the unsaturated rows per (n_q, epsilon).
std::vector<TfGridPoint> summarize(const TfScanResult &scan);

// ---------------------------------------------------------------------------
// Classical errors

/// Exact evolution of a reference and a perturbed state; the perturbed one
/// receives `error` right after iteration t_e. Records f_c(t, t_e).
FidelitySeries classical_error_fidelity_drop(const LatticeSpec &spec,
                                             const InitialSource &initial, std::uint64_t t_e,
                                             const ErrorSpec &error, std::uint64_t t_max);

/// Purely classical echo: t_e steps, inversion, error, t_e rotation-first
/// steps, inversion; Bhattacharyya fidelity with the initial density.
double classical_echo_fidelity(const DensityGrid &initial, std::uint64_t t_e,
                               const ErrorSpec &error);

/// The same protocol on the quantum engine with gate noise epsilon_q.
double quantum_echo_fidelity(const LatticeSpec &spec, const InitialSource &initial,
                             std::uint64_t t_e, const ErrorSpec &error, double epsilon_q,
                             std::uint64_t seed);

/// (t_e, f_c(2 t_e)) for each t_e.
FidelitySeries classical_echo_curve(const DensityGrid &initial,
                                    std::span<const std::uint64_t> t_e_values,
                                    const ErrorSpec &error);

// ---------------------------------------------------------------------------
// Non-return estimation

struct NonReturnModel {
  /// Noisy iterations between preparation and measurement (2 t_r for an echo).
  std::uint64_t iterations = 0;
  unsigned n_q = 0;
  /// Prefactor of t_f = C / (eps^2 n_q).
  double prefactor = 0.63;
};

struct NonReturnEstimate {
  double p_nr = 0.0;
  double epsilon_hat = 0.0;
  /// Exact probability of the support, from the state's x marginal.
  double exact_return_mass = 0.0;
  std::uint64_t shots = 0;
};

/// Inverts f = exp(-ln 2 * t eps^2 n_q / C) for epsilon.
double epsilon_from_fidelity(double f, const NonReturnModel &model);

/// Samples the x register; P_nr is the fraction of outcomes outside `support`.
NonReturnEstimate nonreturn_probability(const StateVector &state,
                                        std::span<const std::uint64_t> support,
                                        std::uint64_t shots, std::mt19937_64 &rng,
                                        const NonReturnModel &model);

// ---------------------------------------------------------------------------
// Harmonics

struct Harmonic {
  /// Signed frequency in (-N/2, N/2].
  std::int64_t frequency = 0;
  double weight = 0.0;
};

/// Probability of each frequency 0..N-1 after an exact QFT of one register.
std::vector<double> power_spectrum(const StateVector &state, LatticeAxis axis);

/// The k heaviest frequencies, heaviest first.
std::vector<Harmonic> harmonics(const StateVector &state, LatticeAxis axis, std::size_t k);

}  // namespace catsim
