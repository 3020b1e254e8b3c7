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


#include "catsim/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <string>
#include <thread>

#include "catsim/error.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace catsim {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool requested(const std::vector<std::uint64_t> &times, std::uint64_t t) {
  return std::find(times.begin(), times.end(), t) != times.end();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Runs task(k) for k in [0, count) on a few workers. Each task writes only
/// its own result slot, so the outcome does not depend on scheduling.
template <class Task>
void run_independent(std::size_t count, Task task) {
  const std::size_t workers =
      std::min<std::size_t>(count, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t k = 0; k < count; ++k) {
      task(k);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
#ifdef _OPENMP
      omp_set_num_threads(1);
#endif
      try {
        for (std::size_t k = next++; k < count; k = next++) {
          task(k);
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto &t : pool) {
    t.join();
  }
  for (auto &e : errors) {
    if (e) {
      std::rethrow_exception(e);
    }
  }
}

}  // namespace

DensityGrid smile_density(const LatticeSpec &spec) {
  const std::uint64_t n = spec.size();
  const double nd = static_cast<double>(n);
  // Stroke half-width: two cells at N = 128, never thinner than 0.75 cell.
  const double half = std::max(2.0 / 128.0, 0.75 / nd);
  DensityGrid grid(spec);
  for (std::uint64_t j = 0; j < n; ++j) {
    for (std::uint64_t i = 0; i < n; ++i) {
      const double x = (static_cast<double>(i) + 0.5) / nd;
      const double y = (static_cast<double>(j) + 0.5) / nd;
      const bool outline = std::abs(std::hypot(x - 0.5, y - 0.5) - 0.4) < half;
      const bool eyes = std::hypot(x - 0.35, y - 0.62) < 0.06 || std::hypot(x - 0.65, y - 0.62) < 0.06;
      const bool mouth = std::abs(std::hypot(x - 0.5, y - 0.55) - 0.25) < half && y < 0.45;
      if (outline || eyes || mouth) {
        grid.set({i, j}, 1.0);
      }
    }
  }
  return grid.normalized();
}

DensityGrid initial_density(const LatticeSpec &spec, const InitialSource &initial) {
  return std::visit(
      Overloaded{
          [&](const LineInitial &) {
            DensityGrid grid(spec);
            const double w = 1.0 / static_cast<double>(spec.size());
            for (std::uint64_t j = 0; j < spec.size(); ++j) {
              grid.set({spec.size() / 2, j}, w);
            }
            return grid;
          },
          [&](const PointInitial &p) { return DensityGrid::point_mass(spec, p.cell); },
          [&](const DensityInitial &d) {
            require(d.grid.spec() == spec, "initial density lives on a different lattice");
            return d.grid;
          },
      },
      initial);
}

StateVector prepare_state(const LatticeSpec &spec, const InitialSource &initial) {
  if (std::holds_alternative<LineInitial>(initial)) {
    StateVector state(spec);
    apply_circuit(state, build_line_prep(spec));
    return state;
  }
  return StateVector::from_density(initial_density(spec, initial));
}

StateVector prepare_state(const LatticeSpec &spec, const InitialSource &initial,
                          NoiseModel &noise) {
  if (std::holds_alternative<LineInitial>(initial)) {
    StateVector state(spec);
    apply_circuit(state, build_line_prep(spec), noise);
    return state;
  }
  return prepare_state(spec, initial);
}

CatCircuits CatCircuits::for_spec(const LatticeSpec &spec) {
  return {CompiledCircuit(build_cat_iteration(spec)),
          CompiledCircuit(build_cat_iteration_reversed(spec))};
}

std::optional<double> crossing_time(const FidelitySeries &series, double level) {
  const auto &p = series.points;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k].f < level) {
      if (k == 0) {
        return p[0].t;
      }
      const double df = p[k - 1].f - p[k].f;
      const double frac = df > 0.0 ? (p[k - 1].f - level) / df : 1.0;
      return p[k - 1].t + frac * (p[k].t - p[k - 1].t);
    }
  }
  return std::nullopt;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), "fit_line needs equally many x and y values");
  require(x.size() >= 2, "fit_line needs at least two points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
    syy += (y[k] - my) * (y[k] - my);
  }
  require(sxx > 0.0, "fit_line needs at least two distinct x values");
  LineFit fit;
  fit.points = x.size();
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double r = y[k] - (fit.intercept + fit.slope * x[k]);
    ss_res += r * r;
  }
  fit.rms_residual = std::sqrt(ss_res / n);
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

EchoResult run_echo(const EchoConfig &config) {
  const LatticeSpec &spec = config.spec;
  for (std::uint64_t t : config.snapshot_times) {
    require(t <= 2 * config.t_r, "snapshot time " + std::to_string(t) + " outside [0, 2 t_r]");
  }
  if (config.classical_error) {
    validate(*config.classical_error, spec);
  }
  const CatCircuits circuits = CatCircuits::for_spec(spec);
  const LatticePermutation negate = momentum_negation(spec);
  NoiseModel noise(config.epsilon_q, config.seed);

  StateVector state = config.noisy_preparation ? prepare_state(spec, config.initial, noise)
                                               : prepare_state(spec, config.initial);
  const StateVector initial = state;

  std::vector<EchoSnapshot> snapshots;
  auto record = [&](std::uint64_t t, bool inverted_frame) {
    if (!requested(config.snapshot_times, t)) {
      return;
    }
    DensityGrid rho = density_xy(state);
    if (inverted_frame) {
      rho = push_forward(rho, negate);
    }
    snapshots.push_back({t, std::move(rho)});
  };

  record(0, false);
  for (std::uint64_t t = 1; t <= config.t_r; ++t) {
    apply_circuit(state, circuits.forward, noise);
    record(t, false);
  }
  apply_lattice_permutation(state, negate);
  if (config.classical_error) {
    apply_lattice_permutation(state, error_permutation(*config.classical_error, spec));
  }
  for (std::uint64_t s = 1; s <= config.t_r; ++s) {
    apply_circuit(state, circuits.reversed, noise);
    if (s < config.t_r) {
      record(config.t_r + s, true);
    }
  }
  apply_lattice_permutation(state, negate);
  if (config.t_r > 0) {
    record(2 * config.t_r, false);
  }

  const double f = fidelity(state, initial);
  return EchoResult{std::move(snapshots), f, initial, std::move(state)};
}

FidelityRun::FidelityRun(const LatticeSpec &spec, const InitialSource &initial, double epsilon,
                         std::uint64_t seed)
    : circuits_(CatCircuits::for_spec(spec)),
      noise_(epsilon, seed),
      exact_(prepare_state(spec, initial)),
      noisy_(exact_) {}

void FidelityRun::step() {
  apply_circuit(exact_, circuits_.forward);
  apply_circuit(noisy_, circuits_.forward, noise_);
  ++t_;
}

double FidelityRun::fidelity() const { return catsim::fidelity(noisy_, exact_); }

FidelitySeries fidelity_vs_time(const LatticeSpec &spec, const InitialSource &initial,
                                double epsilon, std::uint64_t t_max, std::uint64_t seed) {
  require(t_max >= 1, "fidelity_vs_time needs t_max >= 1");
  FidelityRun run(spec, initial, epsilon, seed);
  FidelitySeries series;
  series.points.reserve(t_max + 1);
  series.points.push_back({0.0, run.fidelity()});
  for (std::uint64_t t = 1; t <= t_max; ++t) {
    run.step();
    series.points.push_back({static_cast<double>(t), run.fidelity()});
  }
  return series;
}

std::vector<FidelitySeries> fidelity_ensemble(const LatticeSpec &spec,
                                              const InitialSource &initial,
                                              std::span<const NoiseSetting> runs,
                                              std::uint64_t t_max) {
  require(t_max >= 1, "fidelity_ensemble needs t_max >= 1");
  require(!runs.empty(), "fidelity_ensemble needs at least one run");
  const CatCircuits circuits = CatCircuits::for_spec(spec);
  StateVector exact = prepare_state(spec, initial);
  std::vector<NoiseModel> noise;
  for (const NoiseSetting &r : runs) {
    noise.emplace_back(r.epsilon, r.seed);
  }
  std::vector<StateVector> noisy(runs.size(), exact);
  std::vector<FidelitySeries> series(runs.size());
  for (std::size_t k = 0; k < runs.size(); ++k) {
    series[k].points.reserve(t_max + 1);
    series[k].points.push_back({0.0, fidelity(noisy[k], exact)});
  }
  for (std::uint64_t t = 1; t <= t_max; ++t) {
    apply_circuit(exact, circuits.forward);
    for (std::size_t k = 0; k < runs.size(); ++k) {
      apply_circuit(noisy[k], circuits.forward, noise[k]);
      series[k].points.push_back({static_cast<double>(t), fidelity(noisy[k], exact)});
    }
  }
  return series;
}

TfMeasurement find_tf(const LatticeSpec &spec, double epsilon, const InitialSource &initial,
                      std::uint64_t seed, std::uint64_t t_max) {
  require(epsilon >= 0.0, "noise amplitude must be >= 0");
  require(t_max >= 1, "find_tf needs t_max >= 1");
  FidelityRun run(spec, initial, epsilon, seed);
  double previous = run.fidelity();
  while (run.time() < t_max) {
    run.step();
    const double f = run.fidelity();
    if (f < 0.5) {
      const double frac = (previous - 0.5) / (previous - f);
      return {static_cast<double>(run.time() - 1) + frac, false};
    }
    previous = f;
  }
  return {static_cast<double>(t_max), true};
}

TfScanResult tf_scan(const TfScanConfig &config) {
  require(config.qubits.size() * config.epsilons.size() >= 6,
          "t_f scan needs at least 6 (n_q, epsilon) grid points");
  require(config.seeds.size() >= 3, "t_f scan needs at least 3 seeds per grid point");
  for (double eps : config.epsilons) {
    require(eps > 0.0, "t_f scan needs epsilon > 0");
  }

  TfScanResult result;
  for (unsigned nq : config.qubits) {
    for (double eps : config.epsilons) {
      for (std::uint64_t seed : config.seeds) {
        result.rows.push_back({nq, eps, seed, 0.0, false});
      }
    }
  }
  run_independent(result.rows.size(), [&](std::size_t k) {
    TfRow &row = result.rows[k];
    const LatticeSpec spec(row.n_q);
    const TfMeasurement m = find_tf(spec, row.epsilon, config.initial, row.seed, config.t_max);
    row.t_f = m.t_f;
    row.saturated = m.saturated;
  });

  std::vector<double> x, y;
  for (const TfRow &row : result.rows) {
    if (!row.saturated) {
      x.push_back(std::log(row.eps2nq()));
      y.push_back(std::log(row.t_f));
    }
  }
  const bool distinct = !x.empty() && std::any_of(x.begin(), x.end(), [&](double v) {
    return v != x.front();
  });
  if (x.size() < 2 || !distinct) {
    throw ValidationError("t_f scan has too few unsaturated points to fit");
  }
  const LineFit fit = fit_line(x, y);
  result.fit = {std::exp(fit.intercept), fit.slope, fit.r_squared, fit.rms_residual, fit.points};
  return result;
}

std::vector<TfGridPoint> summarize(const TfScanResult &scan) {
  std::vector<TfGridPoint> out;
  for (const TfRow &row : scan.rows) {
    auto it = std::find_if(out.begin(), out.end(), [&](const TfGridPoint &g) {
      return g.n_q == row.n_q && g.epsilon == row.epsilon;
    });
    if (it == out.end()) {
      out.push_back({row.n_q, row.epsilon, 0.0, 0.0, 0.0, 0});
    }
  }
  for (TfGridPoint &g : out) {
    std::vector<double> values;
    for (const TfRow &row : scan.rows) {
      if (row.n_q == g.n_q && row.epsilon == g.epsilon && !row.saturated) {
        values.push_back(row.t_f);
      }
    }
    g.runs = values.size();
    if (!values.empty()) {
      g.median_t_f = median(values);
      g.min_t_f = *std::min_element(values.begin(), values.end());
      g.max_t_f = *std::max_element(values.begin(), values.end());
    }
  }
  return out;
}

FidelitySeries classical_error_fidelity_drop(const LatticeSpec &spec,
                                             const InitialSource &initial, std::uint64_t t_e,
                                             const ErrorSpec &error, std::uint64_t t_max) {
  require(t_e < t_max, "the error time must precede t_max");
  const LatticePermutation perturb = error_permutation(error, spec);
  const CatCircuits circuits = CatCircuits::for_spec(spec);
  StateVector reference = prepare_state(spec, initial);
  FidelitySeries series;
  series.points.reserve(t_max + 1);
  // Until t_e both copies coincide, so only the reference is evolved.
  for (std::uint64_t t = 0; t < t_e; ++t) {
    series.points.push_back({static_cast<double>(t), 1.0});
    apply_circuit(reference, circuits.forward);
  }
  StateVector perturbed = reference;
  apply_lattice_permutation(perturbed, perturb);
  series.points.push_back({static_cast<double>(t_e), fidelity(perturbed, reference)});
  for (std::uint64_t t = t_e + 1; t <= t_max; ++t) {
    apply_circuit(reference, circuits.forward);
    apply_circuit(perturbed, circuits.forward);
    series.points.push_back({static_cast<double>(t), fidelity(perturbed, reference)});
  }
  return series;
}

double classical_echo_fidelity(const DensityGrid &initial, std::uint64_t t_e,
                               const ErrorSpec &error) {
  const LatticeSpec &spec = initial.spec();
  const LatticePermutation negate = momentum_negation(spec);
  DensityGrid rho = evolve_density(initial, t_e, StepOrder::Forward);
  rho = push_forward(rho, negate);
  rho = apply_classical_error(rho, error);
  rho = evolve_density(rho, t_e, StepOrder::Reversed);
  rho = push_forward(rho, negate);
  return bhattacharyya_fidelity(rho, initial);
}

double quantum_echo_fidelity(const LatticeSpec &spec, const InitialSource &initial,
                             std::uint64_t t_e, const ErrorSpec &error, double epsilon_q,
                             std::uint64_t seed) {
  EchoConfig config;
  config.spec = spec;
  config.t_r = t_e;
  config.epsilon_q = epsilon_q;
  config.classical_error = error;
  config.initial = initial;
  config.seed = seed;
  return run_echo(config).return_fidelity;
}

FidelitySeries classical_echo_curve(const DensityGrid &initial,
                                    std::span<const std::uint64_t> t_e_values,
                                    const ErrorSpec &error) {
  FidelitySeries series;
  for (std::uint64_t te : t_e_values) {
    series.points.push_back({static_cast<double>(te), classical_echo_fidelity(initial, te, error)});
  }
  return series;
}

double epsilon_from_fidelity(double f, const NonReturnModel &model) {
  require(model.iterations > 0 && model.n_q > 0 && model.prefactor > 0.0,
          "non-return model needs iterations, n_q and a positive prefactor");
  require(f > 0.0, "fidelity estimate must be positive");
  if (f >= 1.0) {
    return 0.0;
  }
  const double rate = std::log(1.0 / f) * model.prefactor /
                      (std::log(2.0) * static_cast<double>(model.iterations) * model.n_q);
  return std::sqrt(rate);
}

NonReturnEstimate nonreturn_probability(const StateVector &state,
                                        std::span<const std::uint64_t> support,
                                        std::uint64_t shots, std::mt19937_64 &rng,
                                        const NonReturnModel &model) {
  require(shots >= 1, "need at least one shot");
  const std::uint64_t n = state.spec().size();
  std::vector<bool> in_support(n, false);
  for (std::uint64_t x : support) {
    require(x < n, "support value outside the register");
    in_support[x] = true;
  }
  const std::vector<double> wx = marginal_x(state);
  NonReturnEstimate est;
  est.shots = shots;
  for (std::uint64_t x = 0; x < n; ++x) {
    if (in_support[x]) {
      est.exact_return_mass += wx[x];
    }
  }
  std::uint64_t away = 0;
  for (std::uint64_t x : sample_register(state, LatticeAxis::X, shots, rng)) {
    away += in_support[x] ? 0 : 1;
  }
  est.p_nr = static_cast<double>(away) / static_cast<double>(shots);
  // Never take the log of zero: an all-miss run caps at half a shot.
  const double f_hat = std::max(1.0 - est.p_nr, 0.5 / static_cast<double>(shots));
  est.epsilon_hat = epsilon_from_fidelity(f_hat, model);
  return est;
}

std::vector<double> power_spectrum(const StateVector &state, LatticeAxis axis) {
  const LatticeSpec &spec = state.spec();
  const RegisterLayout layout = RegisterLayout::for_spec(spec);
  const Register &reg = axis == LatticeAxis::X ? layout.x : layout.y;
  StateVector work = state;
  apply_circuit(work, build_qft(reg, layout.qubit_count));
  const std::vector<double> measured = marginal(work, axis);
  std::vector<double> spectrum(measured.size(), 0.0);
  for (std::uint64_t v = 0; v < measured.size(); ++v) {
    spectrum[reverse_bits(v, reg.width)] = measured[v];
  }
  return spectrum;
}

std::vector<Harmonic> harmonics(const StateVector &state, LatticeAxis axis, std::size_t k) {
  const std::int64_t n = static_cast<std::int64_t>(state.spec().size());
  require(k <= static_cast<std::size_t>(n), "cannot ask for more harmonics than frequencies");
  const std::vector<double> spectrum = power_spectrum(state, axis);
  std::vector<std::int64_t> order(spectrum.size());
  std::iota(order.begin(), order.end(), std::int64_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::int64_t a, std::int64_t b) { return spectrum[a] > spectrum[b]; });
  std::vector<Harmonic> out;
  for (std::size_t r = 0; r < k; ++r) {
    const std::int64_t f = order[r];
    out.push_back({f <= n / 2 ? f : f - n, spectrum[f]});
  }
  return out;
}

}  // namespace catsim
