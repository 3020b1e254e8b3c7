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


#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <deque>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include "catsim/circuit.hpp"
#include "catsim/classical_cat.hpp"
#include "catsim/error.hpp"
#include "catsim/experiments.hpp"
#include "catsim/io.hpp"
#include "catsim/state_vector.hpp"

namespace catsim::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Options {
  unsigned nq = 7;
  std::uint64_t seed = 1;
  std::string out_dir = "catsim_out";
  std::string initial = "line";
  std::string format = "binary";
  unsigned max_qubits = 27;

  std::uint64_t steps = 10;
  std::string order = "forward";
  double eps = 0.0;
  double eps_q = 0.0;
  std::uint64_t t_r = 10;
  std::string error = "none";
  std::string axes = "both";
  bool noisy_prep = false;
  std::vector<std::uint64_t> snapshots;
  std::uint64_t t_max = 400;
  std::uint64_t scan_t_max = 20000;
  std::vector<std::uint64_t> t_e;
  std::vector<unsigned> nq_list{4, 5, 6};
  std::vector<double> eps_list{0.01, 0.03, 0.1};
  unsigned seeds = 5;
  std::string axis = "x";
  std::size_t k = 8;
  std::uint64_t shots = 10000;
  double prefactor = 0.63;
  bool print = false;
};

struct Outcome {
  std::string line;
  json summary = json::object();
  std::vector<std::string> files;
  bool ok = true;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::vector<std::string> split(const std::string &s, char sep) {
  std::vector<std::string> parts;
  std::stringstream in(s);
  for (std::string p; std::getline(in, p, sep);) parts.push_back(p);
  return parts;
}

std::uint64_t parse_uint(const std::string &s, const std::string &what) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(s, &used);
    require(used == s.size() && s.find('-') == std::string::npos, "");
    return v;
  } catch (const std::exception &) {
    throw ValidationError("bad " + what + ": '" + s + "'");
  }
}

InitialSource parse_initial(const std::string &text, const LatticeSpec &spec) {
  if (text == "line") return LineInitial{};
  if (text == "smile") return DensityInitial{smile_density(spec)};
  if (text.rfind("point:", 0) == 0) {
    const auto ij = split(text.substr(6), ',');
    require(ij.size() == 2, "point initial state needs point:i,j");
    const CellIndex cell{parse_uint(ij[0], "point index"), parse_uint(ij[1], "point index")};
    require(contains(spec, cell), "point " + text.substr(6) + " is outside the lattice");
    return PointInitial{cell};
  }
  if (text.rfind("image:", 0) == 0) {
    return DensityInitial{read_density_pgm(text.substr(6), spec)};
  }
  throw ValidationError("unknown initial state '" + text +
                        "' (expected line, smile, point:i,j or image:path)");
}

ErrorAxes parse_axes(const std::string &text) {
  if (text == "x") return ErrorAxes::X;
  if (text == "y") return ErrorAxes::Y;
  return ErrorAxes::Both;
}

std::optional<ErrorSpec> parse_error(const std::string &text, const std::string &axes,
                                     const LatticeSpec &spec) {
  if (text == "none") return std::nullopt;
  if (text == "lsb") return ErrorSpec::lsb_flip(parse_axes(axes));
  if (text.rfind("shift:", 0) == 0) {
    const auto d = split(text.substr(6), ',');
    require(d.size() == 2, "shift error needs shift:di,dj");
    ErrorSpec e = ErrorSpec::shift(parse_uint(d[0], "shift"), parse_uint(d[1], "shift"));
    validate(e, spec);
    return e;
  }
  if (text.rfind("amp:", 0) == 0) {
    double a = 0.0;
    try {
      a = std::stod(text.substr(4));
    } catch (const std::exception &) {
      throw ValidationError("bad error amplitude '" + text.substr(4) + "'");
    }
    return ErrorSpec::from_amplitude(a, spec, parse_axes(axes));
  }
  throw ValidationError("unknown error '" + text + "' (expected none, lsb, shift:di,dj or amp:a)");
}

PgmFormat parse_format(const std::string &text) {
  return text == "ascii" ? PgmFormat::Ascii : PgmFormat::Binary;
}

void require_qubits(unsigned nq, const Options &o) {
  const unsigned qubits = 3 * nq - 1;
  require(qubits <= StateVector::kMaxQubits,
          "n_q = " + std::to_string(nq) + " needs " + std::to_string(qubits) +
              " qubits; state vectors beyond " + std::to_string(StateVector::kMaxQubits) +
              " qubits are refused");
  require(qubits <= o.max_qubits, "n_q = " + std::to_string(nq) + " needs " +
                                      std::to_string(qubits) + " qubits, above --max-qubits " +
                                      std::to_string(o.max_qubits));
}

class Outputs {
 public:
  explicit Outputs(const Options &o) : dir_(o.out_dir), format_(parse_format(o.format)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw RuntimeError("cannot create output directory " + dir_.string());
  }

  std::string pgm(const std::string &name, const DensityGrid &grid, Outcome &r) const {
    const fs::path p = dir_ / name;
    write_density_pgm(grid, p, format_);
    r.files.push_back(p.string());
    return p.string();
  }
  std::string csv(const std::string &name, const FidelitySeries &s, const SeriesColumns &cols,
                  const std::vector<std::string> &comments, Outcome &r) const {
    const fs::path p = dir_ / name;
    write_series_csv(s, p, cols, comments);
    r.files.push_back(p.string());
    return p.string();
  }
  std::string text(const std::string &name, const std::string &content, Outcome &r) const {
    const fs::path p = dir_ / name;
    write_file_atomic(p, content);
    r.files.push_back(p.string());
    return p.string();
  }
  const fs::path &dir() const { return dir_; }

 private:
  fs::path dir_;
  PgmFormat format_;
};

// ---------------------------------------------------------------------------
// Subcommands

Outcome classical_evolve(const Options &o) {
  const LatticeSpec spec(o.nq);
  const Outputs out(o);
  Outcome r;
  const DensityGrid start = initial_density(spec, parse_initial(o.initial, spec));
  const StepOrder order = o.order == "reversed" ? StepOrder::Reversed : StepOrder::Forward;
  const DensityGrid end = evolve_density(start, o.steps, order);
  out.pgm("classical_initial.pgm", start, r);
  const std::string path = out.pgm("classical_final.pgm", end, r);
  const auto w = end.weights();
  const auto support = std::count_if(w.begin(), w.end(), [](double v) { return v > 0; });
  r.summary = {{"steps", o.steps}, {"order", o.order}, {"support_cells", support}};
  r.line = "classical-evolve n_q=" + std::to_string(o.nq) + " steps=" + std::to_string(o.steps) +
           " support=" + std::to_string(support) + " wrote " + path;
  return r;
}

Outcome quantum_evolve(const Options &o) {
  require_qubits(o.nq, o);
  const LatticeSpec spec(o.nq);
  const Outputs out(o);
  Outcome r;
  const InitialSource init = parse_initial(o.initial, spec);
  NoiseModel noise(o.eps, o.seed);
  StateVector s = o.noisy_prep ? prepare_state(spec, init, noise) : prepare_state(spec, init);
  const CatCircuits circuits = CatCircuits::for_spec(spec);
  for (std::uint64_t t = 0; t < o.steps; ++t) {
    if (o.eps > 0.0) {
      apply_circuit(s, circuits.forward, noise);
    } else {
      apply_circuit(s, circuits.forward);
    }
  }
  const DensityGrid rho = density_xy(s);
  const std::string path = out.pgm("quantum_final.pgm", rho, r);
  const double overlap =
      bhattacharyya_fidelity(rho, evolve_density(initial_density(spec, init), o.steps));
  const double norm_error = std::abs(s.norm_squared() - 1.0);
  const double leakage = carry_leakage(s);
  r.summary = {{"steps", o.steps},
               {"epsilon", o.eps},
               {"norm_error", norm_error},
               {"carry_leakage", leakage},
               {"classical_overlap", overlap},
               {"noise_draws", noise.draws()}};
  r.line = "quantum-evolve n_q=" + std::to_string(o.nq) + " eps=" + fmt(o.eps) +
           " steps=" + std::to_string(o.steps) + " norm_error=" + fmt(norm_error) +
           " carry_leakage=" + fmt(leakage) + " classical_overlap=" + fmt(overlap) + " wrote " +
           path;
  return r;
}

Outcome echo(const Options &o) {
  require_qubits(o.nq, o);
  EchoConfig cfg;
  cfg.spec = LatticeSpec(o.nq);
  cfg.t_r = o.t_r;
  cfg.epsilon_q = o.eps;
  cfg.classical_error = parse_error(o.error, o.axes, cfg.spec);
  cfg.initial = parse_initial(o.initial, cfg.spec);
  cfg.seed = o.seed;
  cfg.noisy_preparation = o.noisy_prep;
  cfg.snapshot_times = o.snapshots;
  if (cfg.snapshot_times.empty()) {
    cfg.snapshot_times = {0, o.t_r / 2, o.t_r, 2 * o.t_r};
  }
  std::sort(cfg.snapshot_times.begin(), cfg.snapshot_times.end());
  cfg.snapshot_times.erase(std::unique(cfg.snapshot_times.begin(), cfg.snapshot_times.end()),
                           cfg.snapshot_times.end());
  const Outputs out(o);
  const EchoResult res = run_echo(cfg);
  Outcome r;
  for (const EchoSnapshot &snap : res.snapshots) {
    out.pgm("echo_t" + std::to_string(snap.t) + ".pgm", snap.density, r);
  }
  r.summary = {{"t_r", o.t_r},
               {"epsilon_q", o.eps},
               {"classical_error", o.error},
               {"snapshot_times", cfg.snapshot_times},
               {"return_fidelity", res.return_fidelity}};
  r.line = "echo n_q=" + std::to_string(o.nq) + " t_r=" + std::to_string(o.t_r) +
           " eps=" + fmt(o.eps) + " error=" + o.error +
           " return_fidelity=" + fmt(res.return_fidelity) + " snapshots=" +
           std::to_string(res.snapshots.size());
  return r;
}

Outcome fidelity_cmd(const Options &o) {
  require_qubits(o.nq, o);
  const LatticeSpec spec(o.nq);
  const Outputs out(o);
  Outcome r;
  const FidelitySeries s =
      fidelity_vs_time(spec, parse_initial(o.initial, spec), o.eps, o.t_max, o.seed);
  const std::string path =
      out.csv("fidelity.csv", s, {},
              {"n_q=" + std::to_string(o.nq) + " eps=" + format_real(o.eps) +
               " seed=" + std::to_string(o.seed) + " initial=" + o.initial},
              r);
  const auto tf = crossing_time(s);
  r.summary = {{"epsilon", o.eps}, {"t_max", o.t_max}, {"final_fidelity", s.points.back().f}};
  r.summary["t_f"] = tf ? json(*tf) : json(nullptr);
  r.line = "fidelity n_q=" + std::to_string(o.nq) + " eps=" + fmt(o.eps) +
           " t_max=" + std::to_string(o.t_max) + " f_final=" + fmt(s.points.back().f) +
           " t_f=" + (tf ? fmt(*tf) : std::string("none")) + " wrote " + path;
  return r;
}

Outcome classical_echo(const Options &o, bool with_quantum) {
  const LatticeSpec spec(o.nq);
  if (with_quantum) require_qubits(o.nq, o);
  const Outputs out(o);
  Outcome r;
  const InitialSource init = parse_initial(o.initial, spec);
  const DensityGrid grid = initial_density(spec, init);
  const std::string &error_text = o.error;
  const ErrorSpec error = parse_error(error_text, o.axes, spec).value_or(ErrorSpec::shift(0, 0));
  std::vector<std::uint64_t> tes = o.t_e;
  if (tes.empty()) {
    for (std::uint64_t t = 1; t <= 15; ++t) tes.push_back(t);
  }
  for (std::uint64_t t : tes) require(t >= 1, "t_e values must be >= 1");
  const FidelitySeries curve = classical_echo_curve(grid, tes, error);
  const std::vector<std::string> comments{"n_q=" + std::to_string(o.nq) + " error=" + error_text +
                                          " initial=" + o.initial};
  const std::string path = out.csv("classical_echo.csv", curve, {"te", "fc"}, comments, r);
  const auto tf = crossing_time(curve);
  r.summary = {{"error", error_text}, {"t_e", tes}};
  r.summary["classical_t_f"] = tf ? json(*tf) : json(nullptr);
  if (with_quantum) {
    FidelitySeries q;
    for (std::uint64_t t : tes) {
      q.points.push_back(
          {static_cast<double>(t), quantum_echo_fidelity(spec, init, t, error, o.eps_q, o.seed)});
    }
    std::vector<std::string> qc = comments;
    qc.push_back("eps_q=" + format_real(o.eps_q) + " seed=" + std::to_string(o.seed));
    out.csv("quantum_echo.csv", q, {"te", "fc"}, qc, r);
    double worst = 0.0;
    for (std::size_t k = 0; k < q.points.size(); ++k) {
      worst = std::max(worst, std::abs(q.points[k].f - curve.points[k].f));
    }
    r.summary["epsilon_q"] = o.eps_q;
    r.summary["max_quantum_classical_gap"] = worst;
  }
  r.line = "classical-echo n_q=" + std::to_string(o.nq) + " error=" + error_text +
           " points=" + std::to_string(curve.points.size()) +
           " t_f=" + (tf ? fmt(*tf) : std::string("none")) + " wrote " + path;
  return r;
}

Outcome tf_scan_cmd(const Options &o) {
  for (unsigned nq : o.nq_list) {
    require(nq >= 1 && nq <= 14, "n_q values must lie in [1, 14]");
    require_qubits(nq, o);
  }
  TfScanConfig cfg;
  cfg.qubits = o.nq_list;
  cfg.epsilons = o.eps_list;
  for (unsigned s = 0; s < o.seeds; ++s) cfg.seeds.push_back(o.seed + s);
  cfg.initial = LineInitial{};
  cfg.t_max = o.scan_t_max;
  const Outputs out(o);
  Outcome r;
  const TfScanResult scan = tf_scan(cfg);
  const fs::path path = out.dir() / "tf_scan.csv";
  write_tf_scan_csv(scan, path);
  r.files.push_back(path.string());
  json rows = json::array();
  std::size_t saturated = 0;
  for (const TfRow &row : scan.rows) {
    rows.push_back({{"n_q", row.n_q},
                    {"epsilon", row.epsilon},
                    {"seed", row.seed},
                    {"t_f", row.t_f},
                    {"saturated", row.saturated}});
    saturated += row.saturated ? 1 : 0;
  }
  r.summary = {{"prefactor", scan.fit.prefactor},     {"slope", scan.fit.slope},
               {"r_squared", scan.fit.r_squared},     {"rms_residual", scan.fit.rms_residual},
               {"fit_points", scan.fit.points},       {"saturated_runs", saturated},
               {"rows", rows}};
  r.line = "tf-scan runs=" + std::to_string(scan.rows.size()) + " C=" + fmt(scan.fit.prefactor) +
           " slope=" + fmt(scan.fit.slope) + " r2=" + fmt(scan.fit.r_squared) +
           " saturated=" + std::to_string(saturated) + " wrote " + path.string();
  return r;
}

Outcome harmonics_cmd(const Options &o) {
  require_qubits(o.nq, o);
  const LatticeSpec spec(o.nq);
  require(o.k >= 1 && o.k <= spec.size(), "--k must lie in [1, N]");
  const Outputs out(o);
  Outcome r;
  StateVector s = prepare_state(spec, parse_initial(o.initial, spec));
  const CatCircuits circuits = CatCircuits::for_spec(spec);
  for (std::uint64_t t = 0; t < o.steps; ++t) apply_circuit(s, circuits.forward);
  const LatticeAxis axis = o.axis == "y" ? LatticeAxis::Y : LatticeAxis::X;
  const auto top = harmonics(s, axis, o.k);
  std::string csv = "frequency,weight\n";
  json list = json::array();
  for (const Harmonic &h : top) {
    csv += std::to_string(h.frequency) + "," + format_real(h.weight) + "\n";
    list.push_back({{"frequency", h.frequency}, {"weight", h.weight}});
  }
  const std::string path = out.text("harmonics.csv", csv, r);
  r.summary = {{"axis", o.axis}, {"steps", o.steps}, {"harmonics", list}};
  r.line = "harmonics n_q=" + std::to_string(o.nq) + " axis=" + o.axis +
           " steps=" + std::to_string(o.steps) + " top=" + std::to_string(top[0].frequency) +
           " weight=" + fmt(top[0].weight) + " wrote " + path;
  return r;
}

Outcome nonreturn_cmd(const Options &o) {
  require_qubits(o.nq, o);
  EchoConfig cfg;
  cfg.spec = LatticeSpec(o.nq);
  cfg.t_r = o.t_r;
  cfg.epsilon_q = o.eps;
  cfg.initial = parse_initial(o.initial, cfg.spec);
  cfg.seed = o.seed;
  cfg.noisy_preparation = o.noisy_prep;
  const Outputs out(o);
  Outcome r;
  const EchoResult res = run_echo(cfg);
  const std::vector<double> w0 = marginal_x(res.initial_state);
  std::vector<std::uint64_t> support;
  for (std::uint64_t x = 0; x < w0.size(); ++x) {
    if (w0[x] > 0.0) support.push_back(x);
  }
  // Measurement randomness is kept apart from the gate-noise stream.
  std::seed_seq seq{o.seed, std::uint64_t{0x6d656173}};
  std::mt19937_64 rng(seq);
  const NonReturnModel model{2 * o.t_r, o.nq, o.prefactor};
  const NonReturnEstimate est = nonreturn_probability(res.final_state, support, o.shots, rng, model);
  const std::vector<double> wx = marginal_x(res.final_state);
  std::string csv = "x,w\n";
  for (std::uint64_t x = 0; x < wx.size(); ++x) csv += std::to_string(x) + "," + format_real(wx[x]) + "\n";
  const std::string path = out.text("nonreturn_wx.csv", csv, r);
  r.summary = {{"t_r", o.t_r},
               {"epsilon", o.eps},
               {"shots", o.shots},
               {"prefactor", o.prefactor},
               {"p_nr", est.p_nr},
               {"exact_p_nr", 1.0 - est.exact_return_mass},
               {"epsilon_hat", est.epsilon_hat}};
  r.line = "nonreturn n_q=" + std::to_string(o.nq) + " eps=" + fmt(o.eps) +
           " t_r=" + std::to_string(o.t_r) + " shots=" + std::to_string(o.shots) +
           " p_nr=" + fmt(est.p_nr) + " exact=" + fmt(1.0 - est.exact_return_mass) +
           " eps_hat=" + fmt(est.epsilon_hat) + " wrote " + path;
  return r;
}

Outcome gate_count_cmd(const Options &o) {
  const LatticeSpec spec(o.nq);
  const Circuit it = build_cat_iteration(spec);
  const GateCount gc = count_gates(it);
  const Outputs out(o);
  Outcome r;
  if (o.print) out.text("cat_iteration.txt", to_string(it), r);
  r.summary = {{"qubits", it.qubit_count()},
               {"toffoli", gc.of(GateKind::Toffoli)},
               {"cnot", gc.of(GateKind::Cnot)},
               {"total", gc.total}};
  r.line = "qubits=" + std::to_string(it.qubit_count()) +
           " toffoli=" + std::to_string(gc.of(GateKind::Toffoli)) +
           " cnot=" + std::to_string(gc.of(GateKind::Cnot)) + " total=" + std::to_string(gc.total);
  return r;
}

Outcome verify_cmd(const Options &o) {
  const LatticeSpec spec(o.nq);
  const Outputs out(o);
  Outcome r;
  const AdderReport adder = verify_adder(std::min(o.nq, 8u));
  const Circuit fwd = build_cat_iteration(spec);
  const Circuit rev = build_cat_iteration_reversed(spec);
  // Exhaustive up to 2^20 cells, a fixed random sample beyond.
  const bool exhaustive = o.nq <= 10;
  std::vector<std::uint64_t> cells;
  if (exhaustive) {
    cells.resize(spec.cell_count());
    for (std::uint64_t k = 0; k < cells.size(); ++k) cells[k] = k;
  } else {
    std::mt19937_64 rng(o.seed);
    std::uniform_int_distribution<std::uint64_t> u(0, spec.cell_count() - 1);
    for (int k = 0; k < 100000; ++k) cells.push_back(u(rng));
  }
  std::uint64_t fwd_ok = 0, rev_ok = 0;
  for (std::uint64_t k : cells) {
    const CellIndex c = cell_at(spec, k);
    fwd_ok += apply_to_basis(fwd, k) == flat_index(spec, cat_step(c, spec));
    rev_ok += apply_to_basis(rev, k) == flat_index(spec, cat_step_reversed(c, spec));
  }
  r.ok = adder.passed() && fwd_ok == cells.size() && rev_ok == cells.size();
  const std::string n = std::to_string(cells.size());
  r.summary = {{"adder_width", adder.width},
               {"adder_inputs", adder.inputs_checked},
               {"adder_passed", adder.inputs_passed},
               {"map_exhaustive", exhaustive},
               {"map_states", cells.size()},
               {"forward_passed", fwd_ok},
               {"reversed_passed", rev_ok},
               {"ok", r.ok}};
  if (adder.counterexample) {
    r.summary["adder_counterexample"] = {{"a", adder.counterexample->a},
                                         {"b", adder.counterexample->b}};
  }
  r.line = "verify n_q=" + std::to_string(o.nq) + " adder=" + std::to_string(adder.inputs_passed) +
           "/" + std::to_string(adder.inputs_checked) + " forward=" + std::to_string(fwd_ok) + "/" +
           n + " reversed=" + std::to_string(rev_ok) + "/" + n + (r.ok ? " ok" : " FAILED");
  return r;
}

// ---------------------------------------------------------------------------
// Command-line wiring

json option_values(const CLI::App &sub) {
  json config = json::object();
  for (const CLI::Option *opt : sub.get_options()) {
    const std::string name = opt->get_lnames().empty() ? opt->get_name() : opt->get_lnames()[0];
    if (name == "help") continue;
    if (opt->get_items_expected_max() == 0) {
      config[name] = opt->count() > 0;
    } else if (opt->count() > 0) {
      const auto &res = opt->results();
      config[name] = res.size() == 1 ? json(res[0]) : json(res);
    } else {
      config[name] = opt->get_default_str();
    }
  }
  return config;
}

void add_common(CLI::App *sub, Options &o, bool quantum) {
  sub->add_option("--nq", o.nq, "Qubits per register, N = 2^nq")
      ->check(CLI::Range(1u, 14u))
      ->capture_default_str();
  sub->add_option("--out", o.out_dir, "Output directory")->capture_default_str();
  if (quantum) {
    sub->add_option("--seed", o.seed, "Noise seed")->capture_default_str();
    sub->add_option("--max-qubits", o.max_qubits, "Largest state vector to simulate")
        ->check(CLI::Range(1u, StateVector::kMaxQubits))
        ->capture_default_str();
  }
}

void add_initial(CLI::App *sub, Options &o) {
  sub->add_option("--initial", o.initial, "line | smile | point:i,j | image:path")
      ->capture_default_str();
}

void add_format(CLI::App *sub, Options &o) {
  sub->add_option("--format", o.format, "PGM encoding")
      ->check(CLI::IsMember({"ascii", "binary"}))
      ->capture_default_str();
}

void add_error(CLI::App *sub, Options &o, const std::string &fallback) {
  o.error = fallback;
  sub->add_option("--error", o.error, "Classical error: none | lsb | shift:di,dj | amp:a")
      ->capture_default_str();
  sub->add_option("--error-axes", o.axes, "Axes displaced by lsb/amp errors")
      ->check(CLI::IsMember({"x", "y", "both"}))
      ->capture_default_str();
}

}  // namespace

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  // One options record per subcommand so defaults never leak between them.
  std::deque<Options> store;
  CLI::App app{"Quantum and classical simulation of the Arnold cat map", "catsim"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  std::map<CLI::App *, std::function<Outcome()>> actions;
  std::map<CLI::App *, const Options *> chosen_options;

  Options &ce_opts = store.emplace_back();
  auto *ce = app.add_subcommand("classical-evolve", "Evolve a density with the exact lattice map");
  add_common(ce, ce_opts, false);
  add_initial(ce, ce_opts);
  add_format(ce, ce_opts);
  ce->add_option("--steps", ce_opts.steps, "Iterations")->capture_default_str();
  ce->add_option("--order", ce_opts.order, "Step order")
      ->check(CLI::IsMember({"forward", "reversed"}))
      ->capture_default_str();
  actions[ce] = [&ce_opts] { return classical_evolve(ce_opts); };
  chosen_options[ce] = &ce_opts;

  Options &qe_opts = store.emplace_back();
  auto *qe = app.add_subcommand("quantum-evolve", "Run the iteration circuit on the simulator");
  add_common(qe, qe_opts, true);
  add_initial(qe, qe_opts);
  add_format(qe, qe_opts);
  qe->add_option("--steps", qe_opts.steps, "Iterations")->capture_default_str();
  qe->add_option("--eps", qe_opts.eps, "Gate noise amplitude")->check(CLI::Range(0.0, 3.2))->capture_default_str();
  qe->add_flag("--noisy-prep", qe_opts.noisy_prep, "Apply gate noise to the line preparation");
  actions[qe] = [&qe_opts] { return quantum_evolve(qe_opts); };
  chosen_options[qe] = &qe_opts;

  Options &ec_opts = store.emplace_back();
  auto *ec = app.add_subcommand("echo", "Forward iterations, time inversion, and return");
  add_common(ec, ec_opts, true);
  add_initial(ec, ec_opts);
  add_format(ec, ec_opts);
  add_error(ec, ec_opts, "none");
  ec->add_option("--tr", ec_opts.t_r, "Iterations before inversion")->capture_default_str();
  ec->add_option("--eps", ec_opts.eps, "Gate noise amplitude")->check(CLI::Range(0.0, 3.2))->capture_default_str();
  ec->add_option("--snapshots", ec_opts.snapshots, "Times in [0, 2 t_r] to record")->delimiter(',');
  ec->add_flag("--noisy-prep", ec_opts.noisy_prep, "Apply gate noise to the line preparation");
  actions[ec] = [&ec_opts] { return echo(ec_opts); };
  chosen_options[ec] = &ec_opts;

  Options &fi_opts = store.emplace_back();
  auto *fi = app.add_subcommand("fidelity", "Fidelity between noisy and exact evolution");
  add_common(fi, fi_opts, true);
  add_initial(fi, fi_opts);
  fi->add_option("--eps", fi_opts.eps, "Gate noise amplitude")->check(CLI::Range(0.0, 3.2))->capture_default_str();
  fi->add_option("--tmax", fi_opts.t_max, "Last iteration")->check(CLI::Range(std::uint64_t{1}, std::uint64_t{1000000}))->capture_default_str();
  actions[fi] = [&fi_opts] { return fidelity_cmd(fi_opts); };
  chosen_options[fi] = &fi_opts;

  Options &cl_opts = store.emplace_back();
  auto *cl = app.add_subcommand("classical-echo", "Echo fidelity after a classical error");
  add_common(cl, cl_opts, true);
  add_initial(cl, cl_opts);
  add_error(cl, cl_opts, "shift:1,1");
  cl->add_option("--te", cl_opts.t_e, "Error times (default 1..15)")->delimiter(',');
  auto *eps_q = cl->add_option("--eps-q", cl_opts.eps_q, "Also run the quantum pipeline with this gate noise")
                    ->check(CLI::Range(0.0, 3.2));
  actions[cl] = [&cl_opts, eps_q] { return classical_echo(cl_opts, eps_q->count() > 0); };
  chosen_options[cl] = &cl_opts;

  Options &ts_opts = store.emplace_back();
  auto *ts = app.add_subcommand("tf-scan", "Fidelity time over a grid of n_q and noise");
  ts->add_option("--out", ts_opts.out_dir, "Output directory")->capture_default_str();
  ts->add_option("--seed", ts_opts.seed, "First seed")->capture_default_str();
  ts->add_option("--max-qubits", ts_opts.max_qubits, "Largest state vector to simulate")
      ->check(CLI::Range(1u, StateVector::kMaxQubits))
      ->capture_default_str();
  ts->add_option("--nq-list", ts_opts.nq_list, "Register widths")->delimiter(',')->capture_default_str();
  ts->add_option("--eps-list", ts_opts.eps_list, "Noise amplitudes")->delimiter(',')->capture_default_str();
  ts->add_option("--seeds", ts_opts.seeds, "Seeds per grid point")->check(CLI::Range(1u, 1000u))->capture_default_str();
  ts->add_option("--tmax", ts_opts.scan_t_max, "Iteration cap per run")->capture_default_str();
  actions[ts] = [&ts_opts] { return tf_scan_cmd(ts_opts); };
  chosen_options[ts] = &ts_opts;

  Options &hm_opts = store.emplace_back();
  hm_opts.steps = 0;
  auto *hm = app.add_subcommand("harmonics", "Main Fourier harmonics of one register");
  add_common(hm, hm_opts, true);
  add_initial(hm, hm_opts);
  hm->add_option("--steps", hm_opts.steps, "Exact iterations before the transform")->capture_default_str();
  hm->add_option("--axis", hm_opts.axis, "Register")->check(CLI::IsMember({"x", "y"}))->capture_default_str();
  hm->add_option("--k", hm_opts.k, "Number of harmonics")->capture_default_str();
  actions[hm] = [&hm_opts] { return harmonics_cmd(hm_opts); };
  chosen_options[hm] = &hm_opts;

  Options &nr_opts = store.emplace_back();
  auto *nr = app.add_subcommand("nonreturn", "Estimate the noise amplitude from an echo");
  add_common(nr, nr_opts, true);
  add_initial(nr, nr_opts);
  nr->add_option("--tr", nr_opts.t_r, "Iterations before inversion")->capture_default_str();
  nr->add_option("--eps", nr_opts.eps, "Gate noise amplitude")->check(CLI::Range(0.0, 3.2))->capture_default_str();
  nr->add_option("--shots", nr_opts.shots, "Measurements of the x register")
      ->check(CLI::Range(std::uint64_t{1}, std::uint64_t{100000000}))
      ->capture_default_str();
  nr->add_option("--prefactor", nr_opts.prefactor, "C in t_f = C / (eps^2 n_q)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  nr->add_flag("--noisy-prep", nr_opts.noisy_prep, "Apply gate noise to the line preparation");
  actions[nr] = [&nr_opts] { return nonreturn_cmd(nr_opts); };
  chosen_options[nr] = &nr_opts;

  Options &gcnt_opts = store.emplace_back();
  auto *gcnt = app.add_subcommand("gate-count", "Gate tallies of one map iteration");
  add_common(gcnt, gcnt_opts, false);
  gcnt->add_flag("--print", gcnt_opts.print, "Also write the gate list");
  actions[gcnt] = [&gcnt_opts] { return gate_count_cmd(gcnt_opts); };
  chosen_options[gcnt] = &gcnt_opts;

  Options &vf_opts = store.emplace_back();
  auto *vf = app.add_subcommand("verify", "Exhaustive adder and map equivalence checks");
  add_common(vf, vf_opts, false);
  vf->add_option("--seed", vf_opts.seed, "Sampling seed for n_q > 10")->capture_default_str();
  actions[vf] = [&vf_opts] { return verify_cmd(vf_opts); };
  chosen_options[vf] = &vf_opts;

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kValidationFailure;
  }

  CLI::App *chosen = app.get_subcommands().front();
  const Options &o = *chosen_options.at(chosen);
  try {
    const auto started = std::chrono::steady_clock::now();
    Outcome r = actions.at(chosen)();
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    json meta;
    meta["version"] = kVersion;
    meta["subcommand"] = chosen->get_name();
    meta["arguments"] = args;
    meta["config"] = option_values(*chosen);
    meta["summary"] = r.summary;
    meta["outputs"] = r.files;
    meta["wall_seconds"] = seconds;
    if (chosen != ts) {
      const Circuit it = build_cat_iteration(LatticeSpec(o.nq));
      const GateCount gc = count_gates(it);
      meta["gate_counts"] = {{"qubits", it.qubit_count()},
                             {"toffoli", gc.of(GateKind::Toffoli)},
                             {"cnot", gc.of(GateKind::Cnot)},
                             {"total", gc.total}};
    }
    write_file_atomic(fs::path(o.out_dir) / (chosen->get_name() + ".json"), meta.dump(2) + "\n");

    out << r.line << '\n';
    if (!r.ok) {
      err << "error: verification failed\n";
      return kRuntimeFailure;
    }
    return kOk;
  } catch (const ValidationError &e) {
    err << "error: " << e.what() << '\n';
    return kValidationFailure;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeFailure;
  }
}

}  // namespace catsim::cli
