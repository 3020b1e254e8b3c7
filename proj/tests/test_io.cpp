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

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "catsim/error.hpp"
#include "catsim/experiments.hpp"
#include "catsim/io.hpp"
#include "oracles.hpp"

using namespace catsim;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "catsim_test_io";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("PGM reader coordinate mapping", "[io]") {
  const LatticeSpec n2(1);
  std::istringstream top_left("P2\n# a comment\n2 2\n255\n9 0\n0 0\n");
  CHECK(parse_density_pgm(top_left, n2) == DensityGrid::point_mass(n2, {0, 1}));

  std::istringstream uniform("P2 2 2 7 3 3 3 3");
  CHECK(parse_density_pgm(uniform, n2) == DensityGrid::uniform(n2));

  const std::string p5 = std::string("P5\n2 2\n255\n") + '\0' + '\0' + '\0' + '\x05';
  std::istringstream binary(p5);
  CHECK(parse_density_pgm(binary, n2) == DensityGrid::point_mass(n2, {1, 0}));

  const std::string wide = std::string("P5 2 2 1000\n") + std::string(6, '\0') + "\x01\x02";
  std::istringstream sixteen(wide);
  CHECK(parse_density_pgm(sixteen, n2) == DensityGrid::point_mass(n2, {1, 0}));
}

TEST_CASE("PGM reader errors", "[io]") {
  const LatticeSpec n2(1);
  std::istringstream bad_magic("P3\n2 2\n255\n1 1 1 1\n");
  CHECK_THROWS_AS(parse_density_pgm(bad_magic, n2), ValidationError);
  std::istringstream wrong_size("P2\n4 4\n255\n" + std::string(32, '1'));
  CHECK_THROWS_AS(parse_density_pgm(wrong_size, n2), ValidationError);
  std::istringstream zero("P2\n2 2\n255\n0 0 0 0\n");
  CHECK_THROWS_AS(parse_density_pgm(zero, n2), ValidationError);
  std::istringstream truncated("P2\n2 2\n255\n1 2 3\n");
  CHECK_THROWS_AS(parse_density_pgm(truncated, n2), ValidationError);
  std::istringstream too_deep("P2\n2 2\n70000\n1 1 1 1\n");
  CHECK_THROWS_AS(parse_density_pgm(too_deep, n2), ValidationError);
  CHECK_THROWS(read_density_pgm(scratch_dir() / "does_not_exist.pgm", n2));
}

TEST_CASE("PGM writer", "[io]") {
  const LatticeSpec n4(2);
  const std::string point = encode_density_pgm(DensityGrid::point_mass(n4, {0, 3}), PgmFormat::Ascii);
  CHECK(point == "P2\n4 4\n255\n255 0 0 0\n0 0 0 0\n0 0 0 0\n0 0 0 0\n");
  const std::string uniform = encode_density_pgm(DensityGrid::uniform(n4), PgmFormat::Binary);
  CHECK(uniform == "P5\n4 4\n255\n" + std::string(16, '\xff'));

  std::mt19937_64 rng(3);
  const DensityGrid g = oracle::random_density(LatticeSpec(5), rng);
  CHECK(encode_density_pgm(g, PgmFormat::Binary) == encode_density_pgm(g, PgmFormat::Binary));

  const fs::path file = scratch_dir() / "g.pgm";
  write_density_pgm(g, file, PgmFormat::Binary);
  CHECK(slurp(file) == encode_density_pgm(g, PgmFormat::Binary));
  CHECK_THROWS_AS(write_density_pgm(g, scratch_dir() / "missing" / "dir" / "g.pgm",
                                    PgmFormat::Ascii),
                  RuntimeError);
}

TEST_CASE("PGM round trip keeps support and values to 1/255", "[io]") {
  const LatticeSpec spec(7);
  const DensityGrid smile = smile_density(spec);
  for (PgmFormat format : {PgmFormat::Ascii, PgmFormat::Binary}) {
    std::istringstream in(encode_density_pgm(smile, format));
    const DensityGrid back = parse_density_pgm(in, spec);
    for (std::uint64_t k = 0; k < spec.cell_count(); ++k) {
      REQUIRE((smile.weights()[k] > 0) == (back.weights()[k] > 0));
    }
  }

  std::mt19937_64 rng(8);
  const LatticeSpec small(4);
  const DensityGrid g = oracle::random_density(small, rng);
  std::istringstream in(encode_density_pgm(g, PgmFormat::Ascii));
  const DensityGrid back = parse_density_pgm(in, small);
  const double gmax = *std::max_element(g.weights().begin(), g.weights().end());
  const double bmax = *std::max_element(back.weights().begin(), back.weights().end());
  for (std::uint64_t k = 0; k < small.cell_count(); ++k) {
    REQUIRE(std::abs(g.weights()[k] / gmax - back.weights()[k] / bmax) <= 0.5 / 255 + 1e-12);
  }
}

TEST_CASE("CSV series", "[io]") {
  CHECK(format_real(1.0) == "1.0");
  CHECK(format_real(0.1) == "0.1");
  CHECK(format_real(1e-20) == "1e-20");

  FidelitySeries one{{{0.0, 1.0}}};
  CHECK(encode_series_csv(one, {}) == "t,f\n0,1.0\n");
  CHECK(encode_series_csv(one, {"te", "fc"}, {"n_q=7"}) == "# n_q=7\nte,fc\n0,1.0\n");

  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  FidelitySeries s;
  for (int t = 0; t < 50; ++t) s.points.push_back({static_cast<double>(t), u(rng)});
  s.points.push_back({50.25, 1.0 / 3.0});
  std::istringstream in(encode_series_csv(s, {}, {"comment"}));
  const FidelitySeries back = parse_series_csv(in);
  REQUIRE(back.points.size() == s.points.size());
  for (std::size_t k = 0; k < s.points.size(); ++k) {
    CHECK(back.points[k].t == s.points[k].t);
    CHECK(back.points[k].f == s.points[k].f);
  }

  const fs::path file = scratch_dir() / "series.csv";
  write_series_csv(s, file);
  const FidelitySeries from_file = read_series_csv(file);
  CHECK(from_file.points.size() == s.points.size());
  CHECK(slurp(file).back() == '\n');

  std::istringstream garbage("t,f\n1,abc\n");
  CHECK_THROWS_AS(parse_series_csv(garbage), ValidationError);
}

TEST_CASE("t_f scan CSV", "[io]") {
  TfScanResult scan;
  scan.rows = {{4, 0.1, 1, 20.5, false}, {4, 0.01, 1, 100.0, true}, {5, 0.1, 1, 16.0, false}};
  scan.fit = {0.7, -1.01, 0.99, 0.05, 2};
  const fs::path file = scratch_dir() / "scan.csv";
  write_tf_scan_csv(scan, file);
  const std::string text = slurp(file);
  CHECK(text.find("# fit C=") != std::string::npos);
  CHECK(text.find("slope=") != std::string::npos);
  CHECK(text.find("eps2nq,tf\n") != std::string::npos);
  std::istringstream in(text);
  const FidelitySeries rows = parse_series_csv(in);
  REQUIRE(rows.points.size() == 2);
  CHECK(rows.points[0].f == 20.5);
}

TEST_CASE("atomic writes leave no temporary behind", "[io]") {
  const fs::path dir = scratch_dir() / "atomic";
  fs::remove_all(dir);
  fs::create_directories(dir);
  write_file_atomic(dir / "a.txt", "first");
  write_file_atomic(dir / "a.txt", "second");
  CHECK(slurp(dir / "a.txt") == "second");
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto &e : fs::directory_iterator(dir)) ++entries;
  CHECK(entries == 1);
}
