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


#include "catsim/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>

#include "catsim/error.hpp"

namespace catsim {
namespace {

// Next whitespace-delimited header token, skipping '#' comments.
std::string header_token(std::istream &in) {
  std::string token;
  while (in) {
    const int c = in.peek();
    if (c == EOF) {
      break;
    }
    if (c == '#') {
      std::string skip;
      std::getline(in, skip);
      continue;
    }
    if (std::isspace(c)) {
      if (!token.empty()) {
        break;
      }
      in.get();
      continue;
    }
    token.push_back(static_cast<char>(in.get()));
  }
  return token;
}

unsigned long header_number(std::istream &in, const char *what) {
  const std::string token = header_token(in);
  unsigned long value = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (token.empty() || ec != std::errc{} || ptr != token.data() + token.size()) {
    throw ValidationError(std::string("malformed PGM ") + what + ": '" + token + "'");
  }
  return value;
}

std::string read_file(const std::filesystem::path &path, std::ios::openmode mode) {
  std::ifstream in(path, mode);
  if (!in) {
    throw RuntimeError("cannot open " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

DensityGrid parse_density_pgm(std::istream &in, const LatticeSpec &spec) {
  const std::string magic = header_token(in);
  if (magic != "P2" && magic != "P5") {
    throw ValidationError("not a PGM file (magic '" + magic + "')");
  }
  const unsigned long width = header_number(in, "width");
  const unsigned long height = header_number(in, "height");
  const unsigned long maxval = header_number(in, "maxval");
  const std::uint64_t n = spec.size();
  require(width == n && height == n, "PGM is " + std::to_string(width) + "x" +
                                         std::to_string(height) + ", expected " +
                                         std::to_string(n) + "x" + std::to_string(n));
  require(maxval >= 1 && maxval <= 65535, "PGM maxval must lie in [1, 65535]");

  DensityGrid grid(spec);
  if (magic == "P5") {
    in.get();  // the single whitespace byte after maxval
    const int bytes_per_pixel = maxval > 255 ? 2 : 1;
    for (std::uint64_t r = 0; r < n; ++r) {
      for (std::uint64_t c = 0; c < n; ++c) {
        unsigned value = 0;
        for (int b = 0; b < bytes_per_pixel; ++b) {
          const int byte = in.get();
          require(byte != EOF, "truncated PGM raster");
          value = (value << 8) | static_cast<unsigned>(byte);
        }
        require(value <= maxval, "PGM pixel exceeds maxval");
        grid.set({c, n - 1 - r}, static_cast<double>(value));
      }
    }
  } else {
    for (std::uint64_t r = 0; r < n; ++r) {
      for (std::uint64_t c = 0; c < n; ++c) {
        const unsigned long value = header_number(in, "pixel");
        require(value <= maxval, "PGM pixel exceeds maxval");
        grid.set({c, n - 1 - r}, static_cast<double>(value));
      }
    }
  }
  require(grid.total() > 0.0, "PGM image is entirely zero");
  return grid.normalized();
}

DensityGrid read_density_pgm(const std::filesystem::path &path, const LatticeSpec &spec) {
  std::istringstream in(read_file(path, std::ios::binary));
  return parse_density_pgm(in, spec);
}

std::string encode_density_pgm(const DensityGrid &grid, PgmFormat format) {
  const std::uint64_t n = grid.spec().size();
  const auto w = grid.weights();
  const double peak = *std::max_element(w.begin(), w.end());
  auto pixel = [&](std::uint64_t r, std::uint64_t c) -> unsigned {
    if (peak <= 0.0) {
      return 0;
    }
    return static_cast<unsigned>(std::lround(255.0 * grid.at({c, n - 1 - r}) / peak));
  };
  std::string out = (format == PgmFormat::Ascii ? "P2\n" : "P5\n") + std::to_string(n) + " " +
                    std::to_string(n) + "\n255\n";
  for (std::uint64_t r = 0; r < n; ++r) {
    for (std::uint64_t c = 0; c < n; ++c) {
      if (format == PgmFormat::Binary) {
        out.push_back(static_cast<char>(pixel(r, c)));
      } else {
        out += std::to_string(pixel(r, c));
        out.push_back(c + 1 == n ? '\n' : ' ');
      }
    }
  }
  return out;
}

void write_density_pgm(const DensityGrid &grid, const std::filesystem::path &path,
                       PgmFormat format) {
  write_file_atomic(path, encode_density_pgm(grid, format));
}

std::string format_real(double value) {
  char buf[40];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  std::string s(buf, ptr);
  if (s.find_first_of(".einf") == std::string::npos) {
    s += ".0";
  }
  return s;
}

std::string encode_series_csv(const FidelitySeries &series, const SeriesColumns &columns,
                              const std::vector<std::string> &comments) {
  require(!series.points.empty(), "refusing to write an empty series");
  std::string out;
  for (const std::string &c : comments) {
    out += "# " + c + "\n";
  }
  out += columns.time + "," + columns.value + "\n";
  for (const FidelityPoint &p : series.points) {
    const bool integral = std::floor(p.t) == p.t && std::abs(p.t) < 1e15;
    out += integral ? std::to_string(static_cast<long long>(p.t)) : format_real(p.t);
    out += "," + format_real(p.f) + "\n";
  }
  return out;
}

void write_series_csv(const FidelitySeries &series, const std::filesystem::path &path,
                      const SeriesColumns &columns, const std::vector<std::string> &comments) {
  write_file_atomic(path, encode_series_csv(series, columns, comments));
}

FidelitySeries parse_series_csv(std::istream &in) {
  FidelitySeries series;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') {
      continue;
    }
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    const auto comma = line.find(',');
    require(comma != std::string::npos, "CSV row without a comma: '" + line + "'");
    FidelityPoint p;
    const char *end = line.data() + line.size();
    const auto r1 = std::from_chars(line.data(), line.data() + comma, p.t);
    const auto r2 = std::from_chars(line.data() + comma + 1, end, p.f);
    require(r1.ec == std::errc{} && r2.ec == std::errc{} && r2.ptr == end,
            "malformed CSV row: '" + line + "'");
    series.points.push_back(p);
  }
  return series;
}

FidelitySeries read_series_csv(const std::filesystem::path &path) {
  std::istringstream in(read_file(path, std::ios::in));
  return parse_series_csv(in);
}

void write_tf_scan_csv(const TfScanResult &scan, const std::filesystem::path &path) {
  FidelitySeries series;
  std::vector<std::string> comments = {"fit C=" + format_real(scan.fit.prefactor) +
                                       ", slope=" + format_real(scan.fit.slope) +
                                       ", r2=" + format_real(scan.fit.r_squared) +
                                       ", rms_residual=" + format_real(scan.fit.rms_residual)};
  for (const TfRow &row : scan.rows) {
    if (row.saturated) {
      comments.push_back("saturated nq=" + std::to_string(row.n_q) +
                         " eps=" + format_real(row.epsilon) + " seed=" + std::to_string(row.seed));
    } else {
      series.points.push_back({row.eps2nq(), row.t_f});
    }
  }
  require(!series.points.empty(), "t_f scan has no unsaturated rows to write");
  std::string text = encode_series_csv(series, {"eps2nq", "tf"}, comments);
  write_file_atomic(path, text);
}

void write_file_atomic(const std::filesystem::path &path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw RuntimeError("cannot write " + path.string());
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
      throw RuntimeError("failed writing " + path.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw RuntimeError("cannot move output into place at " + path.string());
  }
}

}  // namespace catsim
