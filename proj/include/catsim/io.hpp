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
 * File formats: grayscale PGM densities, CSV data series and atomic file
 * output.
 *
 * PGM pixel (row r, column c) is cell (i = c, j = N - 1 - r), so the image
 * shows momentum increasing upward.
 */

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "catsim/experiments.hpp"
#include "catsim/lattice.hpp"

namespace catsim {

inline constexpr std::string_view kVersion = "0.1.0";

enum class PgmFormat { Ascii, Binary };

/// Reads P2 or P5 (maxval <= 65535) sized N x N; weights are normalized.
DensityGrid parse_density_pgm(std::istream &in, const LatticeSpec &spec);
DensityGrid read_density_pgm(const std::filesystem::path &path, const LatticeSpec &spec);

/// Pixel = round(255 rho / max rho).
std::string encode_density_pgm(const DensityGrid &grid, PgmFormat format);
void write_density_pgm(const DensityGrid &grid, const std::filesystem::path &path,
                       PgmFormat format);

struct SeriesColumns {
  std::string time = "t";
  std::string value = "f";
};

/// Shortest text that parses back to exactly `value`; always has a decimal
/// point or exponent.
std::string format_real(double value);

/// `# comment` lines, then the header, then one `t,f` row per point.
std::string encode_series_csv(const FidelitySeries &series, const SeriesColumns &columns,
                              const std::vector<std::string> &comments = {});
void write_series_csv(const FidelitySeries &series, const std::filesystem::path &path,
                      const SeriesColumns &columns = {},
                      const std::vector<std::string> &comments = {});
/// Skips comment lines and the header.
FidelitySeries parse_series_csv(std::istream &in);
FidelitySeries read_series_csv(const std::filesystem::path &path);

/// `eps2nq,tf` rows for unsaturated runs, with the fit as a comment header.
void write_tf_scan_csv(const TfScanResult &scan, const std::filesystem::path &path);

/// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path &path, std::string_view content);

}  // namespace catsim
