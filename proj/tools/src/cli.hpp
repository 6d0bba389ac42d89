// Copyright 2026 The bellmap Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace bellmap::cli {

using Json = nlohmann::ordered_json;

enum ExitCode : int { kSuccess = 0, kUsage = 2, kFailure = 3 };

/// One optimization result as printed by `optimize`.
struct ScanRecord {
  std::string command = "optimize";
  std::string state;
  std::optional<double> alpha_deg;
  std::optional<double> beta_deg;
  int d = 3;
  std::string kind = "u";
  int m = 2;
  std::string noise = "white";
  std::vector<int> frozen;
  /// Rounded to four decimals; NaN when every restart failed.
  double v_crit = 1.0;
  std::string status;
  std::vector<double> angles;
  int restarts = 0;
  std::uint64_t seed = 0;
  int best_restart = -1;
  int failed_restarts = 0;
  long evaluations = 0;
  double wall_time_s = 0.0;
};

Json to_json(const ScanRecord& record);
/// Throws nlohmann::json::exception on missing or mistyped fields.
ScanRecord scan_record_from_json(const Json& j);

double round4(double v);

/// "%.4f", or "NaN".
std::string format_visibility(double v);

/// Row-major grid; NaN marks a hole.
struct Heatmap {
  int width = 0;
  int height = 0;
  std::vector<double> values;
};

struct HeatmapRange {
  double min = 0.0;
  double max = 0.0;
};

/// Binary P5 image: values mapped linearly onto 0..254, holes written as
/// 255. Returns the range used.
HeatmapRange write_pgm(const std::filesystem::path& path, const Heatmap& map);

/// Boundaries of the region where `lower` < `reference` - tol, linearly
/// interpolated between grid points. NaN entries break the scan.
std::vector<double> region_boundaries(std::span<const double> x,
                                      std::span<const double> lower,
                                      std::span<const double> reference,
                                      double tol);

/// Runs the command line. argv[0] is the program name.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bellmap::cli
