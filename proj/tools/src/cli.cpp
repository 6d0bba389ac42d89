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

#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <regex>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "bellmap/bell_lp.hpp"
#include "bellmap/cglmp.hpp"
#include "bellmap/errors.hpp"
#include "bellmap/io.hpp"
#include "bellmap/observable.hpp"
#include "bellmap/optimizer.hpp"
#include "bellmap/probability.hpp"
#include "bellmap/scenarios.hpp"

namespace bellmap::cli {

namespace fs = std::filesystem;

double round4(double v) {
  return std::isfinite(v) ? std::round(v * 1e4) / 1e4 : v;
}

std::string format_visibility(double v) {
  if (!std::isfinite(v)) return "NaN";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

namespace {

std::string format_number(double v) {
  if (!std::isfinite(v)) return "NaN";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json optional_number(const std::optional<double>& v) {
  return v ? Json(*v) : Json(nullptr);
}

std::optional<double> read_optional(const Json& j, const char* key) {
  const Json& v = j.at(key);
  if (v.is_null()) return std::nullopt;
  return v.get<double>();
}

}  // namespace

Json to_json(const ScanRecord& r) {
  Json j;
  j["command"] = r.command;
  j["state"] = r.state;
  j["alpha_deg"] = optional_number(r.alpha_deg);
  j["beta_deg"] = optional_number(r.beta_deg);
  j["d"] = r.d;
  j["kind"] = r.kind;
  j["m"] = r.m;
  j["noise"] = r.noise;
  j["frozen"] = r.frozen;
  j["v_crit"] = number_or_null(r.v_crit);
  j["status"] = r.status;
  j["restarts"] = r.restarts;
  j["seed"] = r.seed;
  j["best_restart"] = r.best_restart;
  j["failed_restarts"] = r.failed_restarts;
  j["evaluations"] = r.evaluations;
  j["angles"] = r.angles;
  j["wall_time_s"] = r.wall_time_s;
  return j;
}

ScanRecord scan_record_from_json(const Json& j) {
  ScanRecord r;
  r.command = j.at("command").get<std::string>();
  r.state = j.at("state").get<std::string>();
  r.alpha_deg = read_optional(j, "alpha_deg");
  r.beta_deg = read_optional(j, "beta_deg");
  r.d = j.at("d").get<int>();
  r.kind = j.at("kind").get<std::string>();
  r.m = j.at("m").get<int>();
  r.noise = j.at("noise").get<std::string>();
  r.frozen = j.at("frozen").get<std::vector<int>>();
  r.v_crit = read_optional(j, "v_crit").value_or(std::numeric_limits<double>::quiet_NaN());
  r.status = j.at("status").get<std::string>();
  r.restarts = j.at("restarts").get<int>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.best_restart = j.at("best_restart").get<int>();
  r.failed_restarts = j.at("failed_restarts").get<int>();
  r.evaluations = j.at("evaluations").get<long>();
  r.angles = j.at("angles").get<std::vector<double>>();
  r.wall_time_s = j.at("wall_time_s").get<double>();
  return r;
}

HeatmapRange write_pgm(const fs::path& path, const Heatmap& map) {
  if (map.width <= 0 || map.height <= 0 ||
      map.values.size() != static_cast<std::size_t>(map.width) * map.height) {
    throw std::invalid_argument("heatmap shape does not match its values");
  }
  HeatmapRange range{std::numeric_limits<double>::infinity(),
                     -std::numeric_limits<double>::infinity()};
  for (double v : map.values) {
    if (!std::isfinite(v)) continue;
    range.min = std::min(range.min, v);
    range.max = std::max(range.max, v);
  }
  if (range.min > range.max) range = {0.0, 0.0};
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f << "P5\n" << map.width << ' ' << map.height << "\n255\n";
  const double span = range.max - range.min;
  for (double v : map.values) {
    unsigned char px = 255;
    if (std::isfinite(v)) {
      px = span > 0.0 ? static_cast<unsigned char>(std::lround(254.0 * (v - range.min) / span))
                      : 0;
    }
    f.put(static_cast<char>(px));
  }
  if (!f) throw Error("cannot write " + path.string());
  return range;
}

std::vector<double> region_boundaries(std::span<const double> x,
                                      std::span<const double> lower,
                                      std::span<const double> reference,
                                      double tol) {
  if (x.size() != lower.size() || x.size() != reference.size()) {
    throw std::invalid_argument("region_boundaries: length mismatch");
  }
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double g0 = reference[i] - lower[i] - tol;
    const double g1 = reference[i + 1] - lower[i + 1] - tol;
    if (!std::isfinite(g0) || !std::isfinite(g1)) continue;
    if ((g0 > 0.0) == (g1 > 0.0)) continue;
    const double t = g0 / (g0 - g1);
    out.push_back(x[i] + t * (x[i + 1] - x[i]));
  }
  return out;
}

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string state = "sym";
  int d = 3;
  double alpha = std::numeric_limits<double>::quiet_NaN();
  double beta = std::numeric_limits<double>::quiet_NaN();
  std::string density;
  std::string kind = "u";
  std::string kind_b = "m3";
  std::vector<std::string> kinds{"m1", "m2", "m3"};
  int m = 2;
  std::string noise = "white";
  int restarts = 30;
  std::uint64_t seed = 7;
  int threads = 0;
  int screening = 64;
  std::vector<int> frozen;
  std::vector<int> frozen_b;
  double alpha_min = 0.0;
  double alpha_max = 90.0;
  double alpha_step = 2.0;
  double beta_min = 0.0;
  double beta_max = 90.0;
  double beta_step = 2.0;
  std::string output;
  std::string pgm;
  std::string table;
  std::string table_out;
  std::string witness;
  std::string lp_dump;
  std::string angles;
  int random_settings = 0;
  bool warm_start = true;
  int refine = 1;
  std::string search = "auto";
  double tolerance = 5e-4;
  bool quiet = false;

  bool noise_given = false;
  bool d_given = false;
};

struct ResolvedState {
  QuditState state;
  std::string label;
  std::optional<double> alpha;
  std::optional<double> beta;
  /// Schmidt coefficients on |jj>, empty unless the state has that form.
  std::vector<double> coefficients;
};

std::string canonical_state_name(const std::string& name, int d) {
  static const std::regex bare(R"(sym|asym|product)");
  static const std::regex rank(R"(rank(\d+)-(sym|asym)|(sym|asym)-rank(\d+))");
  const std::string sd = std::to_string(d);
  std::smatch m;
  if (std::regex_match(name, bare)) return name + "-d" + sd;
  if (std::regex_match(name, m, rank)) {
    const std::string k = m[1].matched ? m[1].str() : m[4].str();
    const std::string which = m[2].matched ? m[2].str() : m[3].str();
    return which + "-rank" + k + "-d" + sd;
  }
  return name;
}

std::vector<double> diagonal_schmidt(const QuditState& s) {
  if (!s.is_pure()) return {};
  const int d = s.dimension();
  const CVector& psi = s.amplitudes();
  std::vector<double> c;
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b < d; ++b) {
      const Complex z = psi(a * d + b);
      if (a != b && std::abs(z) > 1e-12) return {};
      if (a == b) {
        if (std::abs(z.imag()) > 1e-12 || z.real() < -1e-12) return {};
        c.push_back(std::max(0.0, z.real()));
      }
    }
  }
  while (!c.empty() && c.back() < 1e-12) c.pop_back();
  for (double v : c) {
    if (v < 1e-12) return {};
  }
  return c;
}

std::string family_label(double alpha, double beta) {
  return "family-" + format_number(alpha) + "-" + format_number(beta);
}

ResolvedState resolve_state(const Options& o) {
  if (!o.density.empty()) {
    QuditState s = read_density_matrix(fs::path(o.density));
    if (o.d_given && s.dimension() != o.d) {
      throw UsageError("--d " + std::to_string(o.d) + " does not match the density matrix");
    }
    std::vector<double> c = diagonal_schmidt(s);
    return {std::move(s), "file:" + o.density, std::nullopt, std::nullopt, std::move(c)};
  }
  if (std::isfinite(o.alpha)) {
    const double beta = std::isfinite(o.beta) ? o.beta : 45.0;
    if (o.d_given && o.d != 3) throw UsageError("the (alpha, beta) family lives in d = 3");
    QuditState s = schmidt_family_state(o.alpha, beta);
    std::vector<double> c = diagonal_schmidt(s);
    return {std::move(s), family_label(o.alpha, beta), o.alpha, beta, std::move(c)};
  }
  NamedState named = named_state(canonical_state_name(o.state, o.d));
  if (o.d_given && named.d != o.d) {
    throw UsageError("state '" + named.name + "' has d = " + std::to_string(named.d) +
                     ", not " + std::to_string(o.d));
  }
  std::vector<double> c = diagonal_schmidt(named.state);
  return {std::move(named.state), named.name, std::nullopt, std::nullopt, std::move(c)};
}

NoiseModel parse_noise(const std::string& text) {
  if (text == "white") return NoiseModel::white();
  if (text == "product") return NoiseModel::product();
  if (text == "dephasing") return NoiseModel::dephasing();
  if (fs::exists(text)) return NoiseModel::custom(read_density_matrix(fs::path(text)));
  throw UsageError("unknown noise '" + text +
                   "' (white, product, dephasing or a density-matrix file)");
}

ObjectiveSpec make_spec(QuditState state, const std::string& kind, const Options& o,
                        const std::vector<int>& frozen) {
  ObjectiveSpec spec(std::move(state), parse_observable_kind(kind), o.m);
  spec.noise = parse_noise(o.noise);
  spec.frozen = frozen;
  spec.validate();
  return spec;
}

OptimizerOptions optimizer_options(const Options& o) {
  OptimizerOptions opts;
  opts.threads = o.threads;
  opts.screening = o.screening;
  return opts;
}

bool use_ladder(const Options& o, const ObjectiveSpec& spec,
                const std::vector<double>& coefficients) {
  const bool possible = !coefficients.empty() && spec.frozen.empty();
  if (o.search == "plain") return false;
  if (o.search == "staged") {
    if (!possible) {
      throw UsageError("staged search needs a Schmidt-diagonal pure state and no frozen angles");
    }
    return true;
  }
  return possible && spec.dimension() >= 4;
}

OptimizationResult run_search(const ObjectiveSpec& spec,
                              const std::vector<double>& coefficients,
                              const Options& o) {
  const OptimizerOptions opts = optimizer_options(o);
  if (use_ladder(o, spec, coefficients)) {
    const auto stages = schmidt_ladder(coefficients, spec.dimension(), spec.kind,
                                       spec.noise, spec.settings);
    return minimize_staged(stages, o.restarts, o.seed, opts);
  }
  return minimize_visibility(spec, o.restarts, o.seed, opts);
}

std::vector<double> axis(double lo, double hi, double step, const char* name) {
  if (!(step > 0.0) || !(hi >= lo)) {
    throw UsageError(std::string("invalid ") + name + " range");
  }
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  if (n > 100000) throw UsageError(std::string(name) + " grid is too large");
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = lo + static_cast<double>(i) * step;
  return out;
}

std::vector<double> parse_angles(const std::string& text) {
  std::vector<double> out;
  std::string token;
  std::istringstream in(text);
  while (std::getline(in, token, ',')) {
    std::istringstream t(token);
    double v = 0.0;
    std::string rest;
    if (!(t >> v) || (t >> rest)) throw UsageError("bad angle '" + token + "'");
    out.push_back(v);
  }
  return out;
}

double point_visibility(const ScanPoint& p) {
  if (p.failed || !p.result.ok()) return std::numeric_limits<double>::quiet_NaN();
  return round4(p.result.v_crit);
}

bool transferable(ObservableKind from, ObservableKind to, int d) {
  if (to == ObservableKind::FullUnitary) return true;
  if (from == ObservableKind::FullUnitary) return false;
  return angle_count(to, d) >= angle_count(from, d);
}

std::ofstream open_output(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path);
  return f;
}

fs::path default_pgm(const Options& o, const std::string& csv) {
  if (!o.pgm.empty()) return o.pgm;
  return fs::path(csv).replace_extension(".pgm");
}

void write_sidecar(const fs::path& pgm, const HeatmapRange& range, const char* quantity,
                   const std::vector<double>& alphas, const std::vector<double>& betas) {
  std::ofstream f = open_output(pgm.string() + ".txt");
  f << "quantity " << quantity << '\n'
    << "min " << format_number(range.min) << '\n'
    << "max " << format_number(range.max) << '\n'
    << "width " << alphas.size() << '\n'
    << "height " << betas.size() << '\n'
    << "columns alpha_deg " << format_number(alphas.front()) << " to "
    << format_number(alphas.back()) << '\n'
    << "rows beta_deg " << format_number(betas.back()) << " to "
    << format_number(betas.front()) << " (top to bottom)\n"
    << "hole 255\n";
}

// Grid points in CSV order: alpha outer, beta inner.
std::vector<std::vector<double>> alpha_beta_grid(const std::vector<double>& alphas,
                                                 const std::vector<double>& betas) {
  std::vector<std::vector<double>> grid;
  for (double a : alphas) {
    for (double b : betas) grid.push_back({a, b});
  }
  return grid;
}

Heatmap grid_heatmap(const std::vector<double>& values, std::size_t na, std::size_t nb) {
  Heatmap h;
  h.width = static_cast<int>(na);
  h.height = static_cast<int>(nb);
  h.values.assign(na * nb, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t ia = 0; ia < na; ++ia) {
    for (std::size_t ib = 0; ib < nb; ++ib) {
      h.values[(nb - 1 - ib) * na + ia] = values[ia * nb + ib];
    }
  }
  return h;
}

// Visits alpha from the top down, where violations are strongest, with beta
// snaking so every warm start comes from a grid neighbour.
std::vector<std::size_t> scan_order(std::size_t na, std::size_t nb) {
  std::vector<std::size_t> order;
  for (std::size_t r = 0; r < na; ++r) {
    const std::size_t ia = na - 1 - r;
    for (std::size_t j = 0; j < nb; ++j) order.push_back(ia * nb + (r % 2 ? nb - 1 - j : j));
  }
  return order;
}

std::vector<ScanPoint> family_scan(const std::vector<std::vector<double>>& grid,
                                   std::size_t betas, const ObjectiveSpec& templ,
                                   const Options& o, ScanOptions so, const char* tag,
                                   std::ostream& err) {
  so.optimizer = optimizer_options(o);
  so.order = scan_order(grid.size() / betas, betas);
  so.warm_start = o.warm_start;
  so.refine_passes = o.refine;
  if (!o.quiet) {
    so.progress = [&err, tag, n = grid.size()](std::size_t p, const ScanPoint& pt) {
      err << tag << ' ' << (p + 1) << '/' << n << " alpha=" << format_number(pt.parameters[0])
          << " beta=" << format_number(pt.parameters[1])
          << " v_crit=" << format_visibility(point_visibility(pt))
          << (pt.failed ? " failed: " + pt.error : std::string()) << '\n';
    };
  }
  const StateFamily family = [](std::span<const double> p) {
    return schmidt_family_state(p[0], p[1]);
  };
  return scan_family(family, grid, templ, o.restarts, o.seed, so);
}

int cmd_optimize(const Options& o, std::ostream& out, std::ostream& err) {
  const auto t0 = std::chrono::steady_clock::now();
  ResolvedState rs = resolve_state(o);
  const ObjectiveSpec spec = make_spec(rs.state, o.kind, o, o.frozen);
  const OptimizationResult r = run_search(spec, rs.coefficients, o);

  if (r.ok()) {
    if (!o.lp_dump.empty()) {
      VisibilityOptions vo;
      vo.dump_directory = fs::path(o.lp_dump);
      VisibilityObjective(spec, vo).evaluate(r.full_angles);
    }
    if (!o.table_out.empty()) {
      const auto [alice, bob] = spec.observables(r.full_angles);
      write_probability_table(fs::path(o.table_out),
                              probability_table(spec.state, alice, bob));
    }
  }

  ScanRecord rec;
  rec.state = rs.label;
  rec.alpha_deg = rs.alpha;
  rec.beta_deg = rs.beta;
  rec.d = spec.dimension();
  rec.kind = std::string(to_string(spec.kind));
  rec.m = spec.settings;
  rec.noise = o.noise;
  rec.frozen = spec.frozen;
  rec.v_crit = round4(r.v_crit);
  rec.status = std::string(to_string(r.status));
  rec.angles = r.full_angles;
  rec.restarts = static_cast<int>(r.history.size());
  rec.seed = o.seed;
  rec.best_restart = r.best_restart;
  rec.failed_restarts = r.failed_restarts;
  rec.evaluations = r.evaluations;
  rec.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const std::string text = to_json(rec).dump(2);
  out << text << '\n';
  if (!o.output.empty()) open_output(o.output) << text << '\n';
  if (!o.quiet) err << "v_crit " << format_visibility(rec.v_crit) << '\n';
  return r.ok() && std::isfinite(r.v_crit) ? kSuccess : kFailure;
}

int cmd_map(const Options& o, std::ostream& out, std::ostream& err) {
  const auto alphas = axis(o.alpha_min, o.alpha_max, o.alpha_step, "alpha");
  const auto betas = axis(o.beta_min, o.beta_max, o.beta_step, "beta");
  const auto grid = alpha_beta_grid(alphas, betas);
  const ObjectiveSpec templ =
      make_spec(schmidt_family_state(alphas[0], betas[0]), o.kind, o, o.frozen);
  const auto points = family_scan(grid, betas.size(), templ, o, {}, "map", err);

  const std::string csv = o.output.empty() ? "map.csv" : o.output;
  std::ofstream f = open_output(csv);
  f << "alpha_deg,beta_deg,v_crit,restarts,seed\n";
  std::vector<double> values;
  int failed = 0;
  std::size_t best = 0;
  for (std::size_t p = 0; p < points.size(); ++p) {
    const double v = point_visibility(points[p]);
    values.push_back(v);
    if (!std::isfinite(v)) ++failed;
    if (std::isfinite(v) && (!std::isfinite(values[best]) || v < values[best])) best = p;
    f << format_number(grid[p][0]) << ',' << format_number(grid[p][1]) << ','
      << format_visibility(v) << ',' << o.restarts << ',' << derive_seed(o.seed, p) << '\n';
  }
  const fs::path pgm = default_pgm(o, csv);
  const HeatmapRange range = write_pgm(pgm, grid_heatmap(values, alphas.size(), betas.size()));
  write_sidecar(pgm, range, "v_crit", alphas, betas);

  Json j;
  j["command"] = "map";
  j["kind"] = std::string(to_string(templ.kind));
  j["points"] = points.size();
  j["failed"] = failed;
  j["min_v_crit"] = number_or_null(values[best]);
  j["argmin"] = {grid[best][0], grid[best][1]};
  j["csv"] = csv;
  j["pgm"] = pgm.string();
  out << j.dump(2) << '\n';
  return failed == static_cast<int>(points.size()) ? kFailure : kSuccess;
}

int cmd_line(const Options& o, std::ostream& out, std::ostream& err) {
  const double beta = std::isfinite(o.beta) ? o.beta : 45.0;
  const auto alphas = axis(o.alpha_min, o.alpha_max, o.alpha_step, "alpha");
  std::vector<std::vector<double>> grid;
  for (double a : alphas) grid.push_back({a, beta});
  if (o.kinds.empty()) throw UsageError("--kinds is empty");

  std::vector<ObjectiveSpec> templates;
  std::vector<std::vector<ScanPoint>> scans;
  for (const std::string& k : o.kinds) {
    ObjectiveSpec templ = make_spec(schmidt_family_state(alphas[0], beta), k, o, {});
    ScanOptions so;
    if (!templates.empty() && transferable(templates.back().kind, templ.kind, 3)) {
      so.seed_points = scans.back();
      so.seed_spec = {templates.back()};
    }
    const std::string tag = "line " + std::string(to_string(templ.kind));
    scans.push_back(family_scan(grid, 1, templ, o, std::move(so), tag.c_str(), err));
    templates.push_back(std::move(templ));
  }

  const std::string csv = o.output.empty() ? "line.csv" : o.output;
  std::ofstream f = open_output(csv);
  f << "alpha_deg,beta_deg,kind,v_crit,restarts,seed\n";
  std::vector<std::vector<double>> values(scans.size());
  std::size_t failed = 0;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    for (std::size_t k = 0; k < scans.size(); ++k) {
      const double v = point_visibility(scans[k][p]);
      values[k].push_back(v);
      if (!std::isfinite(v)) ++failed;
      f << format_number(grid[p][0]) << ',' << format_number(beta) << ','
        << to_string(templates[k].kind) << ',' << format_visibility(v) << ','
        << o.restarts << ',' << derive_seed(o.seed, p) << '\n';
    }
  }

  Json j;
  j["command"] = "line";
  j["beta_deg"] = beta;
  Json kinds = Json::array();
  for (const auto& t : templates) kinds.push_back(std::string(to_string(t.kind)));
  j["kinds"] = kinds;
  j["points"] = grid.size();
  j["failed"] = failed;
  Json bounds = Json::array();
  for (std::size_t k = 1; k < scans.size(); ++k) {
    Json b;
    b["kind"] = std::string(to_string(templates[k].kind));
    b["reference"] = std::string(to_string(templates[k - 1].kind));
    b["tolerance"] = o.tolerance;
    b["alpha_deg"] = region_boundaries(alphas, values[k], values[k - 1], o.tolerance);
    bounds.push_back(b);
  }
  j["boundaries"] = bounds;
  j["csv"] = csv;
  out << j.dump(2) << '\n';
  return failed == grid.size() * scans.size() ? kFailure : kSuccess;
}

int cmd_diff_map(const Options& o, std::ostream& out, std::ostream& err) {
  const auto alphas = axis(o.alpha_min, o.alpha_max, o.alpha_step, "alpha");
  const auto betas = axis(o.beta_min, o.beta_max, o.beta_step, "beta");
  const auto grid = alpha_beta_grid(alphas, betas);
  const QuditState first = schmidt_family_state(alphas[0], betas[0]);
  const ObjectiveSpec spec_a = make_spec(first, o.kind, o, o.frozen);
  const ObjectiveSpec spec_b = make_spec(first, o.kind_b, o, o.frozen_b);

  const auto scan_b = family_scan(grid, betas.size(), spec_b, o, {}, "diff-map b", err);
  ScanOptions so;
  if (transferable(spec_b.kind, spec_a.kind, spec_a.dimension())) {
    so.seed_points = scan_b;
    so.seed_spec = {spec_b};
  }
  const auto scan_a =
      family_scan(grid, betas.size(), spec_a, o, std::move(so), "diff-map a", err);

  const std::string csv = o.output.empty() ? "diff_map.csv" : o.output;
  std::ofstream f = open_output(csv);
  f << "alpha_deg,beta_deg,v_crit_a,v_crit_b,difference,restarts,seed\n";
  std::vector<double> diffs;
  std::size_t failed = 0;
  std::size_t worst = 0;
  double lowest = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const double va = point_visibility(scan_a[p]);
    const double vb = point_visibility(scan_b[p]);
    const double diff = vb - va;
    diffs.push_back(diff);
    if (!std::isfinite(diff)) {
      ++failed;
    } else {
      if (!std::isfinite(diffs[worst]) || diff > diffs[worst]) worst = p;
      lowest = std::min(lowest, diff);
    }
    f << format_number(grid[p][0]) << ',' << format_number(grid[p][1]) << ','
      << format_visibility(va) << ',' << format_visibility(vb) << ','
      << format_visibility(diff) << ',' << o.restarts << ',' << derive_seed(o.seed, p) << '\n';
  }
  const fs::path pgm = default_pgm(o, csv);
  const HeatmapRange range = write_pgm(pgm, grid_heatmap(diffs, alphas.size(), betas.size()));
  write_sidecar(pgm, range, "v_crit_b - v_crit_a", alphas, betas);

  Json j;
  j["command"] = "diff-map";
  j["kind_a"] = std::string(to_string(spec_a.kind));
  j["frozen_a"] = spec_a.frozen;
  j["kind_b"] = std::string(to_string(spec_b.kind));
  j["frozen_b"] = spec_b.frozen;
  j["points"] = grid.size();
  j["failed"] = failed;
  j["max_difference"] = number_or_null(diffs[worst]);
  j["argmax"] = {grid[worst][0], grid[worst][1]};
  j["min_difference"] = number_or_null(std::isfinite(lowest) ? lowest : std::nan(""));
  j["csv"] = csv;
  j["pgm"] = pgm.string();
  out << j.dump(2) << '\n';
  return failed == grid.size() ? kFailure : kSuccess;
}

ProbabilityTable table_noise(const std::string& noise, const ProbabilityTable& t) {
  const int m = t.settings();
  const int d = t.outcomes();
  if (noise == "white") return white_table(m, d);
  if (noise != "product") {
    throw UsageError("a bare table only supports white or product noise");
  }
  std::vector<double> entries(t.entries().size());
  for (int i = 0; i < m; ++i) {
    for (int k = 0; k < m; ++k) {
      std::vector<double> pa(d, 0.0), pb(d, 0.0);
      for (int a = 0; a < d; ++a) {
        for (int b = 0; b < d; ++b) {
          pa[a] += t(i, k, a, b);
          pb[b] += t(i, k, a, b);
        }
      }
      for (int a = 0; a < d; ++a) {
        for (int b = 0; b < d; ++b) entries[t.index(i, k, a, b)] = pa[a] * pb[b];
      }
    }
  }
  return ProbabilityTable(m, d, std::move(entries));
}

void write_witness(const fs::path& path, std::span<const double> w, int m, int d) {
  std::ofstream f = open_output(path.string());
  f << "# a_1..a_m b_1..b_m weight (m " << m << " d " << d << ")\n";
  for (std::size_t t = 0; t < w.size(); ++t) {
    if (w[t] <= 0.0) continue;
    for (int o : decode_atom(static_cast<int>(t), m, d)) f << o << ' ';
    f << format_number(w[t]) << '\n';
  }
}

int cmd_check(const Options& o, std::ostream& out) {
  Json j;
  j["command"] = "check";
  std::size_t samples = 0;
  std::size_t feasible = 0;
  double infeasibility = 0.0;
  double v_min = std::numeric_limits<double>::quiet_NaN();
  std::optional<std::vector<double>> witness;
  int m = 0;
  int d = 0;

  auto absorb = [&](const ProbabilityTable& table, const ProbabilityTable* noise) {
    const Feasibility f = lr_feasible(table);
    ++samples;
    if (f.feasible) ++feasible;
    infeasibility = std::max(infeasibility, f.infeasibility);
    if (f.feasible && !witness) witness = f.witness;
    if (noise) {
      const VisibilityResult r = critical_visibility(table, *noise);
      if (r.status == VisibilityStatus::SolverFailure) throw SolverFailure(r.message);
      if (!(r.v_crit >= v_min)) {
        v_min = r.v_crit;
        if (!f.feasible && r.witness) witness = r.witness;
      }
    }
  };

  if (!o.table.empty()) {
    const ProbabilityTable table = read_probability_table(fs::path(o.table));
    m = table.settings();
    d = table.outcomes();
    j["input"] = o.table;
    if (o.noise_given) {
      const ProbabilityTable noise = table_noise(o.noise, table);
      absorb(table, &noise);
    } else {
      absorb(table, nullptr);
    }
  } else {
    ResolvedState rs = resolve_state(o);
    const ObjectiveSpec spec = make_spec(rs.state, o.kind, o, {});
    m = spec.settings;
    d = spec.dimension();
    j["input"] = rs.label;
    std::vector<std::vector<double>> settings;
    const int n = 2 * m * spec.angles_per_observable();
    if (!o.angles.empty()) {
      settings.push_back(parse_angles(o.angles));
      if (static_cast<int>(settings.back().size()) != n) {
        throw UsageError("--angles needs " + std::to_string(n) + " values for " +
                         std::string(to_string(spec.kind)) + ", m = " + std::to_string(m));
      }
    } else if (o.random_settings > 0) {
      for (int r = 0; r < o.random_settings; ++r) {
        settings.push_back(restart_point(n, o.seed, r));
      }
    } else {
      throw UsageError("check needs --table, --angles or --random-settings");
    }
    for (const auto& full : settings) {
      const auto [alice, bob] = spec.observables(full);
      std::vector<CMatrix> ua, ub;
      for (const auto& s : alice) ua.push_back(compile_observable(s));
      for (const auto& s : bob) ub.push_back(compile_observable(s));
      const ProbabilityTable table = probability_table(spec.state, ua, ub);
      if (o.noise_given) {
        const ProbabilityTable noise = noise_table(spec.noise, spec.state, ua, ub);
        absorb(table, &noise);
      } else {
        absorb(table, nullptr);
      }
    }
  }

  j["m"] = m;
  j["d"] = d;
  j["noise"] = o.noise_given ? Json(o.noise) : Json(nullptr);
  j["samples"] = samples;
  j["feasible"] = feasible;
  j["verdict"] = feasible == samples ? "feasible" : "infeasible";
  j["infeasibility"] = infeasibility;
  j["v_crit"] = number_or_null(round4(v_min));
  if (!o.witness.empty() && witness) {
    write_witness(o.witness, *witness, m, d);
    j["witness"] = o.witness;
  } else {
    j["witness"] = nullptr;
  }
  out << j.dump(2) << '\n';
  return kSuccess;
}

int cmd_cglmp(const Options& o, std::ostream& out) {
  ResolvedState rs = resolve_state(o);
  CglmpSearchOptions co;
  co.kind = parse_observable_kind(o.kind);
  co.restarts = o.restarts;
  co.seed = o.seed;
  co.threads = o.threads;
  const CglmpOptimum best = optimize_cglmp(rs.state, co);

  Options lo = o;
  lo.noise = "white";
  ObjectiveSpec spec = make_spec(rs.state, o.kind, lo, {});
  OptimizerOptions opts = optimizer_options(o);
  opts.initial_points.push_back(spec.restrict(best.angles));
  const OptimizationResult r = minimize_visibility(spec, o.restarts, o.seed, opts);

  Json j;
  j["command"] = "cglmp";
  j["state"] = rs.label;
  j["d"] = spec.dimension();
  j["kind"] = std::string(to_string(spec.kind));
  j["value"] = best.evaluation.value;
  j["classical_bound"] = best.evaluation.classical_bound;
  j["implied_visibility"] = round4(best.evaluation.implied_visibility);
  j["v_crit"] = number_or_null(round4(r.v_crit));
  j["angles"] = best.angles;
  out << j.dump(2) << '\n';
  return r.ok() ? kSuccess : kFailure;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Critical visibilities of two-qudit states", "bellmap"};
  app.set_config("--config", "", "Read 'key = value' lines; command-line flags win");
  app.allow_config_extras(false);
  app.require_subcommand(1, 1);

  app.add_option("--state", o.state, "Named state (see 'catalog')")->capture_default_str();
  app.add_option("--d", o.d, "Local dimension for generic names")
      ->check(CLI::Range(2, 8))
      ->capture_default_str();
  app.add_option("--alpha", o.alpha, "Family angle alpha in degrees");
  app.add_option("--beta", o.beta, "Family angle beta in degrees (default 45)");
  app.add_option("--density", o.density, "Density-matrix file");
  app.add_option("--kind", o.kind, "m1, m2, m3 or u")->capture_default_str();
  app.add_option("--kind-b", o.kind_b, "Second kind for diff-map")->capture_default_str();
  app.add_option("--kinds", o.kinds, "Kinds for line scans")
      ->delimiter(',')
      ->capture_default_str();
  app.add_option("--m", o.m, "Settings per party")->check(CLI::Range(2, 6))->capture_default_str();
  app.add_option("--noise", o.noise, "white, product, dephasing or a density-matrix file")
      ->capture_default_str();
  app.add_option("--restarts", o.restarts, "Optimizer restarts")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--seed", o.seed, "Master seed")->capture_default_str();
  app.add_option("--threads", o.threads, "Workers (0: BELLMAP_THREADS or all cores)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  app.add_option("--screening", o.screening, "Random candidates screened per restart")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--frozen", o.frozen, "Per-observable angle indices pinned to zero")
      ->delimiter(',');
  app.add_option("--frozen-b", o.frozen_b, "Pinned indices for --kind-b")->delimiter(',');
  app.add_option("--alpha-min", o.alpha_min)->capture_default_str();
  app.add_option("--alpha-max", o.alpha_max)->capture_default_str();
  app.add_option("--alpha-step", o.alpha_step)->capture_default_str();
  app.add_option("--beta-min", o.beta_min)->capture_default_str();
  app.add_option("--beta-max", o.beta_max)->capture_default_str();
  app.add_option("--beta-step", o.beta_step)->capture_default_str();
  app.add_option("--output", o.output, "JSON (optimize) or CSV (scans) output file");
  app.add_option("--pgm", o.pgm, "Heatmap path (default: CSV path with .pgm)");
  app.add_option("--table", o.table, "Probability-table file to check");
  app.add_option("--table-out", o.table_out, "Write the optimal probability table");
  app.add_option("--witness", o.witness, "Write a local model (joint distribution)");
  app.add_option("--lp-dump", o.lp_dump, "Directory for the final LP in CPLEX LP format");
  app.add_option("--angles", o.angles, "Comma-separated concatenated observable angles");
  app.add_option("--random-settings", o.random_settings, "Random setting samples for check")
      ->check(CLI::NonNegativeNumber);
  app.add_flag("--warm-start,!--no-warm-start", o.warm_start,
               "Start each grid point from its neighbour's optimum")
      ->capture_default_str();
  app.add_option("--refine", o.refine, "Neighbour refinement passes after a scan")
      ->check(CLI::Range(0, 10))
      ->capture_default_str();
  app.add_option("--search", o.search, "auto, plain or staged")
      ->check(CLI::IsMember({"auto", "plain", "staged"}))
      ->capture_default_str();
  app.add_option("--tolerance", o.tolerance, "Line-scan region tolerance")
      ->capture_default_str();
  app.add_flag("--quiet", o.quiet, "No progress on stderr");

  auto sub = [&](const char* name, const char* help) {
    CLI::App* s = app.add_subcommand(name, help);
    s->fallthrough();
    return s;
  };
  CLI::App* optimize = sub("optimize", "Minimize v_crit for one state");
  CLI::App* map = sub("map", "v_crit over the (alpha, beta) family grid");
  CLI::App* line = sub("line", "alpha sweep at fixed beta for several kinds");
  CLI::App* diff = sub("diff-map", "v_crit(kind-b) - v_crit(kind) over the grid");
  CLI::App* check = sub("check", "Local-model feasibility of a table or of settings");
  CLI::App* cat = sub("catalog", "List built-in states");
  CLI::App* cglmp = sub("cglmp", "Best CGLMP value and the LP v_crit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kSuccess : kUsage;
  }
  o.noise_given = app.count("--noise") > 0;
  o.d_given = app.count("--d") > 0;

  try {
    if (optimize->parsed()) return cmd_optimize(o, out, err);
    if (map->parsed()) return cmd_map(o, out, err);
    if (line->parsed()) return cmd_line(o, out, err);
    if (diff->parsed()) return cmd_diff_map(o, out, err);
    if (check->parsed()) return cmd_check(o, out);
    if (cglmp->parsed()) return cmd_cglmp(o, out);
    if (cat->parsed()) {
      out << format_catalog(catalog());
      return kSuccess;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ScenarioError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const InvalidDimension& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const InvalidState& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const InvalidNoise& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ParametrizationError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}

}  // namespace bellmap::cli
