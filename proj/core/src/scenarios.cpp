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

#include "bellmap/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <regex>
#include <sstream>

#include "bellmap/cglmp.hpp"
#include "bellmap/errors.hpp"
#include "bellmap/linalg.hpp"

namespace bellmap {

QuditState schmidt_family_state(double alpha_deg, double beta_deg) {
  const double a = deg_to_rad(alpha_deg);
  const double b = deg_to_rad(beta_deg);
  const double c[3] = {std::cos(a), std::sin(a) * std::cos(b),
                       std::sin(a) * std::sin(b)};
  return schmidt_state(c, 3);
}

QuditState schmidt_state(std::span<const double> coefficients, int d) {
  if (d < 2) throw InvalidDimension("dimension must be >= 2");
  if (coefficients.empty() || static_cast<int>(coefficients.size()) > d) {
    throw ScenarioError("need between 1 and d Schmidt coefficients");
  }
  CVector psi = CVector::Zero(d * d);
  for (std::size_t j = 0; j < coefficients.size(); ++j) {
    psi(static_cast<Eigen::Index>(j) * (d + 1)) = coefficients[j];
  }
  return QuditState::normalized(d, std::move(psi));
}

QuditState symmetric_rank_k_state(int d, int k) {
  if (k < 2 || k > d) {
    throw ScenarioError("rank " + std::to_string(k) + " out of range for d=" +
                        std::to_string(d));
  }
  const std::vector<double> c(static_cast<std::size_t>(k), 1.0);
  return schmidt_state(c, d);
}

namespace {

// Unit vector from k-1 hyperspherical angles.
std::vector<double> sphere_point(std::span<const double> t) {
  std::vector<double> c(t.size() + 1);
  double tail = 1.0;
  for (std::size_t j = 0; j < t.size(); ++j) {
    c[j] = tail * std::cos(t[j]);
    tail *= std::sin(t[j]);
  }
  c.back() = tail;
  return c;
}

std::vector<double> sphere_angles(std::span<const double> c) {
  std::vector<double> t(c.size() - 1);
  for (std::size_t j = 0; j + 1 < c.size(); ++j) {
    double rest = 0.0;
    for (std::size_t l = j + 1; l < c.size(); ++l) rest += c[l] * c[l];
    t[j] = std::atan2(std::sqrt(rest), c[j]);
  }
  return t;
}

NelderMeadOptions tight_nm() {
  NelderMeadOptions nm;
  nm.f_tolerance = 1e-13;
  nm.x_tolerance = 1e-10;
  nm.max_iterations = 20000;
  return nm;
}

}  // namespace

AsymmetricCoefficients asymmetric_coefficients(
    int k, const AsymmetricSearchOptions& opts) {
  if (k < 2) throw ScenarioError("rank must be >= 2");
  const NelderMeadOptions nm = tight_nm();

  ObjectiveSpec settings_spec(symmetric_rank_k_state(k, k), ObservableKind::M1);
  std::vector<std::vector<double>> linear;
  for (const auto& full : linear_phase_settings(k)) {
    linear.push_back(settings_spec.restrict(full));
  }
  const int n_settings = settings_spec.search_dimension();
  std::vector<double> warm;
  std::uint64_t calls = 0;

  // Best CGLMP value (negated) over M1 settings for the coefficients at
  // sphere angles t, searched from the given starts plus `random` restarts.
  auto settings_search = [&](std::span<const double> t,
                             std::vector<std::vector<double>> starts,
                             int random) {
    const QuditState state = schmidt_state(sphere_point(t), k);
    auto factory = [&state]() -> Objective {
      ObjectiveSpec spec(state, ObservableKind::M1);
      return [spec](std::span<const double> free) {
        const auto [alice, bob] = spec.observables(spec.expand(free));
        return -cglmp_best_value(probability_table(spec.state, alice, bob)).value;
      };
    };
    const int restarts = static_cast<int>(starts.size()) + random;
    MultistartOptions mo;
    mo.nelder_mead = nm;
    mo.polish_rounds = 2;
    mo.threads = 1;
    mo.initial_points = std::move(starts);
    const MultistartResult r = multistart_minimize(
        factory, n_settings, restarts, derive_seed(opts.seed, calls++), mo);
    if (r.best_restart < 0) throw OptimizerError("CGLMP settings search failed");
    return r;
  };
  // Inside the coefficient search only the previous optimum is refined.
  auto inner = [&](std::span<const double> t) {
    const MultistartResult r =
        settings_search(t, warm.empty() ? linear : std::vector<std::vector<double>>{warm}, 0);
    warm = r.x;
    return r.f;
  };

  NelderMeadOptions outer_nm = nm;
  outer_nm.initial_step = 0.1;
  std::vector<double> best_t;
  double best_f = 0.0;
  for (int outer = 0; outer < std::max(1, opts.outer_restarts); ++outer) {
    std::vector<double> t0;
    if (outer == 0) {
      const std::vector<double> c(static_cast<std::size_t>(k), 1.0 / std::sqrt(k));
      t0 = sphere_angles(c);
    } else {
      t0 = restart_point(k - 1, opts.seed, outer);
      for (double& x : t0) x = 0.25 + x / (2.0 * kPi);
    }
    warm.clear();
    NelderMeadResult r = nelder_mead(inner, t0, outer_nm);
    // Check the settings optimum from scratch; resume if it moved.
    for (int check = 0; check < 3; ++check) {
      std::vector<std::vector<double>> starts = linear;
      starts.push_back(warm);
      const MultistartResult full = settings_search(r.x, starts, opts.inner_restarts);
      if (full.f >= r.f - 1e-10) break;
      warm = full.x;
      r = nelder_mead(inner, r.x, outer_nm);
    }
    if (best_t.empty() || r.f < best_f) {
      best_t = r.x;
      best_f = r.f;
    }
  }

  AsymmetricCoefficients out;
  out.coefficients = sphere_point(best_t);
  for (double& c : out.coefficients) c = std::abs(c);
  out.value = -best_f;
  out.implied_visibility = out.value > 2.0 ? 2.0 / out.value : 1.0;
  return out;
}

QuditState asymmetric_rank_k_state(int d, int k,
                                   const AsymmetricSearchOptions& opts) {
  if (k < 2 || k > d) {
    throw ScenarioError("rank " + std::to_string(k) + " out of range for d=" +
                        std::to_string(d));
  }
  return schmidt_state(asymmetric_coefficients(k, opts).coefficients, d);
}

QuditState bennett_tiles_state() {
  const double h = 1.0 / std::sqrt(2.0);
  auto ket = [](double x0, double x1, double x2) {
    CVector v(3);
    v << x0, x1, x2;
    return v;
  };
  const CVector e0 = ket(1, 0, 0), e2 = ket(0, 0, 1);
  const CVector m01 = ket(h, -h, 0), m12 = ket(0, h, -h);
  const CVector s = ket(1, 1, 1) / std::sqrt(3.0);
  const CVector tiles[5] = {kron(e0, m01), kron(m01, e2), kron(e2, m12),
                            kron(m12, e0), kron(s, s)};
  CMatrix rho = CMatrix::Identity(9, 9);
  for (const CVector& t : tiles) rho -= t * t.adjoint();
  rho /= 4.0;
  return QuditState::mixed(3, std::move(rho));
}

QuditState horodecki_3x3_state(double a) {
  if (!(a > 0.0 && a < 1.0)) {
    throw ScenarioError("Horodecki parameter must lie in (0, 1)");
  }
  CMatrix rho = CMatrix::Zero(9, 9);
  for (int i : {0, 4, 8}) {
    for (int j : {0, 4, 8}) rho(i, j) = a;
  }
  for (int i : {1, 2, 3, 5, 7}) rho(i, i) = a;
  rho(6, 6) = rho(8, 8) = (1.0 + a) / 2.0;
  rho(6, 8) = rho(8, 6) = std::sqrt(1.0 - a * a) / 2.0;
  rho /= 8.0 * a + 1.0;
  return QuditState::mixed(3, std::move(rho));
}

bool is_ppt(const QuditState& state, double tolerance) {
  return min_eigenvalue(partial_transpose(state.density_matrix(),
                                          state.dimension())) >= -tolerance;
}

std::vector<SearchStage> schmidt_ladder(std::span<const double> coefficients,
                                        int d, ObservableKind kind,
                                        const NoiseModel& noise, int settings) {
  const int k = static_cast<int>(coefficients.size());
  std::vector<SearchStage> stages;
  const bool same_noise = noise.kind() != NoiseModel::Kind::Custom;
  const bool lift = kind == ObservableKind::FullUnitary || (kind == ObservableKind::M1 && k == d);
  if (same_noise && lift && k >= 2) {
    ObjectiveSpec m1(schmidt_state(coefficients, k), ObservableKind::M1, settings);
    m1.noise = noise;
    SearchStage first{m1, {}, 0};
    if (settings == 2) first.starts = linear_phase_settings(k);
    stages.push_back(std::move(first));
    if (kind == ObservableKind::FullUnitary && k < d) {
      ObjectiveSpec uk(schmidt_state(coefficients, k), ObservableKind::FullUnitary, settings);
      uk.noise = noise;
      stages.push_back({uk, {}, 0});
    }
  }
  ObjectiveSpec last(schmidt_state(coefficients, d), kind, settings);
  last.noise = noise;
  if (stages.empty() || !(kind == ObservableKind::M1 && k == d)) {
    stages.push_back({last, {}, 0});
  }
  return stages;
}

std::vector<CatalogEntry> catalog() {
  std::vector<CatalogEntry> out;
  out.push_back({"product-d3", 3, 1, "|00>"});
  for (int d = 3; d <= 5; ++d) {
    const std::string sd = std::to_string(d);
    out.push_back({"sym-d" + sd, d, d, "maximally entangled"});
    out.push_back({"asym-d" + sd, d, d, "CGLMP-optimal Schmidt coefficients"});
    for (int k = d - 1; k >= 2; --k) {
      const std::string sk = std::to_string(k);
      out.push_back({"sym-rank" + sk + "-d" + sd, d, k,
                     "equal weights on the first " + sk + " levels"});
      if (k > 2) {
        out.push_back({"asym-rank" + sk + "-d" + sd, d, k,
                       "rank-" + sk + " CGLMP optimum embedded"});
      }
    }
  }
  out.push_back({"family-<alpha>-<beta>", 3, 3,
                 "cos a|00> + sin a (cos b|11> + sin b|22>), degrees"});
  out.push_back({"bennett", 3, 4, "unextendible product basis (tiles), bound entangled"});
  out.push_back({"horodecki-<a>", 3, 7, "3x3 bound entangled family, default a = 0.5"});
  return out;
}

namespace {

int schmidt_rank(const QuditState& s) {
  if (!s.is_pure()) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(s.density_matrix());
    return static_cast<int>((es.eigenvalues().array() > 1e-10).count());
  }
  const int d = s.dimension();
  CMatrix psi(d, d);
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b < d; ++b) psi(a, b) = s.amplitudes()(a * d + b);
  }
  Eigen::JacobiSVD<CMatrix> svd(psi);
  return static_cast<int>((svd.singularValues().array() > 1e-10).count());
}

NamedState make(std::string name, std::string description,
                std::vector<double> parameters, QuditState state) {
  const int d = state.dimension();
  const int rank = schmidt_rank(state);
  return NamedState{std::move(name), d, rank, std::move(description),
                    std::move(parameters), std::move(state)};
}

}  // namespace

NamedState named_state(const std::string& raw,
                       const AsymmetricSearchOptions& opts) {
  std::string name = raw;
  if (name == "sym") name = "sym-d3";
  if (name == "asym") name = "asym-d3";
  if (name == "product") name = "product-d3";
  if (name == "rank2-sym" || name == "sym-rank2") name = "sym-rank2-d3";
  if (name == "horodecki") name = "horodecki-0.5";

  static const std::regex sym_re(R"((sym|asym)-d(\d+))");
  static const std::regex rank_re(R"((sym|asym)-rank(\d+)-d(\d+))");
  static const std::regex product_re(R"(product-d(\d+))");
  static const std::regex family_re(
      R"(family-([-+]?\d*\.?\d+(?:[eE][-+]?\d+)?)-([-+]?\d*\.?\d+(?:[eE][-+]?\d+)?))");
  static const std::regex horodecki_re(R"(horodecki-(\d*\.?\d+(?:[eE][-+]?\d+)?))");
  std::smatch m;
  auto dim = [&](const std::string& text) {
    const int d = std::stoi(text);
    if (d < 2 || d > 8) throw ScenarioError("dimension out of range in '" + raw + "'");
    return d;
  };
  auto build = [&](bool asym, int d, int k) {
    if (k < 2 || k > d) throw ScenarioError("rank out of range in '" + raw + "'");
    if (!asym) {
      const std::vector<double> c(static_cast<std::size_t>(k), 1.0 / std::sqrt(k));
      return make(name, "equal Schmidt weights", c, symmetric_rank_k_state(d, k));
    }
    const AsymmetricCoefficients a = asymmetric_coefficients(k, opts);
    return make(name, "CGLMP-optimal Schmidt coefficients", a.coefficients,
                schmidt_state(a.coefficients, d));
  };

  if (std::regex_match(name, m, sym_re)) {
    const int d = dim(m[2]);
    return build(m[1] == "asym", d, d);
  }
  if (std::regex_match(name, m, rank_re)) {
    return build(m[1] == "asym", dim(m[3]), std::stoi(m[2]));
  }
  if (std::regex_match(name, m, product_re)) {
    const int d = dim(m[1]);
    return make(name, "|00>", {1.0}, schmidt_state(std::vector<double>{1.0}, d));
  }
  if (std::regex_match(name, m, family_re)) {
    const double alpha = std::stod(m[1]);
    const double beta = std::stod(m[2]);
    return make(name, "Schmidt family", {alpha, beta}, schmidt_family_state(alpha, beta));
  }
  if (name == "bennett") {
    return make(name, "unextendible product basis (tiles)", {}, bennett_tiles_state());
  }
  if (std::regex_match(name, m, horodecki_re)) {
    const double a = std::stod(m[1]);
    return make(name, "3x3 bound entangled family", {a}, horodecki_3x3_state(a));
  }
  throw ScenarioError("unknown state '" + raw + "'");
}

std::string format_catalog(const std::vector<CatalogEntry>& entries) {
  std::ostringstream out;
  for (const CatalogEntry& e : entries) {
    out << e.name << ", " << e.d << ", " << e.rank << ", " << e.description << '\n';
  }
  return out.str();
}

}  // namespace bellmap
