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

#include "bellmap/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <random>

#include "bellmap/errors.hpp"
#include "bellmap/linalg.hpp"
#include "bellmap/parallel.hpp"
#include "bellmap/probability.hpp"

namespace bellmap {

int ObjectiveSpec::angles_per_observable() const {
  return angle_count(kind, dimension());
}

std::vector<int> ObjectiveSpec::free_indices() const {
  const int per = angles_per_observable();
  std::vector<bool> pinned(static_cast<std::size_t>(per), false);
  for (int f : frozen) {
    if (f < 0 || f >= per) {
      throw ParametrizationError("frozen angle index " + std::to_string(f) +
                                 " out of range for " +
                                 std::string(to_string(kind)));
    }
    pinned[static_cast<std::size_t>(f)] = true;
  }
  if (reduce_gauge) {
    for (int g : gauge_redundant_angles(kind, dimension())) {
      pinned[static_cast<std::size_t>(g)] = true;
    }
  }
  std::vector<int> out;
  for (int i = 0; i < per; ++i) {
    if (!pinned[static_cast<std::size_t>(i)]) out.push_back(i);
  }
  return out;
}

int ObjectiveSpec::search_dimension() const {
  return 2 * settings * static_cast<int>(free_indices().size());
}

std::vector<double> ObjectiveSpec::expand(std::span<const double> free) const {
  const auto idx = free_indices();
  const int per = angles_per_observable();
  const std::size_t nobs = 2 * static_cast<std::size_t>(settings);
  if (free.size() != nobs * idx.size()) {
    throw ParametrizationError("expected " + std::to_string(nobs * idx.size()) +
                               " free angles, got " +
                               std::to_string(free.size()));
  }
  std::vector<double> full(nobs * static_cast<std::size_t>(per), 0.0);
  for (std::size_t o = 0; o < nobs; ++o) {
    for (std::size_t j = 0; j < idx.size(); ++j) {
      full[o * per + idx[j]] = free[o * idx.size() + j];
    }
  }
  return full;
}

std::vector<double> ObjectiveSpec::restrict(std::span<const double> full) const {
  const auto idx = free_indices();
  const int per = angles_per_observable();
  const std::size_t nobs = 2 * static_cast<std::size_t>(settings);
  if (full.size() != nobs * static_cast<std::size_t>(per)) {
    throw ParametrizationError("expected " + std::to_string(nobs * per) +
                               " angles, got " + std::to_string(full.size()));
  }
  std::vector<double> free;
  free.reserve(nobs * idx.size());
  for (std::size_t o = 0; o < nobs; ++o) {
    for (int j : idx) free.push_back(full[o * per + j]);
  }
  return free;
}

std::pair<std::vector<ObservableSpec>, std::vector<ObservableSpec>>
ObjectiveSpec::observables(std::span<const double> full) const {
  const int per = angles_per_observable();
  const std::size_t m = static_cast<std::size_t>(settings);
  if (full.size() != 2 * m * static_cast<std::size_t>(per)) {
    throw ParametrizationError("expected " + std::to_string(2 * m * per) +
                               " angles, got " + std::to_string(full.size()));
  }
  std::vector<ObservableSpec> alice, bob;
  for (std::size_t o = 0; o < 2 * m; ++o) {
    ObservableSpec s{kind, dimension(),
                     std::vector<double>(full.begin() + o * per,
                                         full.begin() + (o + 1) * per)};
    (o < m ? alice : bob).push_back(std::move(s));
  }
  return {std::move(alice), std::move(bob)};
}

void ObjectiveSpec::validate() const {
  if (settings < 2) {
    throw ScenarioError("need at least two settings per party, got " +
                        std::to_string(settings));
  }
  (void)free_indices();
}

namespace {

NoiseModel precompile_noise(const NoiseModel& model, const QuditState& state) {
  // Noise that does not depend on the settings is built once.
  switch (model.kind()) {
    case NoiseModel::Kind::Dephasing:
      return NoiseModel::custom(noise_state(model, state));
    case NoiseModel::Kind::Custom:
      (void)noise_state(model, state);
      return model;
    default:
      return model;
  }
}

}  // namespace

VisibilityObjective::VisibilityObjective(ObjectiveSpec spec,
                                         VisibilityOptions lp)
    : spec_(std::move(spec)),
      compiled_noise_(precompile_noise(spec_.noise, spec_.state)),
      solver_(std::move(lp)) {
  spec_.validate();
  alice_.resize(static_cast<std::size_t>(spec_.settings));
  bob_.resize(static_cast<std::size_t>(spec_.settings));
}

VisibilityResult VisibilityObjective::evaluate(std::span<const double> full) {
  const int per = spec_.angles_per_observable();
  const std::size_t m = static_cast<std::size_t>(spec_.settings);
  if (full.size() != 2 * m * static_cast<std::size_t>(per)) {
    throw ParametrizationError("expected " + std::to_string(2 * m * per) +
                               " angles, got " + std::to_string(full.size()));
  }
  const int d = spec_.dimension();
  for (std::size_t o = 0; o < 2 * m; ++o) {
    CMatrix u = compile_observable(spec_.kind, d, full.subspan(o * per, per));
    (o < m ? alice_[o] : bob_[o - m]) = std::move(u);
  }
  ++evaluations_;
  const ProbabilityTable signal = probability_table(spec_.state, alice_, bob_);
  const ProbabilityTable noise =
      noise_table(compiled_noise_, spec_.state, alice_, bob_);
  return solver_.solve(signal, noise);
}

double VisibilityObjective::operator()(std::span<const double> free) {
  const std::vector<double> full = spec_.expand(free);
  const VisibilityResult r = evaluate(full);
  if (r.status == VisibilityStatus::SolverFailure) {
    ++failures_;
    return solver_.options().visibility_cap;
  }
  return r.raw_visibility;
}

std::vector<double> transfer_angles(const ObjectiveSpec& from,
                                    std::span<const double> from_full,
                                    const ObjectiveSpec& to) {
  const int d_from = from.dimension();
  const int d_to = to.dimension();
  if (d_to < d_from) {
    throw ParametrizationError("cannot transfer angles to a smaller dimension");
  }
  const bool same = from.kind == to.kind && d_from == d_to;
  const bool lift = !same && d_from == d_to &&
                    from.kind != ObservableKind::FullUnitary &&
                    to.kind != ObservableKind::FullUnitary &&
                    angle_count(to.kind, d_to) > angle_count(from.kind, d_from);
  if (!same && !lift && to.kind != ObservableKind::FullUnitary) {
    throw ParametrizationError(std::string("cannot transfer ") +
                               std::string(to_string(from.kind)) + " angles to " +
                               std::string(to_string(to.kind)));
  }
  const std::size_t per_from = static_cast<std::size_t>(from.angles_per_observable());
  const std::size_t per_to = static_cast<std::size_t>(to.angles_per_observable());
  const std::size_t m_from = static_cast<std::size_t>(from.settings);
  const std::size_t m_to = static_cast<std::size_t>(to.settings);
  if (from_full.size() != 2 * m_from * per_from) {
    throw ParametrizationError("source angle vector has the wrong length");
  }
  std::vector<double> full;
  full.reserve(2 * m_to * per_to);
  for (std::size_t party = 0; party < 2; ++party) {
    for (std::size_t s = 0; s < m_to; ++s) {
      const std::size_t src = party * m_from + s % m_from;
      const auto angles = from_full.subspan(src * per_from, per_from);
      if (same) {
        full.insert(full.end(), angles.begin(), angles.end());
        continue;
      }
      if (lift) {
        const auto lifted = lift_angles(from.kind, to.kind, d_to, angles);
        full.insert(full.end(), lifted.begin(), lifted.end());
        continue;
      }
      CMatrix u = CMatrix::Identity(d_to, d_to);
      u.topLeftCorner(d_from, d_from) = compile_observable(from.kind, d_from, angles);
      const auto fixed = gauge_fixed_angles(u);
      full.insert(full.end(), fixed.begin(), fixed.end());
    }
  }
  return to.restrict(full);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  std::mt19937_64 rng(seq);
  return rng();
}

std::vector<double> restart_point(int n, std::uint64_t seed, int restart) {
  std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(restart)));
  std::uniform_real_distribution<double> u(0.0, 2.0 * kPi);
  std::vector<double> x(static_cast<std::size_t>(n));
  for (double& v : x) v = u(rng);
  return x;
}

namespace {

// Lowest of `count` random candidates; the first is restart_point().
std::vector<double> screen(const Objective& f, int n, std::uint64_t seed,
                           int restart, int count) {
  std::vector<double> best = restart_point(n, seed, restart);
  if (count <= 1) return best;
  double best_f = f(best);
  std::mt19937_64 rng(derive_seed(~seed, static_cast<std::uint64_t>(restart)));
  std::uniform_real_distribution<double> u(0.0, 2.0 * kPi);
  std::vector<double> x(static_cast<std::size_t>(n));
  for (int c = 1; c < count; ++c) {
    for (double& v : x) v = u(rng);
    const double fx = f(x);
    if (std::isfinite(fx) && fx < best_f) {
      best_f = fx;
      best = x;
    }
  }
  return best;
}

}  // namespace

MultistartResult multistart_minimize(const ObjectiveFactory& factory, int n,
                                     int restarts, std::uint64_t seed,
                                     const MultistartOptions& opts) {
  if (restarts < 1) {
    throw OptimizerError("restarts must be at least 1, got " +
                         std::to_string(restarts));
  }
  const auto& initial_points = opts.initial_points;
  const auto& nm = opts.nelder_mead;
  for (const auto& p : initial_points) {
    if (static_cast<int>(p.size()) != n) {
      throw OptimizerError("initial point has " + std::to_string(p.size()) +
                           " entries, expected " + std::to_string(n));
    }
  }
  const int workers = std::min(resolve_thread_count(opts.threads), restarts);
  std::vector<Objective> objectives;
  objectives.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) objectives.push_back(factory());

  struct Run {
    NelderMeadResult nm;
    bool failed = false;
  };
  std::vector<Run> runs(static_cast<std::size_t>(restarts));
  parallel_for(static_cast<std::size_t>(restarts), workers,
               [&](std::size_t r, int worker) {
                 const Objective& f = objectives[static_cast<std::size_t>(worker)];
                 Run& run = runs[r];
                 try {
                   std::vector<double> x0;
                   int screened = 0;
                   if (r < initial_points.size()) {
                     x0 = initial_points[r];
                   } else {
                     x0 = screen(f, n, seed, static_cast<int>(r), opts.screening);
                     screened = std::max(1, opts.screening);
                   }
                   run.nm = nelder_mead(f, std::move(x0), nm);
                   run.nm.evaluations += screened;
                   for (int p = 0; p < opts.polish_rounds; ++p) {
                     NelderMeadResult again = nelder_mead(f, run.nm.x, nm);
                     const bool improved = again.f < run.nm.f - nm.f_tolerance;
                     run.nm.evaluations += again.evaluations;
                     run.nm.iterations += again.iterations;
                     if (again.f < run.nm.f) {
                       run.nm.x = std::move(again.x);
                       run.nm.f = again.f;
                       run.nm.converged = again.converged;
                     }
                     if (!improved) break;
                   }
                 } catch (const OptimizerError&) {
                   run.failed = true;
                 }
               });

  MultistartResult out;
  out.f = std::numeric_limits<double>::quiet_NaN();
  for (int r = 0; r < restarts; ++r) {
    const Run& run = runs[static_cast<std::size_t>(r)];
    out.evaluations += run.nm.evaluations;
    out.iterations += run.nm.iterations;
    if (run.failed) {
      ++out.failed_restarts;
      out.history.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    out.history.push_back(run.nm.f);
    if (out.best_restart < 0 || run.nm.f < out.f) {
      out.best_restart = r;
      out.f = run.nm.f;
      out.x = run.nm.x;
      out.converged = run.nm.converged;
    }
  }
  return out;
}

OptimizationResult minimize_visibility(const ObjectiveSpec& objective,
                                       int restarts, std::uint64_t seed,
                                       const OptimizerOptions& opts) {
  objective.validate();
  const int n = objective.search_dimension();

  auto factory = [&]() -> Objective {
    auto obj = std::make_shared<VisibilityObjective>(objective, opts.lp);
    return [obj](std::span<const double> x) { return (*obj)(x); };
  };

  MultistartOptions mo;
  mo.nelder_mead = opts.nelder_mead;
  mo.polish_rounds = opts.polish_rounds;
  mo.threads = opts.threads;
  mo.screening = opts.screening;
  mo.initial_points = opts.initial_points;
  const MultistartResult ms = multistart_minimize(factory, n, restarts, seed, mo);

  OptimizationResult out;
  out.iterations = ms.iterations;
  out.evaluations = ms.evaluations;
  out.failed_restarts = ms.failed_restarts;
  out.converged = ms.converged;
  out.best_restart = ms.best_restart;

  // Re-solve every restart's optimum with the LP capped at one: this both
  // reports the exact v_crit and flags optima that sit on failed points.
  VisibilityOptions exact = opts.lp;
  exact.visibility_cap = 1.0;
  VisibilityObjective check(objective, exact);
  out.history.assign(ms.history.size(), std::numeric_limits<double>::quiet_NaN());
  if (ms.best_restart < 0) {
    out.status = VisibilityStatus::SolverFailure;
    out.v_crit = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  for (std::size_t r = 0; r < ms.history.size(); ++r) {
    if (!std::isnan(ms.history[r])) out.history[r] = std::min(1.0, ms.history[r]);
  }
  out.angles = ms.x;
  out.full_angles = objective.expand(ms.x);
  const VisibilityResult best = check.evaluate(out.full_angles);
  if (best.status == VisibilityStatus::SolverFailure) {
    out.status = VisibilityStatus::SolverFailure;
    out.v_crit = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  out.status = best.status;
  out.v_crit = best.v_crit;
  out.history[static_cast<std::size_t>(ms.best_restart)] = best.v_crit;
  return out;
}

OptimizationResult minimize_staged(const std::vector<SearchStage>& stages,
                                   int restarts, std::uint64_t seed,
                                   const OptimizerOptions& opts) {
  if (stages.empty()) throw OptimizerError("no search stages given");
  OptimizationResult previous;
  const ObjectiveSpec* previous_spec = nullptr;
  for (std::size_t s = 0; s < stages.size(); ++s) {
    const SearchStage& stage = stages[s];
    OptimizerOptions o = opts;
    std::vector<std::vector<double>> starts;
    if (previous_spec && previous.ok() && !previous.full_angles.empty()) {
      starts.push_back(transfer_angles(*previous_spec, previous.full_angles, stage.spec));
    }
    for (const auto& full : stage.starts) starts.push_back(stage.spec.restrict(full));
    if (s + 1 == stages.size()) {
      starts.insert(starts.end(), opts.initial_points.begin(), opts.initial_points.end());
    }
    const int r = std::max(stage.restarts > 0 ? stage.restarts : restarts,
                           static_cast<int>(starts.size()));
    o.initial_points = std::move(starts);
    previous = minimize_visibility(stage.spec, r, derive_seed(seed, s), o);
    previous_spec = &stage.spec;
  }
  return previous;
}

namespace {

constexpr std::size_t kWarmStarts = 2;
constexpr std::size_t kRefineSeeds = 4;

// Up to `count` points of `pool` with a violation, nearest to grid[p] first
// (ties by grid index). p itself is skipped.
std::vector<std::size_t> nearest_violations(const std::vector<ScanPoint>& out,
                                            const std::vector<std::size_t>& pool,
                                            const std::vector<double>& at, std::size_t p,
                                            std::size_t count) {
  std::vector<std::pair<double, std::size_t>> near;
  for (const std::size_t v : pool) {
    const ScanPoint& q = out[v];
    if (v == p || q.failed || q.result.angles.empty() ||
        q.result.status != VisibilityStatus::Optimal) {
      continue;
    }
    double dist = 0.0;
    for (std::size_t j = 0; j < q.parameters.size() && j < at.size(); ++j) {
      const double diff = q.parameters[j] - at[j];
      dist += diff * diff;
    }
    near.emplace_back(dist, v);
  }
  const std::size_t keep = std::min(near.size(), count);
  std::partial_sort(near.begin(), near.begin() + static_cast<std::ptrdiff_t>(keep), near.end());
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < keep; ++i) idx.push_back(near[i].second);
  return idx;
}

}  // namespace

std::vector<ScanPoint> scan_family(const StateFamily& family,
                                   const std::vector<std::vector<double>>& grid,
                                   const ObjectiveSpec& templ, int restarts,
                                   std::uint64_t seed,
                                   const ScanOptions& opts) {
  if (grid.empty()) throw ScenarioError("scan grid is empty");
  std::vector<std::size_t> order = opts.order;
  if (order.empty()) {
    order.resize(grid.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
  }
  std::vector<std::size_t> sorted = order;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted.size() != grid.size() || sorted[i] != i) {
      throw ScenarioError("scan order must be a permutation of the grid indices");
    }
  }

  std::vector<ScanPoint> out(grid.size());
  std::vector<std::size_t> visited;
  visited.reserve(grid.size());
  for (const std::size_t p : order) {
    ScanPoint& point = out[p];
    point.parameters = grid[p];
    const auto start = std::chrono::steady_clock::now();
    try {
      ObjectiveSpec spec = templ;
      spec.state = family(grid[p]);
      OptimizerOptions o = opts.optimizer;
      if (opts.warm_start) {
        const auto near = nearest_violations(out, visited, grid[p], p, kWarmStarts);
        for (auto it = near.rbegin(); it != near.rend(); ++it) {
          o.initial_points.insert(o.initial_points.begin(), out[*it].result.angles);
        }
      }
      if (!opts.seed_spec.empty() && p < opts.seed_points.size()) {
        const ScanPoint& q = opts.seed_points[p];
        if (!q.failed && !q.result.full_angles.empty()) {
          o.initial_points.insert(
              o.initial_points.begin(),
              transfer_angles(opts.seed_spec.front(), q.result.full_angles, spec));
        }
      }
      point.result = minimize_visibility(spec, restarts, derive_seed(seed, p), o);
      if (!point.result.ok()) {
        point.failed = true;
        point.error = "every restart failed";
      }
    } catch (const Error& e) {
      point.failed = true;
      point.error = e.what();
    }
    point.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    visited.push_back(p);
    if (opts.progress) opts.progress(p, point);
  }

  for (int pass = 0; pass < opts.refine_passes; ++pass) {
    bool improved = false;
    for (const std::size_t p : order) {
      const auto near = nearest_violations(out, order, grid[p], p, kRefineSeeds);
      if (near.empty()) continue;
      ScanPoint& point = out[p];
      const auto start = std::chrono::steady_clock::now();
      try {
        ObjectiveSpec spec = templ;
        spec.state = family(grid[p]);
        OptimizerOptions o = opts.optimizer;
        o.initial_points.clear();
        for (const std::size_t q : near) o.initial_points.push_back(out[q].result.angles);
        OptimizationResult r = minimize_visibility(spec, static_cast<int>(near.size()),
                                                   derive_seed(seed, p), o);
        if (r.ok() && (point.failed || r.v_crit < point.result.v_crit)) {
          r.evaluations += point.result.evaluations;
          point.result = std::move(r);
          point.failed = false;
          point.error.clear();
          improved = true;
        }
      } catch (const Error&) {
        // Keep the main-pass result.
      }
      point.seconds +=
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    if (!improved) break;
  }
  return out;
}

}  // namespace bellmap
