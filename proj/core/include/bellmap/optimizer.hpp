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
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bellmap/bell_lp.hpp"
#include "bellmap/nelder_mead.hpp"
#include "bellmap/noise.hpp"
#include "bellmap/observable.hpp"
#include "bellmap/state.hpp"

namespace bellmap {

/// What to minimize: v_crit of `state` against `noise` over 2m observables
/// of one kind (Alice's m first, then Bob's).
struct ObjectiveSpec {
  explicit ObjectiveSpec(QuditState s,
                         ObservableKind k = ObservableKind::M1, int m = 2)
      : state(std::move(s)), kind(k), settings(m) {}

  QuditState state;
  NoiseModel noise = NoiseModel::white();
  ObservableKind kind = ObservableKind::M1;
  int settings = 2;
  /// Per-observable angle indices pinned to zero.
  std::vector<int> frozen;
  /// Pin the FullUnitary input phases, which only change the measurement
  /// gauge.
  bool reduce_gauge = true;

  int dimension() const noexcept { return state.dimension(); }
  int angles_per_observable() const;
  /// Indices into one observable's angle vector that the search varies.
  std::vector<int> free_indices() const;
  /// n = 2m times the free angles per observable.
  int search_dimension() const;

  /// Free-angle vector to the concatenated per-observable angle vectors.
  std::vector<double> expand(std::span<const double> free) const;
  /// Inverse of expand (drops pinned entries).
  std::vector<double> restrict(std::span<const double> full) const;

  /// Splits concatenated angles into Alice's and Bob's observables.
  std::pair<std::vector<ObservableSpec>, std::vector<ObservableSpec>>
  observables(std::span<const double> full) const;

  /// Throws ScenarioError / ParametrizationError on inconsistent fields.
  void validate() const;
};

/// v_crit evaluator for one ObjectiveSpec. Not thread-safe.
class VisibilityObjective {
 public:
  VisibilityObjective(ObjectiveSpec spec, VisibilityOptions lp = {});

  /// Solves the LP for concatenated full angles.
  VisibilityResult evaluate(std::span<const double> full);

  /// Search value for free angles: the LP optimum (which can exceed one
  /// when the LP cap does). Solver failures score the cap and are counted.
  double operator()(std::span<const double> free);

  const ObjectiveSpec& spec() const noexcept { return spec_; }
  long failures() const noexcept { return failures_; }
  long evaluations() const noexcept { return evaluations_; }

 private:
  ObjectiveSpec spec_;
  NoiseModel compiled_noise_;
  VisibilitySolver solver_;
  std::vector<CMatrix> alice_;
  std::vector<CMatrix> bob_;
  long failures_ = 0;
  long evaluations_ = 0;
};

/// LP settings used while searching: cap 2, no witness.
inline VisibilityOptions search_lp_options() {
  VisibilityOptions o;
  o.visibility_cap = 2.0;
  o.keep_witness = false;
  return o;
}

struct OptimizerOptions {
  NelderMeadOptions nelder_mead{};
  /// Candidate points screened per random restart. Settings without a
  /// violation mostly sit on a flat v = 1 plateau, so starting from the best
  /// of a batch matters more than the search itself.
  int screening = 64;
  /// LP settings used during search; visibility_cap > 1 grades the
  /// no-violation region.
  VisibilityOptions lp = search_lp_options();
  /// Extra Nelder-Mead runs restarted from the converged vertex.
  int polish_rounds = 3;
  /// 0 = BELLMAP_THREADS or hardware concurrency.
  int threads = 0;
  /// Free-angle starting points for the first restarts; the rest are
  /// uniform in [0, 2 pi)^n.
  std::vector<std::vector<double>> initial_points;
};

struct OptimizationResult {
  /// Best free angles (length n) and the matching concatenated full vector.
  std::vector<double> angles;
  std::vector<double> full_angles;
  /// NaN when every restart failed.
  double v_crit = 1.0;
  VisibilityStatus status = VisibilityStatus::NoViolation;
  int best_restart = -1;
  int iterations = 0;
  long evaluations = 0;
  bool converged = false;
  /// Best v_crit per restart (NaN for failed restarts).
  std::vector<double> history;
  int failed_restarts = 0;

  bool ok() const noexcept { return status != VisibilityStatus::SolverFailure; }
};

/// Seeded multistart Nelder-Mead. Restart r draws its start from an RNG
/// seeded by (seed, r), so results do not depend on thread count and a
/// larger restart count never reports a larger minimum.
OptimizationResult minimize_visibility(const ObjectiveSpec& objective,
                                       int restarts, std::uint64_t seed,
                                       const OptimizerOptions& opts = {});

/// Random start of restart r, uniform in [0, 2 pi)^n.
std::vector<double> restart_point(int n, std::uint64_t seed, int restart);

struct MultistartOptions {
  NelderMeadOptions nelder_mead{};
  /// Extra Nelder-Mead runs restarted from the converged vertex.
  int polish_rounds = 3;
  /// 0 = BELLMAP_THREADS or hardware concurrency.
  int threads = 0;
  /// Random restarts evaluate this many candidate points and start from
  /// the lowest one.
  int screening = 1;
  /// Used as the starts of the first restarts (not screened).
  std::vector<std::vector<double>> initial_points;
};

struct MultistartResult {
  std::vector<double> x;
  double f = 0.0;
  int best_restart = -1;
  int iterations = 0;
  long evaluations = 0;
  bool converged = false;
  std::vector<double> history;
  int failed_restarts = 0;
};

using ObjectiveFactory = std::function<Objective()>;

/// Multistart minimization of an arbitrary objective with the same restart
/// and polish policy. `factory` is called once per worker to get a private
/// objective. Failed restarts (OptimizerError) are recorded as NaN.
MultistartResult multistart_minimize(const ObjectiveFactory& factory, int n,
                                     int restarts, std::uint64_t seed,
                                     const MultistartOptions& opts = {});

struct ScanPoint {
  std::vector<double> parameters;
  OptimizationResult result;
  bool failed = false;
  std::string error;
  double seconds = 0.0;
};

struct ScanOptions {
  OptimizerOptions optimizer{};
  bool warm_start = true;
  /// Optima of an earlier scan over the same grid, made with `seed_spec`
  /// (another kind or settings count). Point p also starts from
  /// transfer_angles of seed_points[p].
  std::vector<ScanPoint> seed_points;
  /// Empty or one element.
  std::vector<ObjectiveSpec> seed_spec;
  /// Extra passes after the main one: every point restarts from the optima
  /// of its four nearest neighbours with a violation and keeps any
  /// improvement. Stops early after a pass without improvement.
  int refine_passes = 0;
  /// Visiting order as a permutation of grid indices; empty is grid order.
  /// Results and seeds stay indexed by grid position.
  std::vector<std::size_t> order;
  /// Called after every point with its grid index.
  std::function<void(std::size_t, const ScanPoint&)> progress;
};

using StateFamily = std::function<QuditState(std::span<const double>)>;

/// minimize_visibility at every grid point, visited in `opts.order`. With
/// warm starting on, the first restarts of each point start from the best
/// angles of the two nearest visited points with a violation (Euclidean in
/// parameter space). Point p uses seed (seed, p). Failures are recorded per
/// point.
std::vector<ScanPoint> scan_family(const StateFamily& family,
                                   const std::vector<std::vector<double>>& grid,
                                   const ObjectiveSpec& templ, int restarts,
                                   std::uint64_t seed,
                                   const ScanOptions& opts = {});

/// One step of a staged search: its optimum seeds the next stage.
struct SearchStage {
  ObjectiveSpec spec;
  /// Extra starting points as concatenated full angles of `spec`.
  std::vector<std::vector<double>> starts;
  /// 0 uses the restart count passed to minimize_staged.
  int restarts = 0;
};

/// Runs the stages in order. The first restart of every stage after the
/// first starts from the previous optimum (see transfer_angles); the result
/// of the last stage is returned.
OptimizationResult minimize_staged(const std::vector<SearchStage>& stages,
                                   int restarts, std::uint64_t seed,
                                   const OptimizerOptions& opts = {});

/// Maps an optimum of `from` to a starting point (free angles) of `to`.
/// Settings are reused cyclically when `to` has more of them; observables
/// are embedded as U (+) 1 when `to` is larger; any kind converts to
/// FullUnitary and multiport kinds lift to ones with more layers (see
/// lift_angles). Other kind changes throw ParametrizationError.
std::vector<double> transfer_angles(const ObjectiveSpec& from,
                                    std::span<const double> from_full,
                                    const ObjectiveSpec& to);

/// Deterministic per-item seed derived from a master seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace bellmap
