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

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "bellmap/probability.hpp"
#include "bellmap/simplex.hpp"

namespace bellmap {

/// Local-realistic model LP for two parties with m settings and d outcomes.
///
/// Variables are the d^(2m) joint-distribution atoms p(a_1..a_m, b_1..b_m)
/// followed by the visibility v. Each of the m^2 d^2 rows states
///
///   sum_{atoms with a_i = a, b_k = b} p  -  v (S - N)[i,k,a,b]  =  N[i,k,a,b]
///
/// so feasibility at v means v S + (1 - v) N has a local model.
struct LrLpInstance {
  LrLpInstance(ProbabilityTable signal, ProbabilityTable noise);

  int settings() const noexcept { return signal.settings(); }
  int outcomes() const noexcept { return signal.outcomes(); }
  int atom_count() const noexcept;
  int variable_count() const noexcept { return atom_count() + 1; }
  int constraint_count() const noexcept;

  /// Full LP with a slack row bounding v by `visibility_cap`. Columns are
  /// atoms, v, slack; `row_scale` (one factor per marginal row) is optional.
  lp::LinearProgram build(double visibility_cap = 1.0,
                          std::span<const double> row_scale = {}) const;

  ProbabilityTable signal;
  ProbabilityTable noise;
};

/// Outcome tuple (a_1..a_m, b_1..b_m) of an atom index, a_1 most significant.
std::vector<int> decode_atom(int atom, int m, int d);
int encode_atom(std::span<const int> outcomes, int d);

/// Marginal-sum matrix without the v column: rows in table order.
lp::LinearProgram marginal_system(const ProbabilityTable& target);

enum class VisibilityStatus { Optimal, NoViolation, SolverFailure };

std::string_view to_string(VisibilityStatus status);

struct VisibilityResult {
  /// Critical visibility in [0, 1].
  double v_crit = 1.0;
  /// LP optimum before clamping to 1 (differs only with a cap above 1).
  double raw_visibility = 1.0;
  VisibilityStatus status = VisibilityStatus::SolverFailure;
  std::optional<std::vector<double>> witness;
  int iterations = 0;
  std::string message;
};

struct VisibilityOptions {
  lp::SimplexOptions simplex{};
  /// Upper bound on v inside the LP. Values above one turn the flat
  /// no-violation plateau into a graded landscape for search; the reported
  /// v_crit is still clamped to one.
  double visibility_cap = 1.0;
  bool keep_witness = true;
  /// When set, every solved instance is written there in LP text format.
  std::optional<std::filesystem::path> dump_directory;
};

/// Reusable solver. Keeps the phase-one tableau for the last noise table so
/// repeated solves against the same noise only run phase two. Not
/// thread-safe; use one per thread.
class VisibilitySolver {
 public:
  explicit VisibilitySolver(VisibilityOptions opts = {});
  ~VisibilitySolver();
  VisibilitySolver(VisibilitySolver&&) noexcept;
  VisibilitySolver& operator=(VisibilitySolver&&) noexcept;

  VisibilityResult solve(const ProbabilityTable& signal,
                         const ProbabilityTable& noise);

  const VisibilityOptions& options() const noexcept { return opts_; }

 private:
  struct Cache;
  VisibilityResult solve_cold(const LrLpInstance& inst);
  VisibilityResult finish(const LrLpInstance& inst, lp::LpStatus status,
                          std::vector<double> x, int iterations);

  VisibilityOptions opts_;
  std::unique_ptr<Cache> cache_;
  int dump_counter_ = 0;
};

/// Largest v in [0, 1] for which v * signal + (1 - v) * noise admits a local
/// realistic model.
VisibilityResult critical_visibility(const ProbabilityTable& signal,
                                     const ProbabilityTable& noise,
                                     const VisibilityOptions& opts = {});

struct Feasibility {
  bool feasible = false;
  /// Phase-one residual (sum of artificial variables).
  double infeasibility = 0.0;
  std::optional<std::vector<double>> witness;
};

/// Does a nonnegative joint distribution reproduce the table's marginals
/// (within 1e-8)? Throws SolverFailure when the LP breaks down.
Feasibility lr_feasible(const ProbabilityTable& table,
                        const lp::SimplexOptions& opts = {});

/// Table of the deterministic strategy (a_1..a_m, b_1..b_m).
ProbabilityTable deterministic_atom_table(std::span<const int> assignment,
                                          int m, int d);

/// Largest |marginal(witness) - target| over all rows.
double marginal_residual(std::span<const double> witness,
                         const ProbabilityTable& target);

/// Writes the instance in CPLEX LP text format.
void write_lp_dump(const LrLpInstance& instance,
                   const std::filesystem::path& path,
                   double visibility_cap = 1.0);

}  // namespace bellmap
