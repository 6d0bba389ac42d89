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

#include <span>
#include <string_view>
#include <vector>

namespace bellmap::lp {

/// maximize c.x  subject to  A x = b,  x >= 0.  A is dense row-major.
struct LinearProgram {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;
  std::vector<double> b;
  std::vector<double> c;

  double& at(int r, int j) { return a[static_cast<std::size_t>(r) * cols + j]; }
  double at(int r, int j) const {
    return a[static_cast<std::size_t>(r) * cols + j];
  }
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit, Numerical };

std::string_view to_string(LpStatus status);

struct LpSolution {
  LpStatus status = LpStatus::Numerical;
  double objective = 0.0;
  std::vector<double> x;
  /// Sum of artificial variables left after phase one (0 when feasible).
  double infeasibility = 0.0;
  int iterations = 0;
};

struct SimplexOptions {
  double feasibility_tolerance = 1e-9;
  double optimality_tolerance = 1e-9;
  double pivot_tolerance = 1e-11;
  int max_iterations = 100000;
  /// Consecutive zero-length steps before pricing falls back to Bland's rule.
  int degenerate_run_limit = 16;
};

/// Pluggable solver interface.
class LpSolver {
 public:
  virtual ~LpSolver() = default;
  virtual LpSolution solve(const LinearProgram& lp) = 0;
};

/// Dense tableau in canonical form with an explicit artificial block, so
/// the inverse basis stays available for columns appended after phase one.
class Tableau {
 public:
  /// Sets up [A | I] with rows sign-flipped to b >= 0 and the artificial
  /// basis. `spare_cols`/`spare_rows` reserve room for later appends.
  Tableau(const LinearProgram& lp, int spare_cols, int spare_rows);

  /// Runs phase one. Returns Optimal when a feasible basis was found,
  /// Infeasible when the artificial sum stays above the tolerance.
  /// Artificials left at zero are pivoted out or their rows dropped.
  LpStatus phase_one(const SimplexOptions& opts);

  /// Appends a structural column given in the original row space. Returns
  /// false if the column breaks a linear dependency among dropped rows.
  bool append_column(std::span<const double> column,
                     double dependency_tolerance = 1e-9);

  /// Appends x_col + s = upper with a fresh slack column s made basic.
  /// `col` must be nonbasic. Returns the slack's column index.
  int append_upper_bound(int col, double upper);

  /// Phase two on the structural columns for the given objective.
  LpStatus optimize(std::span<const double> objective,
                    const SimplexOptions& opts);

  int structural_columns() const noexcept { return ncols_; }
  int active_rows() const noexcept { return nrows_; }
  int iterations() const noexcept { return iterations_; }
  double objective_value() const noexcept { return -obj_[rhs_col()]; }
  double infeasibility() const noexcept { return infeasibility_; }

  /// Primal values of the structural variables.
  std::vector<double> solution() const;

 private:
  // Row layout: [structural (cap_cols_) | rhs | artificial (nart_)].
  int rhs_col() const noexcept { return cap_cols_; }
  int art_col(int q) const noexcept { return cap_cols_ + 1 + q; }
  double* row(int r) noexcept {
    return t_.data() + static_cast<std::size_t>(r) * stride_;
  }
  const double* row(int r) const noexcept {
    return t_.data() + static_cast<std::size_t>(r) * stride_;
  }
  bool is_artificial(int col) const noexcept {
    return col > cap_cols_ && col <= cap_cols_ + nart_;
  }

  void pivot(int r, int c);
  int choose_entering(const SimplexOptions& opts, bool bland) const;
  int choose_leaving(int c, const SimplexOptions& opts, bool bland,
                     double& step) const;
  LpStatus iterate(const SimplexOptions& opts);
  void drive_out_artificials();

  int nrows_ = 0;
  int cap_rows_ = 0;
  int ncols_ = 0;
  int cap_cols_ = 0;
  int nart_ = 0;
  int stride_ = 0;
  // Columns touched by pivots: the artificial block is carried only while
  // the inverse basis is still needed for appends.
  int width_ = 0;
  std::vector<double> t_;
  std::vector<double> obj_;
  std::vector<int> basis_;
  std::vector<double> row_sign_;
  std::vector<double> pivot_row_;
  // Rows found linearly dependent during phase one (kept for checks).
  std::vector<std::vector<double>> dropped_;
  int iterations_ = 0;
  mutable int pricing_cursor_ = 0;
  double infeasibility_ = 0.0;
};

/// Two-phase primal simplex: Dantzig pricing (partial on wide problems)
/// with a Bland fallback on degenerate runs.
class SimplexSolver final : public LpSolver {
 public:
  explicit SimplexSolver(SimplexOptions opts = {}) : opts_(opts) {}
  LpSolution solve(const LinearProgram& lp) override;
  const SimplexOptions& options() const noexcept { return opts_; }

 private:
  SimplexOptions opts_;
};

}  // namespace bellmap::lp
