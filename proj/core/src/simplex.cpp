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

#include "bellmap/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bellmap::lp {

std::string_view to_string(LpStatus status) {
  switch (status) {
    case LpStatus::Optimal:
      return "optimal";
    case LpStatus::Infeasible:
      return "infeasible";
    case LpStatus::Unbounded:
      return "unbounded";
    case LpStatus::IterationLimit:
      return "iteration-limit";
    case LpStatus::Numerical:
      return "numerical";
  }
  return "?";
}

Tableau::Tableau(const LinearProgram& lp, int spare_cols, int spare_rows)
    : nrows_(lp.rows),
      cap_rows_(lp.rows + spare_rows),
      ncols_(lp.cols),
      cap_cols_(lp.cols + spare_cols),
      nart_(lp.rows),
      stride_(cap_cols_ + nart_ + 1),
      width_(stride_) {
  if (lp.a.size() != static_cast<std::size_t>(lp.rows) * lp.cols ||
      lp.b.size() != static_cast<std::size_t>(lp.rows)) {
    throw std::invalid_argument("LinearProgram arrays do not match its shape");
  }
  t_.assign(static_cast<std::size_t>(cap_rows_) * stride_, 0.0);
  obj_.assign(static_cast<std::size_t>(stride_), 0.0);
  basis_.assign(static_cast<std::size_t>(cap_rows_), -1);
  row_sign_.assign(static_cast<std::size_t>(nart_), 1.0);
  pivot_row_.assign(static_cast<std::size_t>(stride_), 0.0);
  for (int r = 0; r < lp.rows; ++r) {
    const double s = lp.b[r] < 0.0 ? -1.0 : 1.0;
    row_sign_[r] = s;
    double* tr = row(r);
    for (int j = 0; j < lp.cols; ++j) tr[j] = s * lp.at(r, j);
    tr[art_col(r)] = 1.0;
    tr[rhs_col()] = s * lp.b[r];
    basis_[r] = art_col(r);
  }
}

void Tableau::pivot(int r, int c) {
  const int w = width_;
  double* p = row(r);
  const double inv = 1.0 / p[c];
  for (int j = 0; j < w; ++j) p[j] *= inv;
  p[c] = 1.0;
  // A private copy of the pivot row lets the update loops vectorize.
  double* __restrict pr = pivot_row_.data();
  std::copy(p, p + w, pr);
  auto eliminate = [pr, w, c](double* __restrict target) {
    const double f = target[c];
    if (f == 0.0) return;
    for (int j = 0; j < w; ++j) target[j] -= f * pr[j];
    target[c] = 0.0;
  };
  for (int i = 0; i < nrows_; ++i) {
    if (i != r) eliminate(row(i));
  }
  eliminate(obj_.data());
  basis_[r] = c;
}

int Tableau::choose_entering(const SimplexOptions& opts, bool bland) const {
  const double tol = opts.optimality_tolerance;
  if (bland) {
    for (int j = 0; j < ncols_; ++j) {
      if (obj_[j] > tol) return j;
    }
    return -1;
  }
  auto best_in = [&](int lo, int hi) {
    int best = -1;
    double best_val = tol;
    for (int j = lo; j < hi; ++j) {
      if (obj_[j] > best_val) {
        best_val = obj_[j];
        best = j;
      }
    }
    return best;
  };
  constexpr int kFullPricingWidth = 512;
  if (ncols_ <= kFullPricingWidth) return best_in(0, ncols_);
  // Partial pricing: first segment (cyclically) holding a candidate wins.
  const int seg = std::max(128, ncols_ / 8);
  const int nseg = (ncols_ + seg - 1) / seg;
  int& cursor = pricing_cursor_;
  for (int s = 0; s < nseg; ++s) {
    const int idx = (cursor + s) % nseg;
    const int lo = idx * seg;
    const int hi = std::min(ncols_, lo + seg);
    const int j = best_in(lo, hi);
    if (j >= 0) {
      cursor = idx;
      return j;
    }
  }
  return -1;
}

int Tableau::choose_leaving(int c, const SimplexOptions& opts, bool bland,
                            double& step) const {
  const double ptol = opts.pivot_tolerance;
  const int rhs = rhs_col();
  if (bland) {
    int best = -1;
    double best_ratio = 0.0;
    for (int r = 0; r < nrows_; ++r) {
      const double a = row(r)[c];
      if (a <= ptol) continue;
      const double ratio = std::max(row(r)[rhs], 0.0) / a;
      if (best < 0 || ratio < best_ratio - 1e-14 ||
          (ratio <= best_ratio + 1e-14 && basis_[r] < basis_[best])) {
        best = r;
        best_ratio = ratio;
      }
    }
    step = best_ratio;
    return best;
  }
  // Harris two-pass ratio test: bound the step with relaxed feasibility,
  // then take the largest pivot element among rows within the bound.
  const double ftol = opts.feasibility_tolerance;
  double bound = INFINITY;
  for (int r = 0; r < nrows_; ++r) {
    const double a = row(r)[c];
    if (a <= ptol) continue;
    bound = std::min(bound, (std::max(row(r)[rhs], 0.0) + ftol) / a);
  }
  if (!std::isfinite(bound)) return -1;
  int best = -1;
  double best_a = 0.0;
  for (int r = 0; r < nrows_; ++r) {
    const double a = row(r)[c];
    if (a <= ptol) continue;
    if (std::max(row(r)[rhs], 0.0) / a <= bound && a > best_a) {
      best_a = a;
      best = r;
    }
  }
  step = best >= 0 ? std::max(row(best)[rhs], 0.0) / best_a : 0.0;
  return best;
}

LpStatus Tableau::iterate(const SimplexOptions& opts) {
  int degenerate_run = 0;
  const int rhs = rhs_col();
  while (true) {
    const bool bland = degenerate_run >= opts.degenerate_run_limit;
    const int c = choose_entering(opts, bland);
    if (c < 0) return LpStatus::Optimal;
    double step = 0.0;
    const int r = choose_leaving(c, opts, bland, step);
    if (r < 0) return LpStatus::Unbounded;
    pivot(r, c);
    ++iterations_;
    // Harris steps may leave basic values slightly negative.
    for (int i = 0; i < nrows_; ++i) {
      double& v = row(i)[rhs];
      if (v < 0.0) {
        if (v < -1e3 * opts.feasibility_tolerance) return LpStatus::Numerical;
        v = 0.0;
      }
    }
    degenerate_run = step <= opts.feasibility_tolerance ? degenerate_run + 1 : 0;
    if (iterations_ >= opts.max_iterations) return LpStatus::IterationLimit;
  }
}

void Tableau::drive_out_artificials() {
  int r = 0;
  while (r < nrows_) {
    if (!is_artificial(basis_[r])) {
      ++r;
      continue;
    }
    double* tr = row(r);
    int best = -1;
    double best_abs = 1e-9;
    for (int j = 0; j < ncols_; ++j) {
      if (std::abs(tr[j]) > best_abs) {
        best_abs = std::abs(tr[j]);
        best = j;
      }
    }
    // The artificial sits at (numerically) zero; make that exact so the
    // degenerate pivot cannot amplify roundoff.
    tr[rhs_col()] = 0.0;
    if (best >= 0) {
      pivot(r, best);
      ++r;
      continue;
    }
    dropped_.emplace_back(tr, tr + stride_);
    const int last = nrows_ - 1;
    if (r != last) {
      std::copy(row(last), row(last) + stride_, tr);
      basis_[r] = basis_[last];
    }
    std::fill(row(last), row(last) + stride_, 0.0);
    basis_[last] = -1;
    --nrows_;
  }
}

LpStatus Tableau::phase_one(const SimplexOptions& opts) {
  std::fill(obj_.begin(), obj_.end(), 0.0);
  const int rhs = rhs_col();
  for (int r = 0; r < nrows_; ++r) {
    const double* tr = row(r);
    for (int j = 0; j < ncols_; ++j) obj_[j] += tr[j];
    obj_[rhs] += tr[rhs];
  }
  const LpStatus st = iterate(opts);
  if (st != LpStatus::Optimal) return st;
  infeasibility_ = std::max(0.0, obj_[rhs]);
  const double scale = std::max(1.0, static_cast<double>(nart_));
  if (infeasibility_ > opts.feasibility_tolerance * scale) {
    return LpStatus::Infeasible;
  }
  drive_out_artificials();
  return LpStatus::Optimal;
}

bool Tableau::append_column(std::span<const double> column,
                            double dependency_tolerance) {
  if (ncols_ >= cap_cols_) {
    throw std::logic_error("Tableau::append_column: no spare column");
  }
  if (width_ != stride_) {
    throw std::logic_error("Tableau::append_column after phase two started");
  }
  if (column.size() != static_cast<std::size_t>(nart_)) {
    throw std::invalid_argument("appended column has the wrong length");
  }
  auto project = [&](const double* tr) {
    double acc = 0.0;
    for (int q = 0; q < nart_; ++q) {
      const double binv = tr[art_col(q)];
      if (binv != 0.0) acc += binv * row_sign_[q] * column[q];
    }
    return acc;
  };
  for (const auto& dr : dropped_) {
    if (std::abs(project(dr.data())) > dependency_tolerance) return false;
  }
  const int j = ncols_++;
  for (int r = 0; r < nrows_; ++r) row(r)[j] = project(row(r));
  return true;
}

int Tableau::append_upper_bound(int col, double upper) {
  if (nrows_ >= cap_rows_ || ncols_ >= cap_cols_) {
    throw std::logic_error("Tableau::append_upper_bound: no spare capacity");
  }
  for (int r = 0; r < nrows_; ++r) {
    if (basis_[r] == col) {
      throw std::logic_error("append_upper_bound needs a nonbasic column");
    }
  }
  const int s = ncols_++;
  const int r = nrows_++;
  double* tr = row(r);
  std::fill(tr, tr + stride_, 0.0);
  tr[col] = 1.0;
  tr[s] = 1.0;
  tr[rhs_col()] = upper;
  basis_[r] = s;
  return s;
}

LpStatus Tableau::optimize(std::span<const double> objective,
                           const SimplexOptions& opts) {
  if (objective.size() != static_cast<std::size_t>(ncols_)) {
    throw std::invalid_argument("objective length does not match columns");
  }
  std::fill(obj_.begin(), obj_.end(), 0.0);
  for (int j = 0; j < ncols_; ++j) obj_[j] = objective[j];
  const int rhs = rhs_col();
  for (int r = 0; r < nrows_; ++r) {
    const int bc = basis_[r];
    const double cb = bc < ncols_ ? objective[bc] : 0.0;
    if (cb == 0.0) continue;
    const double* tr = row(r);
    for (int j = 0; j < ncols_; ++j) obj_[j] -= cb * tr[j];
    obj_[rhs] -= cb * tr[rhs];
  }
  // Artificial columns never re-enter, so stop carrying them.
  width_ = cap_cols_ + 1;
  return iterate(opts);
}

std::vector<double> Tableau::solution() const {
  std::vector<double> x(static_cast<std::size_t>(ncols_), 0.0);
  for (int r = 0; r < nrows_; ++r) {
    const int bc = basis_[r];
    if (bc >= 0 && bc < ncols_) x[bc] = row(r)[rhs_col()];
  }
  return x;
}

LpSolution SimplexSolver::solve(const LinearProgram& lp) {
  LpSolution out;
  Tableau tab(lp, 0, 0);
  const LpStatus p1 = tab.phase_one(opts_);
  out.infeasibility = tab.infeasibility();
  if (p1 != LpStatus::Optimal) {
    out.status = p1;
    out.iterations = tab.iterations();
    return out;
  }
  out.status = tab.optimize(lp.c, opts_);
  out.iterations = tab.iterations();
  out.objective = tab.objective_value();
  out.x = tab.solution();
  return out;
}

}  // namespace bellmap::lp
