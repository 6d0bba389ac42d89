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

#include "bellmap/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "bellmap/errors.hpp"

namespace bellmap {

namespace {

class Evaluator {
 public:
  explicit Evaluator(const Objective& f) : f_(f) {}

  double operator()(std::span<const double> x) {
    ++count_;
    const double v = f_(x);
    if (!std::isfinite(v)) {
      std::ostringstream msg;
      msg << "objective returned " << v << " at (";
      for (std::size_t i = 0; i < x.size(); ++i) msg << (i ? ", " : "") << x[i];
      msg << ")";
      throw OptimizerError(msg.str());
    }
    return v;
  }

  int count() const noexcept { return count_; }

 private:
  const Objective& f_;
  int count_ = 0;
};

}  // namespace

NelderMeadResult nelder_mead(const Objective& f, std::vector<double> x0,
                             const NelderMeadOptions& opts) {
  const std::size_t n = x0.size();
  Evaluator eval(f);
  NelderMeadResult out;
  if (n == 0) {
    out.f = eval(x0);
    out.x = std::move(x0);
    out.evaluations = eval.count();
    out.converged = true;
    return out;
  }

  std::vector<std::vector<double>> simplex(n + 1, x0);
  std::vector<double> fv(n + 1);
  for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += opts.initial_step;
  for (std::size_t i = 0; i <= n; ++i) fv[i] = eval(simplex[i]);

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), xr(n), xe(n), xc(n);
  auto along = [&](double t, const std::vector<double>& toward,
                   std::vector<double>& dst) {
    for (std::size_t j = 0; j < n; ++j) {
      dst[j] = centroid[j] + t * (toward[j] - centroid[j]);
    }
  };

  int iter = 0;
  while (true) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[n - 1];

    double diameter = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        diameter = std::max(diameter, std::abs(simplex[i][j] - simplex[best][j]));
      }
    }
    if (fv[worst] - fv[best] < opts.f_tolerance || diameter < opts.x_tolerance) {
      out.converged = true;
      break;
    }
    if (iter >= opts.max_iterations) break;
    ++iter;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j];
    }
    for (double& c : centroid) c /= static_cast<double>(n);

    // x_r = c + alpha (c - x_worst)
    along(-opts.reflection, simplex[worst], xr);
    const double fr = eval(xr);
    if (fr < fv[best]) {
      along(-opts.reflection * opts.expansion, simplex[worst], xe);
      const double fe = eval(xe);
      if (fe < fr) {
        simplex[worst] = xe;
        fv[worst] = fe;
      } else {
        simplex[worst] = xr;
        fv[worst] = fr;
      }
      continue;
    }
    if (fr < fv[second]) {
      simplex[worst] = xr;
      fv[worst] = fr;
      continue;
    }
    if (fr < fv[worst]) {
      // Outside contraction toward the reflected point.
      along(-opts.reflection * opts.contraction, simplex[worst], xc);
      const double fc = eval(xc);
      if (fc <= fr) {
        simplex[worst] = xc;
        fv[worst] = fc;
        continue;
      }
    } else {
      along(opts.contraction, simplex[worst], xc);
      const double fc = eval(xc);
      if (fc < fv[worst]) {
        simplex[worst] = xc;
        fv[worst] = fc;
        continue;
      }
    }
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == best) continue;
      for (std::size_t j = 0; j < n; ++j) {
        simplex[i][j] = simplex[best][j] + opts.shrink * (simplex[i][j] - simplex[best][j]);
      }
      fv[i] = eval(simplex[i]);
    }
  }

  const auto best_it = std::min_element(fv.begin(), fv.end());
  const std::size_t best = static_cast<std::size_t>(best_it - fv.begin());
  out.x = simplex[best];
  out.f = fv[best];
  out.iterations = iter;
  out.evaluations = eval.count();
  return out;
}

}  // namespace bellmap
