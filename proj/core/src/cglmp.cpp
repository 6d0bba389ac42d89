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

#include "bellmap/cglmp.hpp"

#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "bellmap/errors.hpp"
#include "bellmap/linalg.hpp"

namespace bellmap {

namespace {

int wrap(int x, int d) { return ((x % d) + d) % d; }

void require_two_settings(const ProbabilityTable& table) {
  if (table.settings() != 2) {
    throw ScenarioError("CGLMP needs two settings per party, got " +
                        std::to_string(table.settings()));
  }
}

double implied(double value, double noise_value) {
  if (value <= 2.0 || value <= noise_value) return 1.0;
  return std::min(1.0, (2.0 - noise_value) / (value - noise_value));
}

}  // namespace

double prob_a_minus_b(const ProbabilityTable& table, int i, int k, int c) {
  const int d = table.outcomes();
  double s = 0.0;
  for (int b = 0; b < d; ++b) s += table(i, k, wrap(b + c, d), b);
  return s;
}

namespace {

// I_d with outcomes optionally mapped x -> -x on either side.
double expression(const ProbabilityTable& table, bool ra, bool rb) {
  const int d = table.outcomes();
  // diff[i][k][c] = P(a = b + c) after the reflections.
  std::vector<double> diff(4 * static_cast<std::size_t>(d), 0.0);
  for (int i = 0; i < 2; ++i) {
    for (int k = 0; k < 2; ++k) {
      double* row = diff.data() + (i * 2 + k) * d;
      for (int a = 0; a < d; ++a) {
        const int a2 = ra ? wrap(-a, d) : a;
        for (int b = 0; b < d; ++b) {
          const int b2 = rb ? wrap(-b, d) : b;
          row[wrap(a2 - b2, d)] += table(i, k, a, b);
        }
      }
    }
  }
  auto D = [&](int i, int k, int c) { return diff[(i * 2 + k) * d + wrap(c, d)]; };
  double total = 0.0;
  for (int j = 0; j < d / 2; ++j) {
    const double w = 1.0 - 2.0 * j / (d - 1);
    // Settings: A1 = 0, A2 = 1, B1 = 0, B2 = 1. P(B = A + c) = D(.., -c).
    const double plus = D(0, 0, j) + D(1, 0, -(j + 1)) + D(1, 1, j) + D(0, 1, -j);
    const double minus =
        D(0, 0, -j - 1) + D(1, 0, j) + D(1, 1, -j - 1) + D(0, 1, j + 1);
    total += w * (plus - minus);
  }
  return total;
}

}  // namespace

double cglmp_expression(const ProbabilityTable& table) {
  require_two_settings(table);
  return expression(table, false, false);
}

CglmpEvaluation cglmp_value(const ProbabilityTable& table) {
  require_two_settings(table);
  return cglmp_value(table, white_table(2, table.outcomes()));
}

CglmpEvaluation cglmp_value(const ProbabilityTable& table,
                            const ProbabilityTable& noise) {
  require_two_settings(table);
  if (!table.same_shape(noise)) {
    throw ScenarioError("noise table shape does not match");
  }
  CglmpEvaluation out;
  out.d = table.outcomes();
  out.value = cglmp_expression(table);
  out.noise_value = cglmp_expression(noise);
  out.implied_visibility = implied(out.value, out.noise_value);
  return out;
}

ProbabilityTable reflect_outcomes(const ProbabilityTable& table,
                                  Reflection which) {
  const int m = table.settings();
  const int d = table.outcomes();
  const bool ra = which == Reflection::Alice || which == Reflection::Both;
  const bool rb = which == Reflection::Bob || which == Reflection::Both;
  std::vector<double> e(table.entries().size());
  for (int i = 0; i < m; ++i) {
    for (int k = 0; k < m; ++k) {
      for (int a = 0; a < d; ++a) {
        for (int b = 0; b < d; ++b) {
          e[table.index(i, k, ra ? wrap(-a, d) : a, rb ? wrap(-b, d) : b)] =
              table(i, k, a, b);
        }
      }
    }
  }
  return ProbabilityTable(m, d, std::move(e));
}

CglmpEvaluation cglmp_best_value(const ProbabilityTable& table) {
  require_two_settings(table);
  CglmpEvaluation best = cglmp_value(table);
  for (const auto& [ra, rb] : {std::pair{true, false}, {false, true}, {true, true}}) {
    const double v = expression(table, ra, rb);
    if (v > best.value) {
      best.value = v;
      best.implied_visibility = implied(v, best.noise_value);
    }
  }
  return best;
}

std::vector<std::vector<double>> linear_phase_settings(int d) {
  if (d < 2) throw InvalidDimension("linear_phase_settings needs d >= 2");
  const double unit = 2.0 * kPi / d;
  std::vector<std::vector<double>> out;
  for (double s1 : {1.0, -1.0}) {
    for (double s2 : {1.0, -1.0}) {
      const double shifts[4] = {0.0, 0.5, 0.25 * s1, -0.25 * s2};
      std::vector<double> angles;
      for (double shift : shifts) {
        for (int j = 1; j < d; ++j) angles.push_back(unit * j * shift);
      }
      out.push_back(std::move(angles));
    }
  }
  return out;
}

CglmpOptimum optimize_cglmp(const QuditState& state,
                            const CglmpSearchOptions& opts) {
  const int d = state.dimension();
  ObjectiveSpec spec{state};
  spec.kind = opts.kind;
  spec.settings = 2;
  spec.validate();

  auto factory = [&]() -> Objective {
    auto alice = std::make_shared<std::vector<CMatrix>>(2);
    auto bob = std::make_shared<std::vector<CMatrix>>(2);
    return [spec, alice, bob](std::span<const double> free) {
      const auto full = spec.expand(free);
      const std::size_t per = static_cast<std::size_t>(spec.angles_per_observable());
      for (std::size_t o = 0; o < 4; ++o) {
        CMatrix u = compile_observable(spec.kind, spec.dimension(),
                                       std::span(full).subspan(o * per, per));
        (o < 2 ? (*alice)[o] : (*bob)[o - 2]) = std::move(u);
      }
      return -cglmp_best_value(probability_table(spec.state, *alice, *bob)).value;
    };
  };

  std::vector<std::vector<double>> starts;
  if (opts.kind == ObservableKind::M1) {
    for (const auto& full : linear_phase_settings(d)) starts.push_back(spec.restrict(full));
  }
  const int restarts = std::max<int>(opts.restarts, static_cast<int>(starts.size()));
  MultistartOptions mo;
  mo.nelder_mead = opts.nelder_mead;
  mo.polish_rounds = opts.polish_rounds;
  mo.threads = opts.threads;
  mo.initial_points = std::move(starts);
  const MultistartResult ms =
      multistart_minimize(factory, spec.search_dimension(), restarts, opts.seed, mo);
  if (ms.best_restart < 0) throw OptimizerError("every CGLMP restart failed");

  CglmpOptimum out;
  out.angles = spec.expand(ms.x);
  out.restarts = restarts;
  const auto [alice, bob] = spec.observables(out.angles);
  out.evaluation = cglmp_best_value(probability_table(state, alice, bob));
  return out;
}

std::vector<CurvePoint> cglmp_visibility_curve(
    const std::vector<QuditState>& states,
    const std::vector<double>& parameters, const CglmpSearchOptions& opts) {
  if (states.size() != parameters.size()) {
    throw ScenarioError("one parameter per state is required");
  }
  std::vector<CurvePoint> out;
  out.reserve(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    const CglmpOptimum best = optimize_cglmp(states[i], opts);
    out.push_back({parameters[i], best.evaluation.implied_visibility,
                   best.evaluation.value});
  }
  return out;
}

}  // namespace bellmap
