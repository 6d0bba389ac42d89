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

#include <vector>

#include "bellmap/optimizer.hpp"
#include "bellmap/probability.hpp"
#include "bellmap/state.hpp"

namespace bellmap {

struct CglmpEvaluation {
  int d = 0;
  double value = 0.0;
  double classical_bound = 2.0;
  /// I_d of the noise table the visibility refers to.
  double noise_value = 0.0;
  /// (2 - I_noise) / (I_d - I_noise) when I_d > 2, else 1.
  double implied_visibility = 1.0;
};

/// Sum of P(a, b | A_i, B_k) over outcome pairs with a = b + c (mod d).
double prob_a_minus_b(const ProbabilityTable& table, int i, int k, int c);

/// I_d of a two-setting table: terms weighted by 1 - 2j/(d-1) for
/// j < floor(d/2). Throws ScenarioError unless m = 2.
double cglmp_expression(const ProbabilityTable& table);

/// I_d with the implied visibility against white noise.
CglmpEvaluation cglmp_value(const ProbabilityTable& table);

/// Same against an arbitrary noise table of the same shape.
CglmpEvaluation cglmp_value(const ProbabilityTable& table,
                            const ProbabilityTable& noise);

/// Outcome reflections x -> -x (mod d) applied to Alice, Bob or both.
enum class Reflection { None, Alice, Bob, Both };

ProbabilityTable reflect_outcomes(const ProbabilityTable& table,
                                  Reflection which);

/// Largest I_d over the four reflections (none of which changes v_crit).
CglmpEvaluation cglmp_best_value(const ProbabilityTable& table);

/// Linear-phase M1 settings (Alice 0 and 1/2, Bob +-1/4 in units of
/// 2 pi j / d), arranged as concatenated angles for kind M1, m = 2. The
/// four Bob sign choices are returned; which one is best depends on the
/// state's phase convention.
std::vector<std::vector<double>> linear_phase_settings(int d);

struct CglmpOptimum {
  CglmpEvaluation evaluation;
  /// Concatenated full angles for the settings kind.
  std::vector<double> angles;
  int restarts = 0;
};

struct CglmpSearchOptions {
  ObservableKind kind = ObservableKind::M1;
  int restarts = 8;
  std::uint64_t seed = 1;
  NelderMeadOptions nelder_mead{};
  int polish_rounds = 3;
  int threads = 1;
};

/// Maximizes I_d (best reflection) over two-setting observables of the
/// requested kind. For M1 the linear-phase settings seed the first restarts.
CglmpOptimum optimize_cglmp(const QuditState& state,
                            const CglmpSearchOptions& opts = {});

struct CurvePoint {
  double parameter = 0.0;
  double visibility = 1.0;
  double value = 0.0;
};

/// optimize_cglmp per state; parameters[i] labels states[i].
std::vector<CurvePoint> cglmp_visibility_curve(
    const std::vector<QuditState>& states,
    const std::vector<double>& parameters,
    const CglmpSearchOptions& opts = {});

}  // namespace bellmap
