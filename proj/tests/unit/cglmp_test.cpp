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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "bellmap/cglmp.hpp"
#include "bellmap/errors.hpp"
#include "bellmap/scenarios.hpp"
#include "test_support.hpp"

namespace bellmap {
namespace {

ProbabilityTable linear_phase_table(const QuditState& s, const std::vector<double>& angles) {
  const int d = s.dimension();
  const auto a = testing::compile_blocks(ObservableKind::M1, d, angles, 0, 2);
  const auto b = testing::compile_blocks(ObservableKind::M1, d, angles, 2, 2);
  return probability_table(s, a, b);
}

double best_linear_phase_value(const QuditState& s) {
  double best = -1e9;
  for (const auto& angles : linear_phase_settings(s.dimension())) {
    best = std::max(best, cglmp_best_value(linear_phase_table(s, angles)).value);
  }
  return best;
}

TEST(Cglmp, WhiteNoiseScoresZero) {
  for (int d = 2; d <= 6; ++d) EXPECT_NEAR(cglmp_expression(white_table(2, d)), 0.0, 1e-12);
}

TEST(Cglmp, DeterministicTablesRespectTheClassicalBound) {
  // All 3^4 deterministic strategies for d = 3.
  double best = -1e9;
  for (int code = 0; code < 81; ++code) {
    int out[4];
    for (int j = 0, c = code; j < 4; ++j, c /= 3) out[j] = c % 3;
    std::vector<double> e(36, 0.0);
    ProbabilityTable shape(2, 3, std::vector<double>(36, 1.0 / 9.0));
    for (int i = 0; i < 2; ++i) {
      for (int k = 0; k < 2; ++k) e[shape.index(i, k, out[i], out[2 + k])] = 1.0;
    }
    best = std::max(best, cglmp_expression(ProbabilityTable(2, 3, e)));
  }
  EXPECT_NEAR(best, 2.0, 1e-12);
}

TEST(Cglmp, QubitValueIsTsirelson) {
  EXPECT_NEAR(best_linear_phase_value(symmetric_rank_k_state(2, 2)), 2.0 * std::sqrt(2.0), 1e-9);
}

// Bell-operator eigen-decomposition in tests/oracles/cglmp_oracle.py.
TEST(Cglmp, LinearPhaseValuesMatchOracle) {
  EXPECT_NEAR(best_linear_phase_value(symmetric_rank_k_state(3, 3)), 2.8729340511723374, 1e-9);
  EXPECT_NEAR(best_linear_phase_value(symmetric_rank_k_state(4, 4)), 2.896243218458708, 1e-9);
  const std::vector<double> c3{0.6168940281497085, 0.48875711357120244, 0.6168940281497083};
  EXPECT_NEAR(best_linear_phase_value(schmidt_state(c3, 3)), 2.914854215512678, 1e-9);
}

TEST(Cglmp, ImpliedVisibilityOfTheSymmetricQutrit) {
  const QuditState s = symmetric_rank_k_state(3, 3);
  double v = 1.0;
  for (const auto& angles : linear_phase_settings(3)) {
    v = std::min(v, cglmp_best_value(linear_phase_table(s, angles)).implied_visibility);
  }
  EXPECT_NEAR(v, 0.6961524227066314, 1e-9);
}

TEST(Cglmp, AsymmetricCoefficientsMatchOracle) {
  const auto r = asymmetric_coefficients(3);
  ASSERT_EQ(r.coefficients.size(), 3u);
  EXPECT_NEAR(r.value, 2.914854215512678, 1e-6);
  EXPECT_NEAR(r.implied_visibility, 0.6861406616345067, 1e-6);
  EXPECT_NEAR(r.coefficients[0], 0.6168940281497085, 1e-3);
  EXPECT_NEAR(r.coefficients[1], 0.48875711357120244, 1e-3);
  EXPECT_NEAR(r.coefficients[2], 0.6168940281497083, 1e-3);
}

TEST(Cglmp, OptimizerReachesTheLinearPhaseValue) {
  CglmpSearchOptions o;
  o.restarts = 3;
  const auto r = optimize_cglmp(symmetric_rank_k_state(3, 3), o);
  EXPECT_NEAR(r.evaluation.value, 2.8729340511723374, 1e-6);
  EXPECT_EQ(r.angles.size(), 8u);
}

TEST(CglmpProperty, BothSidedReflectionKeepsProbDifferencesMirrored) {
  std::mt19937_64 rng(40);
  for (int trial = 0; trial < 5; ++trial) {
    const QuditState s = testing::random_pure_state(rng, 3);
    const auto t = linear_phase_table(s, testing::random_angles(rng, 8));
    const auto r = reflect_outcomes(t, Reflection::Both);
    for (int i = 0; i < 2; ++i) {
      for (int k = 0; k < 2; ++k) {
        for (int c = 0; c < 3; ++c) {
          EXPECT_NEAR(prob_a_minus_b(r, i, k, c), prob_a_minus_b(t, i, k, (3 - c) % 3), 1e-12);
        }
      }
    }
    EXPECT_GE(cglmp_best_value(t).value, cglmp_expression(t) - 1e-12);
    const auto twice = reflect_outcomes(reflect_outcomes(t, Reflection::Alice), Reflection::Alice);
    for (std::size_t j = 0; j < t.entries().size(); ++j) {
      EXPECT_EQ(twice.entries()[j], t.entries()[j]);
    }
  }
}

TEST(Cglmp, RequiresTwoSettings) {
  EXPECT_THROW(cglmp_expression(white_table(3, 3)), ScenarioError);
}

TEST(Cglmp, VisibilityCurveIsLabelled) {
  CglmpSearchOptions o;
  o.restarts = 1;
  const auto pts = cglmp_visibility_curve(
      {schmidt_family_state(0.0, 45.0), schmidt_family_state(54.7356, 45.0)}, {0.0, 54.7356}, o);
  ASSERT_EQ(pts.size(), 2u);
  EXPECT_EQ(pts[0].visibility, 1.0);
  EXPECT_NEAR(pts[1].visibility, 0.6961524227066314, 1e-4);
  EXPECT_EQ(pts[1].parameter, 54.7356);
}

}  // namespace
}  // namespace bellmap
