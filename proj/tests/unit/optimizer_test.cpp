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

#include "bellmap/errors.hpp"
#include "bellmap/optimizer.hpp"
#include "bellmap/parallel.hpp"
#include "bellmap/scenarios.hpp"
#include "test_support.hpp"

namespace bellmap {
namespace {

ObjectiveSpec sym_spec(ObservableKind kind) {
  return ObjectiveSpec(symmetric_rank_k_state(3, 3), kind, 2);
}

OptimizerOptions single_thread() {
  OptimizerOptions o;
  o.threads = 1;
  return o;
}

TEST(ObjectiveSpec, FreeIndicesDropGaugeAndFrozen) {
  ObjectiveSpec u = sym_spec(ObservableKind::FullUnitary);
  EXPECT_EQ(u.angles_per_observable(), 9);
  EXPECT_EQ(u.free_indices().size(), 6u);
  EXPECT_EQ(u.search_dimension(), 24);
  u.reduce_gauge = false;
  EXPECT_EQ(u.search_dimension(), 36);

  ObjectiveSpec m3 = sym_spec(ObservableKind::M3);
  m3.frozen = {0, 1, 4};
  EXPECT_EQ(m3.free_indices(), (std::vector<int>{2, 3, 5}));
  EXPECT_EQ(m3.search_dimension(), 12);
}

TEST(ObjectiveSpec, ExpandRestrictRoundTrip) {
  ObjectiveSpec m3 = sym_spec(ObservableKind::M3);
  m3.frozen = {0, 1, 4};
  std::mt19937_64 rng(30);
  const auto free = testing::random_angles(rng, 12);
  const auto full = m3.expand(free);
  ASSERT_EQ(full.size(), 24u);
  for (int obs = 0; obs < 4; ++obs) {
    for (int j : {0, 1, 4}) EXPECT_EQ(full[obs * 6 + j], 0.0);
  }
  EXPECT_EQ(m3.restrict(full), free);
  const auto [alice, bob] = m3.observables(full);
  EXPECT_EQ(alice.size(), 2u);
  EXPECT_EQ(bob[1].angles, std::vector<double>(full.begin() + 18, full.end()));
}

TEST(ObjectiveSpec, ValidationErrors) {
  ObjectiveSpec bad = sym_spec(ObservableKind::M1);
  bad.frozen = {5};
  EXPECT_THROW(bad.validate(), ParametrizationError);
  ObjectiveSpec one = sym_spec(ObservableKind::M1);
  one.settings = 1;
  EXPECT_THROW(one.validate(), ScenarioError);
}

TEST(Optimizer, SymmetricQutritWithM1) {
  const auto r = minimize_visibility(sym_spec(ObservableKind::M1), 8, 3, single_thread());
  ASSERT_TRUE(r.ok());
  EXPECT_NEAR(r.v_crit, 0.6962, 5e-4);
  EXPECT_EQ(r.history.size(), 8u);
  EXPECT_EQ(r.full_angles.size(), 8u);
}

TEST(Optimizer, ProductStateNeverViolates) {
  ObjectiveSpec s(schmidt_state(std::vector<double>{1.0}, 3), ObservableKind::FullUnitary, 2);
  const auto r = minimize_visibility(s, 3, 1, single_thread());
  EXPECT_EQ(r.v_crit, 1.0);
  EXPECT_EQ(r.status, VisibilityStatus::NoViolation);
}

TEST(OptimizerProperty, DeterministicForAFixedSeed) {
  const ObjectiveSpec spec = sym_spec(ObservableKind::M2);
  const auto a = minimize_visibility(spec, 3, 99, single_thread());
  const auto b = minimize_visibility(spec, 3, 99, single_thread());
  EXPECT_EQ(a.v_crit, b.v_crit);
  EXPECT_EQ(a.full_angles, b.full_angles);
  EXPECT_EQ(a.history, b.history);
  OptimizerOptions two = single_thread();
  two.threads = 2;
  const auto c = minimize_visibility(spec, 3, 99, two);
  EXPECT_EQ(a.full_angles, c.full_angles);
  EXPECT_EQ(a.history, c.history);
}

TEST(OptimizerProperty, MoreRestartsNeverHurt) {
  const ObjectiveSpec spec = sym_spec(ObservableKind::M1);
  const auto few = minimize_visibility(spec, 2, 17, single_thread());
  const auto many = minimize_visibility(spec, 5, 17, single_thread());
  EXPECT_LE(many.v_crit, few.v_crit);
  for (std::size_t r = 0; r < few.history.size(); ++r) EXPECT_EQ(few.history[r], many.history[r]);
}

TEST(OptimizerProperty, ContinuousUnderSmallAnglePerturbations) {
  const ObjectiveSpec spec = sym_spec(ObservableKind::FullUnitary);
  const auto best = minimize_visibility(spec, 4, 5, single_thread());
  VisibilityObjective f(spec);
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1e-3, 1e-3);
  for (int trial = 0; trial < 10; ++trial) {
    auto full = best.full_angles;
    for (double& x : full) x += u(rng);
    const double v = f.evaluate(full).v_crit;
    EXPECT_LT(std::abs(v - best.v_crit), 5e-3);
    EXPECT_GE(v, best.v_crit - 1e-9);
  }
}

TEST(Optimizer, TransferToFullUnitaryKeepsTheValue) {
  const ObjectiveSpec m1 = sym_spec(ObservableKind::M1);
  const ObjectiveSpec u = sym_spec(ObservableKind::FullUnitary);
  const auto r = minimize_visibility(m1, 2, 8, single_thread());
  VisibilityObjective fu(u);
  EXPECT_NEAR(fu.evaluate(u.expand(transfer_angles(m1, r.full_angles, u))).v_crit, r.v_crit, 1e-9);
}

TEST(Optimizer, LiftedSettingsKeepTheValue) {
  const QuditState s = schmidt_family_state(60.0, 45.0);
  const ObjectiveSpec m1(s, ObservableKind::M1);
  const ObjectiveSpec m3(s, ObservableKind::M3);
  const auto r = minimize_visibility(m1, 2, 8, single_thread());
  VisibilityObjective f3(m3);
  EXPECT_NEAR(f3.evaluate(m3.expand(transfer_angles(m1, r.full_angles, m3))).v_crit, r.v_crit,
              1e-9);
  EXPECT_THROW(transfer_angles(m3, m3.expand(std::vector<double>(24, 0.0)), m1),
               ParametrizationError);
}

TEST(Optimizer, TransferEmbedsIntoLargerDimensions) {
  const QuditState s3 = symmetric_rank_k_state(3, 2);
  const QuditState s4 = symmetric_rank_k_state(4, 2);
  const ObjectiveSpec from(s3, ObservableKind::FullUnitary);
  const ObjectiveSpec to(s4, ObservableKind::FullUnitary, 3);
  std::mt19937_64 rng(32);
  const auto full = from.expand(testing::random_angles(rng, 24));
  const auto free = transfer_angles(from, full, to);
  ASSERT_EQ(free.size(), static_cast<std::size_t>(to.search_dimension()));
  const auto [a, b] = to.observables(to.expand(free));
  EXPECT_EQ(a.size(), 3u);
  const CMatrix u = compile_observable(a[2]);
  EXPECT_NEAR(std::abs(u(3, 3)), 1.0, 1e-12);
}

TEST(Optimizer, StagedSearchReachesTheRankTwoValue) {
  const std::vector<double> c{1.0, 1.0};
  const auto stages = schmidt_ladder(c, 3, ObservableKind::FullUnitary);
  ASSERT_EQ(stages.size(), 3u);
  const auto r = minimize_staged(stages, 6, 7, single_thread());
  EXPECT_NEAR(r.v_crit, 0.6821, 5e-4);
}

TEST(Optimizer, MultistartFindsTheGlobalMinimum) {
  MultistartOptions o;
  o.threads = 1;
  auto g = [](double x) { return std::cos(3.0 * x) + 0.1 * std::pow(x - 2.0, 2); };
  const auto r = multistart_minimize(
      [g] { return Objective([g](std::span<const double> x) { return g(x[0]); }); }, 1, 10, 4,
      o);
  double grid_min = 1e9;
  for (int i = 0; i <= 200000; ++i) grid_min = std::min(grid_min, g(-5.0 + 15.0 * i / 200000.0));
  EXPECT_NEAR(r.f, grid_min, 1e-6);
  for (double h : r.history) EXPECT_GE(h, r.f);
}

TEST(Optimizer, FailedRestartsAreRecorded) {
  MultistartOptions o;
  o.threads = 1;
  const auto r = multistart_minimize(
      [] {
        return Objective([](std::span<const double> x) {
          if (x[0] > 3.0) return std::numeric_limits<double>::infinity();
          return x[0] * x[0];
        });
      },
      1, 6, 2, o);
  EXPECT_EQ(r.history.size(), 6u);
  int nan = 0;
  for (double h : r.history) nan += std::isnan(h);
  EXPECT_EQ(nan, r.failed_restarts);
  EXPECT_LT(r.f, 1e-6);
}

TEST(Optimizer, ScanWarmStartsAlongTheGrid) {
  ObjectiveSpec templ(schmidt_family_state(60.0, 45.0), ObservableKind::M1);
  ScanOptions so;
  so.optimizer = single_thread();
  std::vector<std::size_t> seen;
  so.progress = [&seen](std::size_t p, const ScanPoint&) { seen.push_back(p); };
  const auto pts = scan_family(
      [](std::span<const double> p) { return schmidt_family_state(p[0], p[1]); },
      {{60.0, 45.0}, {61.0, 45.0}, {0.0, 45.0}}, templ, 2, 3, so);
  ASSERT_EQ(pts.size(), 3u);
  EXPECT_EQ(seen, (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_LT(pts[0].result.v_crit, 0.70);
  EXPECT_NEAR(pts[1].result.v_crit, pts[0].result.v_crit, 5e-3);
  EXPECT_EQ(pts[2].result.v_crit, 1.0);
}

TEST(Optimizer, ScanOrderKeepsGridIndexingAndRefinementNeverHurts) {
  ObjectiveSpec templ(schmidt_family_state(50.0, 45.0), ObservableKind::M2);
  const StateFamily family = [](std::span<const double> p) {
    return schmidt_family_state(p[0], p[1]);
  };
  const std::vector<std::vector<double>> grid{{40.0, 45.0}, {50.0, 45.0}, {60.0, 45.0}};
  ScanOptions plain;
  plain.optimizer = single_thread();
  plain.order = {2, 1, 0};
  ScanOptions refined = plain;
  refined.refine_passes = 2;
  const auto a = scan_family(family, grid, templ, 1, 4, plain);
  const auto b = scan_family(family, grid, templ, 1, 4, refined);
  for (std::size_t p = 0; p < grid.size(); ++p) {
    EXPECT_EQ(a[p].parameters, grid[p]);
    EXPECT_EQ(b[p].parameters, grid[p]);
    EXPECT_LE(b[p].result.v_crit, a[p].result.v_crit);
  }
  ScanOptions bad = plain;
  bad.order = {0, 0, 1};
  EXPECT_THROW(scan_family(family, grid, templ, 1, 4, bad), ScenarioError);
}

TEST(Seeds, DerivedSeedsAreStableAndDistinct) {
  EXPECT_EQ(derive_seed(7, 0), derive_seed(7, 0));
  EXPECT_NE(derive_seed(7, 0), derive_seed(7, 1));
  EXPECT_NE(derive_seed(7, 0), derive_seed(8, 0));
  EXPECT_EQ(restart_point(5, 3, 2), restart_point(5, 3, 2));
  for (double x : restart_point(50, 3, 1)) {
    EXPECT_GE(x, 0.0);
    EXPECT_LT(x, 2.0 * kPi);
  }
}

TEST(Parallel, RunsEveryIndexOnceAndRethrows) {
  std::vector<int> hits(100, 0);
  parallel_for(hits.size(), 3, [&](std::size_t i, int) { hits[i] += 1; });
  for (int h : hits) EXPECT_EQ(h, 1);
  EXPECT_THROW(parallel_for(10, 2,
                            [](std::size_t i, int) {
                              if (i == 4) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
  EXPECT_EQ(resolve_thread_count(5), 5);
  EXPECT_GE(resolve_thread_count(0), 1);
}

}  // namespace
}  // namespace bellmap
