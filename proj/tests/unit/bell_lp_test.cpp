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
#include <fstream>
#include <random>
#include <sstream>

#include "bellmap/bell_lp.hpp"
#include "bellmap/cglmp.hpp"
#include "bellmap/io.hpp"
#include "bellmap/scenarios.hpp"
#include "bellmap/simplex.hpp"
#include "test_support.hpp"

namespace bellmap {
namespace {

using testing::compile_blocks;
using testing::random_angles;

lp::LinearProgram make_lp(int rows, int cols, std::vector<double> a, std::vector<double> b,
                          std::vector<double> c) {
  lp::LinearProgram p;
  p.rows = rows;
  p.cols = cols;
  p.a = std::move(a);
  p.b = std::move(b);
  p.c = std::move(c);
  return p;
}

TEST(Simplex, SolvesSmallProgram) {
  // max x + y, x + 2y <= 4, 3x + y <= 6 (slacks s1, s2).
  const auto p = make_lp(2, 4, {1, 2, 1, 0, 3, 1, 0, 1}, {4, 6}, {1, 1, 0, 0});
  const lp::LpSolution s = lp::SimplexSolver().solve(p);
  ASSERT_EQ(s.status, lp::LpStatus::Optimal);
  EXPECT_NEAR(s.objective, 2.8, 1e-12);
  EXPECT_NEAR(s.x[0], 1.6, 1e-12);
  EXPECT_NEAR(s.x[1], 1.2, 1e-12);
}

TEST(Simplex, ReportsInfeasible) {
  const auto p = make_lp(1, 2, {1, 1}, {-1}, {1, 0});
  EXPECT_EQ(lp::SimplexSolver().solve(p).status, lp::LpStatus::Infeasible);
}

TEST(Simplex, ReportsUnbounded) {
  const auto p = make_lp(1, 2, {1, -1}, {1}, {1, 0});
  EXPECT_EQ(lp::SimplexSolver().solve(p).status, lp::LpStatus::Unbounded);
}

TEST(Simplex, SurvivesBealeCyclingExample) {
  // Columns x1..x3 (slacks), x4..x7; cycles under the textbook pivot rule.
  const auto p = make_lp(3, 7,
                         {1, 0, 0, 0.25, -8, -1, 9,
                          0, 1, 0, 0.5, -12, -0.5, 3,
                          0, 0, 1, 0, 0, 1, 0},
                         {0, 0, 1}, {0, 0, 0, 0.75, -20, 0.5, -6});
  const lp::LpSolution s = lp::SimplexSolver().solve(p);
  ASSERT_EQ(s.status, lp::LpStatus::Optimal);
  EXPECT_NEAR(s.objective, 1.25, 1e-12);
}

TEST(Simplex, DropsRedundantRows) {
  const auto p = make_lp(3, 3, {1, 1, 0, 2, 2, 0, 0, 1, 1}, {1, 2, 1}, {1, 0, 1});
  const lp::LpSolution s = lp::SimplexSolver().solve(p);
  ASSERT_EQ(s.status, lp::LpStatus::Optimal);
  EXPECT_NEAR(s.objective, 2.0, 1e-12);
}

TEST(BellLp, AtomEncodingRoundTrips) {
  for (int atom = 0; atom < 81; ++atom) {
    const auto o = decode_atom(atom, 2, 3);
    EXPECT_EQ(encode_atom(o, 3), atom);
  }
  EXPECT_EQ(decode_atom(1, 2, 3), (std::vector<int>{0, 0, 0, 1}));
}

TEST(BellLp, ShapeOfTheQutritInstance) {
  const LrLpInstance inst(white_table(2, 3), white_table(2, 3));
  EXPECT_EQ(inst.variable_count(), 82);
  EXPECT_EQ(inst.constraint_count(), 36);
}

TEST(BellLp, DeterministicTablesAreFeasible) {
  std::mt19937_64 rng(20);
  for (int d = 2; d <= 3; ++d) {
    for (int m = 2; m <= 3; ++m) {
      std::uniform_int_distribution<int> pick(0, d - 1);
      std::vector<int> assignment(static_cast<std::size_t>(2 * m));
      for (int& x : assignment) x = pick(rng);
      const ProbabilityTable t = deterministic_atom_table(assignment, m, d);
      const Feasibility f = lr_feasible(t);
      ASSERT_TRUE(f.feasible);
      ASSERT_TRUE(f.witness.has_value());
      EXPECT_LT(marginal_residual(*f.witness, t), 1e-9);
    }
  }
}

// Brute force at d = 2: every mixture of the 16 deterministic strategies is
// feasible and the LP finds a witness.
TEST(BellLpProperty, AtomMixturesAreFeasibleAtD2) {
  std::mt19937_64 rng(21);
  std::exponential_distribution<double> w;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> entries(16, 0.0);
    double total = 0.0;
    std::vector<double> weights(16);
    for (double& x : weights) total += (x = w(rng));
    for (int atom = 0; atom < 16; ++atom) {
      const auto o = decode_atom(atom, 2, 2);
      const ProbabilityTable t = deterministic_atom_table(o, 2, 2);
      for (std::size_t j = 0; j < entries.size(); ++j) {
        entries[j] += weights[atom] / total * t.entries()[j];
      }
    }
    const ProbabilityTable mix(2, 2, entries);
    const Feasibility f = lr_feasible(mix);
    EXPECT_TRUE(f.feasible);
    EXPECT_LT(marginal_residual(*f.witness, mix), 1e-9);
  }
}

// For two binary settings per side the local polytope is cut out by the
// eight CHSH inequalities, and white noise scales the correlators.
double chsh_oracle(const ProbabilityTable& t) {
  double e[2][2];
  for (int i = 0; i < 2; ++i) {
    for (int k = 0; k < 2; ++k) {
      e[i][k] = t(i, k, 0, 0) + t(i, k, 1, 1) - t(i, k, 0, 1) - t(i, k, 1, 0);
    }
  }
  double best = 0.0;
  for (int flip = 0; flip < 4; ++flip) {
    double s = 0.0;
    for (int i = 0; i < 2; ++i) {
      for (int k = 0; k < 2; ++k) s += (i * 2 + k == flip ? -1.0 : 1.0) * e[i][k];
    }
    best = std::max(best, std::abs(s));
  }
  return std::min(1.0, 2.0 / best);
}

TEST(BellLpProperty, MatchesChshAtD2) {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 40; ++trial) {
    const QuditState s = testing::random_pure_state(rng, 2);
    const auto angles = random_angles(rng, 4 * 4);
    const ProbabilityTable t =
        probability_table(s, compile_blocks(ObservableKind::FullUnitary, 2, angles, 0, 2),
                          compile_blocks(ObservableKind::FullUnitary, 2, angles, 2, 2));
    const VisibilityResult r = critical_visibility(t, white_table(2, 2));
    ASSERT_NE(r.status, VisibilityStatus::SolverFailure) << r.message;
    EXPECT_NEAR(r.v_crit, chsh_oracle(t), 1e-8) << "trial " << trial;
  }
}

TEST(BellLp, BellStateAtChshSettings) {
  const QuditState s = symmetric_rank_k_state(2, 2);
  const auto settings = linear_phase_settings(2);
  double best = 1.0;
  for (const auto& full : settings) {
    const ProbabilityTable t =
        probability_table(s, compile_blocks(ObservableKind::M1, 2, full, 0, 2),
                          compile_blocks(ObservableKind::M1, 2, full, 2, 2));
    best = std::min(best, critical_visibility(t, white_table(2, 2)).v_crit);
  }
  EXPECT_NEAR(best, 1.0 / std::sqrt(2.0), 1e-10);
}

ProbabilityTable linear_phase_table(const QuditState& s, int d) {
  const auto full = linear_phase_settings(d).front();
  return probability_table(s, compile_blocks(ObservableKind::M1, d, full, 0, 2),
                           compile_blocks(ObservableKind::M1, d, full, 2, 2));
}

TEST(BellLpProperty, FeasibleExactlyBelowTheCriticalVisibility) {
  const ProbabilityTable sig = linear_phase_table(symmetric_rank_k_state(3, 3), 3);
  const ProbabilityTable noise = white_table(2, 3);
  const double vc = critical_visibility(sig, noise).v_crit;
  ASSERT_LT(vc, 0.7);
  for (double v = 0.0; v <= 1.0; v += 0.05) {
    const double probe = std::abs(v - vc) < 1e-6 ? v - 1e-6 : v;
    EXPECT_EQ(lr_feasible(mix_tables(sig, noise, probe)).feasible, probe <= vc)
        << "v=" << probe;
  }
  EXPECT_TRUE(lr_feasible(mix_tables(sig, noise, vc - 1e-7)).feasible);
  EXPECT_FALSE(lr_feasible(mix_tables(sig, noise, vc + 1e-5)).feasible);
}

TEST(BellLp, WitnessReproducesTheCriticalMixture) {
  const ProbabilityTable sig = linear_phase_table(symmetric_rank_k_state(3, 3), 3);
  const ProbabilityTable noise = white_table(2, 3);
  const VisibilityResult r = critical_visibility(sig, noise);
  ASSERT_EQ(r.status, VisibilityStatus::Optimal);
  ASSERT_TRUE(r.witness.has_value());
  EXPECT_LT(marginal_residual(*r.witness, mix_tables(sig, noise, r.v_crit)), 1e-9);
}

TEST(BellLp, LinearPhaseSymmetricQutrit) {
  const ProbabilityTable sig = linear_phase_table(symmetric_rank_k_state(3, 3), 3);
  EXPECT_NEAR(critical_visibility(sig, white_table(2, 3)).v_crit, 0.6961524227, 1e-9);
}

TEST(BellLp, ProductStateHasNoViolation) {
  const QuditState s = schmidt_state(std::vector<double>{1.0}, 3);
  std::mt19937_64 rng(23);
  const auto angles = random_angles(rng, 4 * 9);
  const ProbabilityTable t =
      probability_table(s, compile_blocks(ObservableKind::FullUnitary, 3, angles, 0, 2),
                        compile_blocks(ObservableKind::FullUnitary, 3, angles, 2, 2));
  const VisibilityResult r = critical_visibility(t, white_table(2, 3));
  EXPECT_EQ(r.status, VisibilityStatus::NoViolation);
  EXPECT_EQ(r.v_crit, 1.0);

  VisibilityOptions capped;
  capped.visibility_cap = 2.0;
  const VisibilityResult g = critical_visibility(t, white_table(2, 3), capped);
  EXPECT_GT(g.raw_visibility, 1.0);
  EXPECT_EQ(g.v_crit, 1.0);
}

TEST(BellLp, CachedSolverMatchesColdSolves) {
  std::mt19937_64 rng(24);
  const QuditState s = testing::random_pure_state(rng, 3);
  VisibilitySolver solver;
  for (int trial = 0; trial < 6; ++trial) {
    const auto angles = random_angles(rng, 4 * 9);
    const auto alice = compile_blocks(ObservableKind::FullUnitary, 3, angles, 0, 2);
    const auto bob = compile_blocks(ObservableKind::FullUnitary, 3, angles, 2, 2);
    const ProbabilityTable sig = probability_table(s, alice, bob);
    const ProbabilityTable noise = trial % 2 ? white_table(2, 3)
                                             : noise_table(NoiseModel::product(), s, alice, bob);
    EXPECT_NEAR(solver.solve(sig, noise).v_crit, critical_visibility(sig, noise).v_crit, 1e-10);
  }
}

TEST(BellLp, DumpsTheInstance) {
  testing::TempDir dir("lpdump");
  VisibilityOptions opts;
  opts.dump_directory = dir.path();
  const ProbabilityTable sig = linear_phase_table(symmetric_rank_k_state(3, 3), 3);
  (void)critical_visibility(sig, white_table(2, 3), opts);
  int files = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir.path())) {
    ++files;
    std::ifstream f(e.path());
    std::stringstream text;
    text << f.rdbuf();
    EXPECT_NE(text.str().find("Maximize"), std::string::npos);
    EXPECT_NE(text.str().find("End"), std::string::npos);
  }
  EXPECT_EQ(files, 1);
}

struct OracleCase {
  const char* file;
  const char* noise;
  double v_crit;
};

// Values from tests/oracles/lp_oracle.py (scipy HiGHS) on the same files.
class FrozenOracle : public ::testing::TestWithParam<OracleCase> {};

TEST_P(FrozenOracle, AgreesWithIndependentSolver) {
  const OracleCase& c = GetParam();
  const ProbabilityTable t =
      read_probability_table(std::filesystem::path(BELLMAP_TEST_DATA_DIR) / c.file);
  ProbabilityTable noise = white_table(t.settings(), t.outcomes());
  if (std::string(c.noise) == "product") {
    std::vector<double> e(t.entries().size());
    const int m = t.settings(), d = t.outcomes();
    for (int i = 0; i < m; ++i) {
      for (int k = 0; k < m; ++k) {
        for (int a = 0; a < d; ++a) {
          for (int b = 0; b < d; ++b) {
            double pa = 0.0, pb = 0.0;
            for (int x = 0; x < d; ++x) {
              pa += t(i, k, a, x);
              pb += t(i, k, x, b);
            }
            e[t.index(i, k, a, b)] = pa * pb;
          }
        }
      }
    }
    noise = ProbabilityTable(m, d, e);
  }
  EXPECT_NEAR(critical_visibility(t, noise).v_crit, c.v_crit, 1e-8);
}


INSTANTIATE_TEST_SUITE_P(
    Tables, FrozenOracle,
    ::testing::Values(OracleCase{"m3_alpha69.tab", "white", 0.7032713659603551},
                      OracleCase{"sym_d4_m1.tab", "white", 0.6905497394878108},
                      OracleCase{"sym_m3.tab", "white", 0.6961524613096882},
                      OracleCase{"rank2_product.tab", "white", 0.6821327849728703},
                      OracleCase{"rank2_product.tab", "product", 0.707106792398017}));

}  // namespace
}  // namespace bellmap
