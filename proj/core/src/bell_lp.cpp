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

#include "bellmap/bell_lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "bellmap/errors.hpp"

namespace bellmap {

namespace {

int int_pow(int base, int exp) {
  int out = 1;
  for (int i = 0; i < exp; ++i) out *= base;
  return out;
}

constexpr double kWitnessSumTolerance = 1e-9;
constexpr double kWitnessResidualTolerance = 1e-8;
constexpr double kFeasibilityTolerance = 1e-8;
constexpr double kDegenerateTolerance = 1e-12;

// Fills column `atom` of a row-major matrix with `cols` columns.
void fill_atom_column(std::vector<double>& a, int cols, int atom, int m,
                      int d) {
  const auto out = decode_atom(atom, m, d);
  for (int i = 0; i < m; ++i) {
    for (int k = 0; k < m; ++k) {
      const int r = ((i * m + k) * d + out[i]) * d + out[m + k];
      a[static_cast<std::size_t>(r) * cols + atom] = 1.0;
    }
  }
}

}  // namespace

std::string_view to_string(VisibilityStatus status) {
  switch (status) {
    case VisibilityStatus::Optimal:
      return "optimal";
    case VisibilityStatus::NoViolation:
      return "no-violation";
    case VisibilityStatus::SolverFailure:
      return "solver-failure";
  }
  return "?";
}

std::vector<int> decode_atom(int atom, int m, int d) {
  std::vector<int> out(static_cast<std::size_t>(2 * m));
  for (int pos = 2 * m - 1; pos >= 0; --pos) {
    out[pos] = atom % d;
    atom /= d;
  }
  return out;
}

int encode_atom(std::span<const int> outcomes, int d) {
  int atom = 0;
  for (int o : outcomes) atom = atom * d + o;
  return atom;
}

LrLpInstance::LrLpInstance(ProbabilityTable signal_table,
                           ProbabilityTable noise_table)
    : signal(std::move(signal_table)), noise(std::move(noise_table)) {
  if (!signal.same_shape(noise)) {
    throw ScenarioError("signal and noise tables differ in shape");
  }
}

int LrLpInstance::atom_count() const noexcept {
  return int_pow(outcomes(), 2 * settings());
}

int LrLpInstance::constraint_count() const noexcept {
  return settings() * settings() * outcomes() * outcomes();
}

lp::LinearProgram LrLpInstance::build(double visibility_cap,
                                      std::span<const double> row_scale) const {
  const int m = settings();
  const int d = outcomes();
  const int atoms = atom_count();
  const int rows = constraint_count();
  if (!row_scale.empty() && row_scale.size() != static_cast<std::size_t>(rows)) {
    throw ScenarioError("row scale needs one factor per marginal row");
  }
  lp::LinearProgram prog;
  prog.rows = rows + 1;
  prog.cols = atoms + 2;
  prog.a.assign(static_cast<std::size_t>(prog.rows) * prog.cols, 0.0);
  prog.b.assign(static_cast<std::size_t>(prog.rows), 0.0);
  prog.c.assign(static_cast<std::size_t>(prog.cols), 0.0);
  for (int t = 0; t < atoms; ++t) fill_atom_column(prog.a, prog.cols, t, m, d);
  const auto s = signal.entries();
  const auto n = noise.entries();
  for (int r = 0; r < rows; ++r) {
    prog.at(r, atoms) = -(s[r] - n[r]);
    prog.b[r] = n[r];
    if (!row_scale.empty()) {
      const double f = row_scale[r];
      for (int j = 0; j < prog.cols; ++j) prog.at(r, j) *= f;
      prog.b[r] *= f;
    }
  }
  prog.at(rows, atoms) = 1.0;
  prog.at(rows, atoms + 1) = 1.0;
  prog.b[rows] = visibility_cap;
  prog.c[atoms] = 1.0;
  return prog;
}

lp::LinearProgram marginal_system(const ProbabilityTable& target) {
  const int m = target.settings();
  const int d = target.outcomes();
  lp::LinearProgram prog;
  prog.rows = m * m * d * d;
  prog.cols = int_pow(d, 2 * m);
  prog.a.assign(static_cast<std::size_t>(prog.rows) * prog.cols, 0.0);
  for (int t = 0; t < prog.cols; ++t) fill_atom_column(prog.a, prog.cols, t, m, d);
  prog.b.assign(target.entries().begin(), target.entries().end());
  prog.c.assign(static_cast<std::size_t>(prog.cols), 0.0);
  return prog;
}

double marginal_residual(std::span<const double> witness,
                         const ProbabilityTable& target) {
  const int m = target.settings();
  const int d = target.outcomes();
  std::vector<double> acc(target.entries().size(), 0.0);
  for (std::size_t t = 0; t < witness.size(); ++t) {
    if (witness[t] == 0.0) continue;
    const auto out = decode_atom(static_cast<int>(t), m, d);
    for (int i = 0; i < m; ++i) {
      for (int k = 0; k < m; ++k) acc[target.index(i, k, out[i], out[m + k])] += witness[t];
    }
  }
  double worst = 0.0;
  for (std::size_t r = 0; r < acc.size(); ++r) {
    worst = std::max(worst, std::abs(acc[r] - target.entries()[r]));
  }
  return worst;
}

struct VisibilitySolver::Cache {
  int m = 0;
  int d = 0;
  std::vector<double> noise;
  bool noise_feasible = false;
  std::optional<lp::Tableau> base;
};

VisibilitySolver::VisibilitySolver(VisibilityOptions opts)
    : opts_(std::move(opts)), cache_(std::make_unique<Cache>()) {}
VisibilitySolver::~VisibilitySolver() = default;
VisibilitySolver::VisibilitySolver(VisibilitySolver&&) noexcept = default;
VisibilitySolver& VisibilitySolver::operator=(VisibilitySolver&&) noexcept =
    default;

VisibilityResult VisibilitySolver::finish(const LrLpInstance& inst,
                                          lp::LpStatus status,
                                          std::vector<double> x,
                                          int iterations) {
  VisibilityResult out;
  out.iterations = iterations;
  if (status != lp::LpStatus::Optimal) {
    out.status = VisibilityStatus::SolverFailure;
    out.message = std::string("simplex ended with status ") +
                  std::string(lp::to_string(status));
    return out;
  }
  const int atoms = inst.atom_count();
  const double v = x[atoms];
  std::vector<double> witness(x.begin(), x.begin() + atoms);
  double sum = 0.0;
  for (double p : witness) sum += p;
  if (std::abs(sum - 1.0) > kWitnessSumTolerance) {
    out.status = VisibilityStatus::SolverFailure;
    out.message = "witness distribution sums to " + std::to_string(sum);
    return out;
  }
  // Check the marginals against v S + (1 - v) N directly; v may exceed one
  // when the cap is raised, so the target is not necessarily a valid table.
  const auto s = inst.signal.entries();
  const auto n = inst.noise.entries();
  std::vector<double> marg(s.size(), 0.0);
  const int m = inst.settings();
  const int d = inst.outcomes();
  for (int t = 0; t < atoms; ++t) {
    if (witness[t] == 0.0) continue;
    const auto o = decode_atom(t, m, d);
    for (int i = 0; i < m; ++i) {
      for (int k = 0; k < m; ++k) {
        marg[inst.signal.index(i, k, o[i], o[m + k])] += witness[t];
      }
    }
  }
  double residual = 0.0;
  for (std::size_t r = 0; r < s.size(); ++r) {
    residual = std::max(residual, std::abs(marg[r] - (v * s[r] + (1.0 - v) * n[r])));
  }
  if (residual > kWitnessResidualTolerance) {
    out.status = VisibilityStatus::SolverFailure;
    out.message = "witness marginal residual " + std::to_string(residual);
    return out;
  }
  out.raw_visibility = v;
  if (v >= 1.0 - opts_.simplex.optimality_tolerance) {
    out.v_crit = 1.0;
    out.status = VisibilityStatus::NoViolation;
  } else {
    out.v_crit = std::max(0.0, v);
    out.status = VisibilityStatus::Optimal;
  }
  if (opts_.keep_witness) out.witness = std::move(witness);
  return out;
}

VisibilityResult VisibilitySolver::solve_cold(const LrLpInstance& inst) {
  lp::SimplexSolver solver(opts_.simplex);
  const lp::LinearProgram prog = inst.build(opts_.visibility_cap);
  lp::LpSolution sol = solver.solve(prog);
  if (sol.status == lp::LpStatus::Infeasible) {
    VisibilityResult out;
    out.status = VisibilityStatus::SolverFailure;
    out.iterations = sol.iterations;
    out.message = "no local model exists at any visibility in [0, cap]";
    return out;
  }
  return finish(inst, sol.status, std::move(sol.x), sol.iterations);
}

VisibilityResult VisibilitySolver::solve(const ProbabilityTable& signal,
                                         const ProbabilityTable& noise) {
  LrLpInstance inst(signal, noise);
  if (opts_.dump_directory) {
    std::filesystem::create_directories(*opts_.dump_directory);
    char name[64];
    std::snprintf(name, sizeof(name), "lr_instance_%06d.lp", dump_counter_++);
    write_lp_dump(inst, *opts_.dump_directory / name, opts_.visibility_cap);
  }

  const auto s = signal.entries();
  const auto n = noise.entries();
  double gap = 0.0;
  for (std::size_t r = 0; r < s.size(); ++r) gap = std::max(gap, std::abs(s[r] - n[r]));
  if (gap <= kDegenerateTolerance) {
    VisibilityResult out;
    out.status = VisibilityStatus::NoViolation;
    out.v_crit = 1.0;
    out.raw_visibility = opts_.visibility_cap;
    return out;
  }

  const int m = signal.settings();
  const int d = signal.outcomes();
  Cache& c = *cache_;
  if (!c.base || c.m != m || c.d != d ||
      !std::equal(c.noise.begin(), c.noise.end(), n.begin(), n.end())) {
    c.m = m;
    c.d = d;
    c.noise.assign(n.begin(), n.end());
    c.base.emplace(marginal_system(noise), 2, 1);
    const lp::LpStatus p1 = c.base->phase_one(opts_.simplex);
    c.noise_feasible = p1 == lp::LpStatus::Optimal;
    if (p1 == lp::LpStatus::Numerical || p1 == lp::LpStatus::IterationLimit) {
      c.base.reset();
      VisibilityResult out;
      out.status = VisibilityStatus::SolverFailure;
      out.message = "phase one failed on the noise table";
      return out;
    }
  }
  if (!c.noise_feasible) return solve_cold(inst);

  lp::Tableau tab = *c.base;
  std::vector<double> vcol(s.size());
  for (std::size_t r = 0; r < s.size(); ++r) vcol[r] = -(s[r] - n[r]);
  if (!tab.append_column(vcol)) return solve_cold(inst);
  const int vidx = tab.structural_columns() - 1;
  tab.append_upper_bound(vidx, opts_.visibility_cap);
  std::vector<double> objective(static_cast<std::size_t>(tab.structural_columns()), 0.0);
  objective[vidx] = 1.0;
  const lp::LpStatus st = tab.optimize(objective, opts_.simplex);
  return finish(inst, st, tab.solution(), tab.iterations());
}

VisibilityResult critical_visibility(const ProbabilityTable& signal,
                                     const ProbabilityTable& noise,
                                     const VisibilityOptions& opts) {
  VisibilitySolver solver(opts);
  return solver.solve(signal, noise);
}

Feasibility lr_feasible(const ProbabilityTable& table,
                        const lp::SimplexOptions& opts) {
  lp::Tableau tab(marginal_system(table), 0, 0);
  const lp::LpStatus st = tab.phase_one(opts);
  if (st == lp::LpStatus::Numerical || st == lp::LpStatus::IterationLimit ||
      st == lp::LpStatus::Unbounded) {
    throw SolverFailure(std::string("feasibility LP ended with status ") +
                        std::string(lp::to_string(st)));
  }
  Feasibility out;
  out.infeasibility = tab.infeasibility();
  out.feasible = st == lp::LpStatus::Optimal &&
                 out.infeasibility <= kFeasibilityTolerance;
  if (out.feasible) {
    std::vector<double> w = tab.solution();
    if (marginal_residual(w, table) > kWitnessResidualTolerance) {
      throw SolverFailure("feasibility witness does not reproduce the table");
    }
    out.witness = std::move(w);
  }
  return out;
}

ProbabilityTable deterministic_atom_table(std::span<const int> assignment,
                                          int m, int d) {
  if (m < 1 || d < 2) throw ScenarioError("need m >= 1 and d >= 2");
  if (assignment.size() != static_cast<std::size_t>(2 * m)) {
    throw ScenarioError("deterministic strategy needs 2m outcomes");
  }
  for (int o : assignment) {
    if (o < 0 || o >= d) {
      throw ScenarioError("outcome " + std::to_string(o) + " out of range");
    }
  }
  std::vector<double> entries(static_cast<std::size_t>(m) * m * d * d, 0.0);
  for (int i = 0; i < m; ++i) {
    for (int k = 0; k < m; ++k) {
      entries[((static_cast<std::size_t>(i) * m + k) * d + assignment[i]) * d +
              assignment[m + k]] = 1.0;
    }
  }
  return ProbabilityTable(m, d, std::move(entries));
}

void write_lp_dump(const LrLpInstance& instance,
                   const std::filesystem::path& path, double visibility_cap) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open LP dump file " + path.string());
  const int m = instance.settings();
  const int d = instance.outcomes();
  const int atoms = instance.atom_count();
  const auto s = instance.signal.entries();
  const auto n = instance.noise.entries();
  char buf[64];
  auto num = [&](double x) {
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return std::string(buf);
  };
  out << "\\ local realistic model LP, m=" << m << " d=" << d << "\n";
  out << "Maximize\n obj: v\nSubject To\n";
  // Column lists per row, rebuilt from the atom decoding.
  std::vector<std::vector<int>> members(s.size());
  for (int t = 0; t < atoms; ++t) {
    const auto o = decode_atom(t, m, d);
    for (int i = 0; i < m; ++i) {
      for (int k = 0; k < m; ++k) {
        members[instance.signal.index(i, k, o[i], o[m + k])].push_back(t);
      }
    }
  }
  for (std::size_t r = 0; r < s.size(); ++r) {
    out << " c" << r << ":";
    int on_line = 0;
    for (int t : members[r]) {
      out << " + p" << t;
      if (++on_line % 12 == 0) out << "\n   ";
    }
    const double coef = -(s[r] - n[r]);
    out << (coef < 0 ? " - " : " + ") << num(std::abs(coef)) << " v = "
        << num(n[r]) << "\n";
  }
  out << "Bounds\n 0 <= v <= " << num(visibility_cap) << "\nEnd\n";
}

}  // namespace bellmap
