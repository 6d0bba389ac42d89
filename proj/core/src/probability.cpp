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

#include "bellmap/probability.hpp"

#include <cmath>
#include <string>

#include "bellmap/errors.hpp"

namespace bellmap {

ProbabilityTable::ProbabilityTable(int m, int d, std::vector<double> entries)
    : m_(m), d_(d), entries_(std::move(entries)) {
  if (m < 1) throw ScenarioError("need at least one setting per party");
  if (d < 2) throw InvalidDimension("outcome count must be >= 2");
  const std::size_t expected = static_cast<std::size_t>(m) * m * d * d;
  if (entries_.size() != expected) {
    throw ScenarioError("probability table for m=" + std::to_string(m) +
                        ", d=" + std::to_string(d) + " needs " +
                        std::to_string(expected) + " entries, got " +
                        std::to_string(entries_.size()));
  }
  const std::size_t block = static_cast<std::size_t>(d) * d;
  for (std::size_t start = 0; start < expected; start += block) {
    double sum = 0.0;
    for (std::size_t j = start; j < start + block; ++j) {
      double& p = entries_[j];
      if (!std::isfinite(p)) throw ScenarioError("non-finite probability");
      if (p < 0.0) {
        if (p < -kNegativeClamp) {
          throw ScenarioError("negative probability " + std::to_string(p));
        }
        p = 0.0;
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > kNormTolerance) {
      throw ScenarioError("setting block " + std::to_string(start / block) +
                          " sums to " + std::to_string(sum));
    }
  }
}

ProbabilityTable white_table(int m, int d) {
  const std::size_t n = static_cast<std::size_t>(m) * m * d * d;
  return ProbabilityTable(m, d,
                          std::vector<double>(n, 1.0 / static_cast<double>(d * d)));
}

namespace {

void check_settings(int d, std::span<const CMatrix> alice,
                    std::span<const CMatrix> bob) {
  if (alice.empty() || alice.size() != bob.size()) {
    throw ScenarioError("both parties need the same nonzero number of settings");
  }
  for (const auto* list : {&alice, &bob}) {
    for (const CMatrix& u : *list) {
      if (u.rows() != d || u.cols() != d) {
        throw ScenarioError("measurement unitary dimension does not match "
                            "the state (d=" +
                            std::to_string(d) + ")");
      }
    }
  }
}

}  // namespace

ProbabilityTable probability_table(const QuditState& state,
                                   std::span<const CMatrix> alice,
                                   std::span<const CMatrix> bob) {
  const int d = state.dimension();
  check_settings(d, alice, bob);
  const int m = static_cast<int>(alice.size());
  std::vector<double> entries(static_cast<std::size_t>(m) * m * d * d);
  auto at = [&](int i, int k, int a, int b) -> double& {
    return entries[((static_cast<std::size_t>(i) * m + k) * d + a) * d + b];
  };

  if (state.is_pure()) {
    const CVector& psi = state.amplitudes();
    CMatrix amp(d, d);
    for (int a = 0; a < d; ++a) {
      for (int b = 0; b < d; ++b) amp(a, b) = psi(a * d + b);
    }
    // (U_A (x) U_B) psi reshaped is U_A Psi U_B^T.
    std::vector<CMatrix> left(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) left[i] = alice[i] * amp;
    for (int i = 0; i < m; ++i) {
      for (int k = 0; k < m; ++k) {
        const CMatrix out = left[i] * bob[k].transpose();
        for (int a = 0; a < d; ++a) {
          for (int b = 0; b < d; ++b) at(i, k, a, b) = std::norm(out(a, b));
        }
      }
    }
  } else {
    const CMatrix rho = state.density_matrix();
    for (int i = 0; i < m; ++i) {
      for (int k = 0; k < m; ++k) {
        const CMatrix w = kron(alice[i], bob[k]);
        const CMatrix wr = w * rho;
        for (int a = 0; a < d; ++a) {
          for (int b = 0; b < d; ++b) {
            const int r = a * d + b;
            at(i, k, a, b) = w.row(r).dot(wr.row(r)).real();
          }
        }
      }
    }
  }
  return ProbabilityTable(m, d, std::move(entries));
}

ProbabilityTable probability_table(const QuditState& state,
                                   std::span<const ObservableSpec> alice,
                                   std::span<const ObservableSpec> bob) {
  const int d = state.dimension();
  auto compile = [d](std::span<const ObservableSpec> specs) {
    std::vector<CMatrix> out;
    out.reserve(specs.size());
    for (const ObservableSpec& s : specs) {
      if (s.d != d) {
        throw ScenarioError("observable dimension " + std::to_string(s.d) +
                            " does not match state dimension " +
                            std::to_string(d));
      }
      out.push_back(compile_observable(s));
    }
    return out;
  };
  const auto ua = compile(alice);
  const auto ub = compile(bob);
  return probability_table(state, ua, ub);
}

ProbabilityTable noise_table(const NoiseModel& model, const QuditState& signal,
                             std::span<const CMatrix> alice,
                             std::span<const CMatrix> bob) {
  const int d = signal.dimension();
  check_settings(d, alice, bob);
  const int m = static_cast<int>(alice.size());
  if (model.kind() == NoiseModel::Kind::White) return white_table(m, d);
  if (model.kind() == NoiseModel::Kind::Product) {
    const CMatrix rho_a = reduced_state(signal, Party::A);
    const CMatrix rho_b = reduced_state(signal, Party::B);
    auto marginals = [d](std::span<const CMatrix> us, const CMatrix& rho) {
      std::vector<std::vector<double>> out;
      for (const CMatrix& u : us) {
        const CMatrix t = u * rho * u.adjoint();
        std::vector<double> p(static_cast<std::size_t>(d));
        for (int a = 0; a < d; ++a) p[a] = t(a, a).real();
        out.push_back(std::move(p));
      }
      return out;
    };
    const auto pa = marginals(alice, rho_a);
    const auto pb = marginals(bob, rho_b);
    std::vector<double> entries(static_cast<std::size_t>(m) * m * d * d);
    std::size_t idx = 0;
    for (int i = 0; i < m; ++i) {
      for (int k = 0; k < m; ++k) {
        for (int a = 0; a < d; ++a) {
          for (int b = 0; b < d; ++b) entries[idx++] = pa[i][a] * pb[k][b];
        }
      }
    }
    return ProbabilityTable(m, d, std::move(entries));
  }
  return probability_table(noise_state(model, signal), alice, bob);
}

ProbabilityTable mix_tables(const ProbabilityTable& signal,
                            const ProbabilityTable& noise, double v) {
  if (!signal.same_shape(noise)) {
    throw ScenarioError("cannot mix tables of different shapes");
  }
  if (!(v >= 0.0 && v <= 1.0)) {
    throw ScenarioError("visibility must lie in [0, 1], got " +
                        std::to_string(v));
  }
  const auto s = signal.entries();
  const auto n = noise.entries();
  std::vector<double> out(s.size());
  for (std::size_t j = 0; j < s.size(); ++j) out[j] = v * s[j] + (1.0 - v) * n[j];
  return ProbabilityTable(signal.settings(), signal.outcomes(), std::move(out));
}

}  // namespace bellmap
