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
#include <vector>

#include "bellmap/linalg.hpp"
#include "bellmap/noise.hpp"
#include "bellmap/observable.hpp"
#include "bellmap/state.hpp"

namespace bellmap {

/// Joint outcome probabilities P(a, b | A_i, B_k) for m settings per party
/// and d outcomes per measurement. Entries are stored with i slowest, then k,
/// a, b.
class ProbabilityTable {
 public:
  static constexpr double kNegativeClamp = 1e-12;
  static constexpr double kNormTolerance = 1e-9;

  /// Validates the entries: values in [-1e-12, 0) are clamped to zero, more
  /// negative ones are rejected, and every (i, k) block must sum to one.
  ProbabilityTable(int m, int d, std::vector<double> entries);

  int settings() const noexcept { return m_; }
  int outcomes() const noexcept { return d_; }

  double operator()(int i, int k, int a, int b) const noexcept {
    return entries_[index(i, k, a, b)];
  }

  std::size_t index(int i, int k, int a, int b) const noexcept {
    return ((static_cast<std::size_t>(i) * m_ + k) * d_ + a) * d_ + b;
  }

  std::span<const double> entries() const noexcept { return entries_; }

  bool same_shape(const ProbabilityTable& other) const noexcept {
    return m_ == other.m_ && d_ == other.d_;
  }

 private:
  int m_;
  int d_;
  std::vector<double> entries_;
};

/// Uniform table, the statistics of the maximally mixed state.
ProbabilityTable white_table(int m, int d);

/// Born-rule table for precompiled measurement unitaries (row a of U is the
/// outcome-a basis vector). Pure states take an amplitude-only path.
ProbabilityTable probability_table(const QuditState& state,
                                   std::span<const CMatrix> alice,
                                   std::span<const CMatrix> bob);

/// Throws ScenarioError on empty or unequal setting lists or dimension
/// mismatch.
ProbabilityTable probability_table(const QuditState& state,
                                   std::span<const ObservableSpec> alice,
                                   std::span<const ObservableSpec> bob);

/// Table of the noise state attached to `signal` under the same settings.
/// White and Product noise use closed forms; other models go through
/// noise_state().
ProbabilityTable noise_table(const NoiseModel& model, const QuditState& signal,
                             std::span<const CMatrix> alice,
                             std::span<const CMatrix> bob);

/// Entrywise v * signal + (1 - v) * noise.
ProbabilityTable mix_tables(const ProbabilityTable& signal,
                            const ProbabilityTable& noise, double v);

}  // namespace bellmap
