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

#include <memory>
#include <string>
#include <string_view>

#include "bellmap/state.hpp"

namespace bellmap {

/// Admixture against which the visibility of a signal state is measured.
class NoiseModel {
 public:
  enum class Kind { White, Product, Dephasing, Custom };

  static NoiseModel white() { return NoiseModel(Kind::White, nullptr); }
  /// rho_A (x) rho_B built from the signal's reduced states.
  static NoiseModel product() { return NoiseModel(Kind::Product, nullptr); }
  /// Computational-basis diagonal of the signal.
  static NoiseModel dephasing() { return NoiseModel(Kind::Dephasing, nullptr); }
  /// Throws InvalidNoise unless `rho` is a valid mixed state.
  static NoiseModel custom(const QuditState& rho);

  Kind kind() const noexcept { return kind_; }
  const QuditState& custom_state() const;

 private:
  NoiseModel(Kind kind, std::shared_ptr<const QuditState> custom)
      : kind_(kind), custom_(std::move(custom)) {}

  Kind kind_;
  std::shared_ptr<const QuditState> custom_;
};

std::string_view to_string(NoiseModel::Kind kind);

/// Compiles the model into a density matrix for `signal`. Custom noise of a
/// different dimension raises InvalidNoise.
QuditState noise_state(const NoiseModel& model, const QuditState& signal);

}  // namespace bellmap
