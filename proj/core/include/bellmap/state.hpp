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

#include <optional>

#include "bellmap/linalg.hpp"

namespace bellmap {

enum class Party { A, B };

/// Bipartite d x d state, held either as a pure amplitude vector (index
/// a*d + b, Alice's level most significant) or as a d^2 x d^2 density matrix.
class QuditState {
 public:
  static constexpr double kPureNormTolerance = 1e-12;
  static constexpr double kMixedTolerance = 1e-12;
  static constexpr double kEigenvalueFloor = -1e-10;

  /// Throws InvalidDimension / InvalidState when the invariants fail.
  static QuditState pure(int d, CVector amplitudes);

  /// Same as pure() but rescales to unit norm first (zero vector rejected).
  static QuditState normalized(int d, CVector amplitudes);

  /// The tolerance applies to the Hermiticity and trace checks.
  static QuditState mixed(int d, CMatrix rho,
                          double tolerance = kMixedTolerance);

  int dimension() const noexcept { return d_; }
  bool is_pure() const noexcept { return amplitudes_.has_value(); }

  /// Throws InvalidState for mixed states.
  const CVector& amplitudes() const;

  /// Projector for pure states, the stored matrix otherwise.
  CMatrix density_matrix() const;

 private:
  QuditState(int d, std::optional<CVector> psi, std::optional<CMatrix> rho)
      : d_(d), amplitudes_(std::move(psi)), rho_(std::move(rho)) {}

  int d_;
  std::optional<CVector> amplitudes_;
  std::optional<CMatrix> rho_;
};

/// Partial trace over the other party.
CMatrix reduced_state(const QuditState& state, Party party);

/// Partial transpose on Bob's subsystem.
CMatrix partial_transpose(const CMatrix& rho, int d);

/// Smallest eigenvalue of a Hermitian matrix.
double min_eigenvalue(const CMatrix& hermitian);

}  // namespace bellmap
