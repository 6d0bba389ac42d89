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
#include <string>
#include <string_view>
#include <vector>

#include "bellmap/linalg.hpp"

namespace bellmap {

/// Measurement-device classes. Mk is k phase layers each followed by an
/// unbiased multiport (Fourier matrix); FullUnitary covers all of U(d).
enum class ObservableKind { M1, M2, M3, FullUnitary };

std::string_view to_string(ObservableKind kind);

/// Accepts "m1", "m2", "m3", "u" (also "full", "U3"-style spellings).
ObservableKind parse_observable_kind(std::string_view text);

/// Number of angles a single observable of this kind consumes.
int angle_count(ObservableKind kind, int d);

struct ObservableSpec {
  ObservableKind kind = ObservableKind::M1;
  int d = 3;
  std::vector<double> angles;

  /// Throws ParametrizationError when the angle count does not match.
  void validate() const;
};

/// U_kl = d^(-1/2) exp(2 pi i k l / d).
CMatrix fourier_matrix(int d);

/// diag(1, e^{i phi_0}, ..., e^{i phi_{d-2}}).
CMatrix phase_layer(std::span<const double> phases);

/// Mk = F D(phi_k) ... F D(phi_1), layer 1 on the input side.
/// FullUnitary = G_1 ... G_K D(delta): K = d(d-1)/2 complex Givens rotations
/// in QR elimination order, each consuming (theta, phi), then d input phases.
CMatrix compile_observable(ObservableKind kind, int d,
                           std::span<const double> angles);

inline CMatrix compile_observable(const ObservableSpec& spec) {
  spec.validate();
  return compile_observable(spec.kind, spec.d, spec.angles);
}

/// Inverse of the FullUnitary map: angles with compile_observable(FullUnitary,
/// d, angles) == u within roundoff. Throws ParametrizationError for
/// non-unitary input.
std::vector<double> decompose_unitary(const CMatrix& u);

/// FullUnitary angles with zero input phases whose unitary equals `u` up to
/// a diagonal phase on the left (the same measurement).
std::vector<double> gauge_fixed_angles(const CMatrix& u);

/// Index pairs (p, q) of the Givens rotations, in product order.
std::vector<std::pair<int, int>> givens_order(int d);

/// Relative phases (columns 1..d-1) of the chirp layer Y with
/// F Y F = D P F D' for diagonal D, D' and a permutation P.
std::vector<double> chirp_phases(int d);

/// Angles of a multiport kind with more layers than `from` whose basis is
/// the one of `from` at `angles` up to outcome relabeling and phases. The
/// extra layers are chirps. Throws ParametrizationError for FullUnitary or
/// when `to` has fewer layers.
std::vector<double> lift_angles(ObservableKind from, ObservableKind to, int d,
                                std::span<const double> angles);

/// Angles of the input-side phases of a FullUnitary vector. These are
/// redundant with the measurement gauge (row phases) and can be held fixed
/// without shrinking the set of reachable measurements.
std::vector<int> gauge_redundant_angles(ObservableKind kind, int d);

}  // namespace bellmap
