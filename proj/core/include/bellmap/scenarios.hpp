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

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bellmap/noise.hpp"
#include "bellmap/optimizer.hpp"
#include "bellmap/state.hpp"

namespace bellmap {

/// cos(alpha)|00> + sin(alpha)(cos(beta)|11> + sin(beta)|22>), angles in
/// degrees.
QuditState schmidt_family_state(double alpha_deg, double beta_deg);

/// sum_j c_j |jj> in d x d, normalized. Needs 1 <= size(c) <= d.
QuditState schmidt_state(std::span<const double> coefficients, int d);

/// Equal weights on |00>, ..., |k-1 k-1> inside d x d.
QuditState symmetric_rank_k_state(int d, int k);

struct AsymmetricSearchOptions {
  /// Restarts of the settings search at each coefficient vector.
  int inner_restarts = 4;
  /// Restarts of the coefficient search (the first starts symmetric).
  int outer_restarts = 2;
  std::uint64_t seed = 7;
};

struct AsymmetricCoefficients {
  /// Unit-norm Schmidt coefficients, in the order the settings use them.
  std::vector<double> coefficients;
  /// Best CGLMP value and its implied white-noise visibility.
  double value = 0.0;
  double implied_visibility = 1.0;
};

/// Rank-k coefficients maximizing the CGLMP value over linear-phase
/// (M1) settings.
AsymmetricCoefficients asymmetric_coefficients(
    int k, const AsymmetricSearchOptions& opts = {});

/// The rank-k optimum of asymmetric_coefficients embedded in d x d.
QuditState asymmetric_rank_k_state(int d, int k,
                                   const AsymmetricSearchOptions& opts = {});

/// rho = (1 - sum_i |psi_i><psi_i|) / 4 for the five-tile unextendible
/// product basis of two qutrits.
QuditState bennett_tiles_state();

/// The 3 x 3 bound entangled family with parameter 0 < a < 1.
QuditState horodecki_3x3_state(double a);

/// Smallest eigenvalue of the partial transpose is >= -tolerance.
bool is_ppt(const QuditState& state, double tolerance = 1e-10);

/// Staged search for a state with the given Schmidt coefficients in d x d:
/// M1 at dimension k seeded with linear-phase settings, then U(k), then
/// `kind` at dimension d. Stages that do not apply are skipped (for instance
/// custom noise only allows the last one).
std::vector<SearchStage> schmidt_ladder(std::span<const double> coefficients,
                                        int d, ObservableKind kind,
                                        const NoiseModel& noise = NoiseModel::white(),
                                        int settings = 2);

struct NamedState {
  std::string name;
  int d = 0;
  int rank = 0;
  std::string description;
  /// Defining numbers (Schmidt coefficients, angles or the family parameter).
  std::vector<double> parameters;
  QuditState state;
};

struct CatalogEntry {
  std::string name;
  int d = 0;
  int rank = 0;
  std::string description;
};

/// Built-in names. Parameterized forms are also accepted by named_state:
/// "sym-d<d>", "asym-d<d>", "sym-rank<k>-d<d>", "asym-rank<k>-d<d>",
/// "product-d<d>", "family-<alpha>-<beta>", "horodecki-<a>".
std::vector<CatalogEntry> catalog();

/// Throws ScenarioError for unknown names or out-of-range parameters.
NamedState named_state(const std::string& name,
                       const AsymmetricSearchOptions& opts = {});

/// "name, d, rank, description" per line.
std::string format_catalog(const std::vector<CatalogEntry>& entries);

}  // namespace bellmap
