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

#include "bellmap/noise.hpp"

#include <string>

#include "bellmap/errors.hpp"

namespace bellmap {

NoiseModel NoiseModel::custom(const QuditState& rho) {
  if (rho.is_pure()) {
    // Route through the mixed constructor so the full set of checks runs.
    try {
      return NoiseModel(Kind::Custom,
                        std::make_shared<const QuditState>(QuditState::mixed(
                            rho.dimension(), rho.density_matrix(), 1e-10)));
    } catch (const InvalidState& e) {
      throw InvalidNoise(std::string("custom noise: ") + e.what());
    }
  }
  return NoiseModel(Kind::Custom, std::make_shared<const QuditState>(rho));
}

const QuditState& NoiseModel::custom_state() const {
  if (!custom_) throw InvalidNoise("noise model carries no custom state");
  return *custom_;
}

std::string_view to_string(NoiseModel::Kind kind) {
  switch (kind) {
    case NoiseModel::Kind::White:
      return "white";
    case NoiseModel::Kind::Product:
      return "product";
    case NoiseModel::Kind::Dephasing:
      return "dephasing";
    case NoiseModel::Kind::Custom:
      return "custom";
  }
  return "?";
}

QuditState noise_state(const NoiseModel& model, const QuditState& signal) {
  const int d = signal.dimension();
  const int n = d * d;
  switch (model.kind()) {
    case NoiseModel::Kind::White:
      return QuditState::mixed(d, CMatrix::Identity(n, n) / static_cast<double>(n));
    case NoiseModel::Kind::Product: {
      const CMatrix rho_a = reduced_state(signal, Party::A);
      const CMatrix rho_b = reduced_state(signal, Party::B);
      CMatrix out(n, n);
      for (int a = 0; a < d; ++a) {
        for (int a2 = 0; a2 < d; ++a2) {
          out.block(a * d, a2 * d, d, d) = rho_a(a, a2) * rho_b;
        }
      }
      return QuditState::mixed(d, std::move(out), 1e-10);
    }
    case NoiseModel::Kind::Dephasing: {
      CMatrix out = CMatrix::Zero(n, n);
      if (signal.is_pure()) {
        const CVector& psi = signal.amplitudes();
        for (int j = 0; j < n; ++j) out(j, j) = std::norm(psi(j));
      } else {
        const CMatrix rho = signal.density_matrix();
        for (int j = 0; j < n; ++j) out(j, j) = rho(j, j).real();
      }
      return QuditState::mixed(d, std::move(out), 1e-10);
    }
    case NoiseModel::Kind::Custom: {
      const QuditState& rho = model.custom_state();
      if (rho.dimension() != d) {
        throw InvalidNoise("custom noise has d=" +
                           std::to_string(rho.dimension()) +
                           " but the signal has d=" + std::to_string(d));
      }
      return rho;
    }
  }
  throw InvalidNoise("unknown noise model");
}

}  // namespace bellmap
