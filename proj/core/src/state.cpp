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

#include "bellmap/state.hpp"

#include <cmath>
#include <string>

#include "bellmap/errors.hpp"

namespace bellmap {

namespace {

void check_dimension(int d) {
  if (d < 2) {
    throw InvalidDimension("local dimension must be >= 2, got " +
                           std::to_string(d));
  }
}

}  // namespace

QuditState QuditState::pure(int d, CVector amplitudes) {
  check_dimension(d);
  if (amplitudes.size() != d * d) {
    throw InvalidState("pure state needs " + std::to_string(d * d) +
                       " amplitudes, got " +
                       std::to_string(amplitudes.size()));
  }
  if (!amplitudes.allFinite()) {
    throw InvalidState("pure state has non-finite amplitudes");
  }
  const double norm2 = amplitudes.squaredNorm();
  if (std::abs(norm2 - 1.0) > kPureNormTolerance) {
    throw InvalidState("pure state is not normalized: |psi|^2 = " +
                       std::to_string(norm2));
  }
  return QuditState(d, std::move(amplitudes), std::nullopt);
}

QuditState QuditState::normalized(int d, CVector amplitudes) {
  const double norm = amplitudes.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw InvalidState("cannot normalize a zero or non-finite vector");
  }
  amplitudes /= norm;
  return pure(d, std::move(amplitudes));
}

QuditState QuditState::mixed(int d, CMatrix rho, double tolerance) {
  check_dimension(d);
  const int n = d * d;
  if (rho.rows() != n || rho.cols() != n) {
    throw InvalidState("density matrix must be " + std::to_string(n) + "x" +
                       std::to_string(n));
  }
  if (!rho.allFinite()) {
    throw InvalidState("density matrix has non-finite entries");
  }
  const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  if (herm > tolerance) {
    throw InvalidState("density matrix is not Hermitian (defect " +
                       std::to_string(herm) + ")");
  }
  const double tr = rho.trace().real();
  if (std::abs(tr - 1.0) > tolerance ||
      std::abs(rho.trace().imag()) > tolerance) {
    throw InvalidState("density matrix trace is " + std::to_string(tr));
  }
  // Symmetrize so downstream code sees an exactly Hermitian matrix.
  CMatrix sym = 0.5 * (rho + rho.adjoint());
  const double lambda_min = min_eigenvalue(sym);
  if (lambda_min < kEigenvalueFloor) {
    throw InvalidState("density matrix is not positive semidefinite "
                       "(eigenvalue " +
                       std::to_string(lambda_min) + ")");
  }
  return QuditState(d, std::nullopt, std::move(sym));
}

const CVector& QuditState::amplitudes() const {
  if (!amplitudes_) {
    throw InvalidState("mixed state has no amplitude vector");
  }
  return *amplitudes_;
}

CMatrix QuditState::density_matrix() const {
  if (amplitudes_) {
    return (*amplitudes_) * amplitudes_->adjoint();
  }
  return *rho_;
}

CMatrix reduced_state(const QuditState& state, Party party) {
  const int d = state.dimension();
  CMatrix out = CMatrix::Zero(d, d);
  if (state.is_pure()) {
    // Psi[a][b] = psi[a*d + b]; rho_A = Psi Psi^+, rho_B = Psi^T conj(Psi).
    const CVector& psi = state.amplitudes();
    CMatrix m(d, d);
    for (int a = 0; a < d; ++a) {
      for (int b = 0; b < d; ++b) m(a, b) = psi(a * d + b);
    }
    if (party == Party::A) {
      out = m * m.adjoint();
    } else {
      out = m.transpose() * m.conjugate();
    }
    return out;
  }
  const CMatrix rho = state.density_matrix();
  for (int x = 0; x < d; ++x) {
    for (int y = 0; y < d; ++y) {
      Complex acc = 0.0;
      for (int t = 0; t < d; ++t) {
        acc += party == Party::A ? rho(x * d + t, y * d + t)
                                 : rho(t * d + x, t * d + y);
      }
      out(x, y) = acc;
    }
  }
  return out;
}

CMatrix partial_transpose(const CMatrix& rho, int d) {
  CMatrix out(rho.rows(), rho.cols());
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b < d; ++b) {
      for (int a2 = 0; a2 < d; ++a2) {
        for (int b2 = 0; b2 < d; ++b2) {
          out(a * d + b, a2 * d + b2) = rho(a * d + b2, a2 * d + b);
        }
      }
    }
  }
  return out;
}

double min_eigenvalue(const CMatrix& hermitian) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian,
                                                Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

}  // namespace bellmap
