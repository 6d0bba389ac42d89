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

#include "bellmap/observable.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "bellmap/errors.hpp"

namespace bellmap {

namespace {

int layer_count(ObservableKind kind) {
  switch (kind) {
    case ObservableKind::M1:
      return 1;
    case ObservableKind::M2:
      return 2;
    case ObservableKind::M3:
      return 3;
    case ObservableKind::FullUnitary:
      return 0;
  }
  return 0;
}

// Left-multiplies rows p, q of `u` by the Givens block
// [[c, -e^{-i phi} s], [e^{i phi} s, c]].
void apply_givens_left(CMatrix& u, int p, int q, double theta, double phi) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const Complex e = std::polar(1.0, phi);
  for (Eigen::Index col = 0; col < u.cols(); ++col) {
    const Complex x = u(p, col);
    const Complex y = u(q, col);
    u(p, col) = c * x - std::conj(e) * s * y;
    u(q, col) = e * s * x + c * y;
  }
}

}  // namespace

std::string_view to_string(ObservableKind kind) {
  switch (kind) {
    case ObservableKind::M1:
      return "m1";
    case ObservableKind::M2:
      return "m2";
    case ObservableKind::M3:
      return "m3";
    case ObservableKind::FullUnitary:
      return "u";
  }
  return "?";
}

ObservableKind parse_observable_kind(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return std::tolower(ch); });
  if (lower == "m1") return ObservableKind::M1;
  if (lower == "m2") return ObservableKind::M2;
  if (lower == "m3") return ObservableKind::M3;
  if (lower == "u" || lower == "full" || lower == "fullunitary" ||
      (lower.size() >= 2 && lower[0] == 'u' &&
       std::all_of(lower.begin() + 1, lower.end(),
                   [](unsigned char ch) { return std::isdigit(ch); }))) {
    return ObservableKind::FullUnitary;
  }
  throw ParametrizationError("unknown observable kind '" + std::string(text) +
                             "' (expected m1, m2, m3 or u)");
}

int angle_count(ObservableKind kind, int d) {
  if (kind == ObservableKind::FullUnitary) return d * d;
  return layer_count(kind) * (d - 1);
}

void ObservableSpec::validate() const {
  if (d < 2) {
    throw InvalidDimension("observable dimension must be >= 2");
  }
  const int expected = angle_count(kind, d);
  if (static_cast<int>(angles.size()) != expected) {
    throw ParametrizationError(
        std::string(to_string(kind)) + " at d=" + std::to_string(d) +
        " takes " + std::to_string(expected) + " angles, got " +
        std::to_string(angles.size()));
  }
}

CMatrix fourier_matrix(int d) {
  if (d < 2) {
    throw InvalidDimension("Fourier matrix needs d >= 2, got " +
                           std::to_string(d));
  }
  CMatrix f(d, d);
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  for (int k = 0; k < d; ++k) {
    for (int l = 0; l < d; ++l) {
      // Reduce k*l mod d first so large products keep full accuracy.
      const double angle = 2.0 * kPi * static_cast<double>((k * l) % d) / d;
      f(k, l) = std::polar(scale, angle);
    }
  }
  return f;
}

CMatrix phase_layer(std::span<const double> phases) {
  const int d = static_cast<int>(phases.size()) + 1;
  CMatrix out = CMatrix::Identity(d, d);
  for (int j = 1; j < d; ++j) out(j, j) = std::polar(1.0, phases[j - 1]);
  return out;
}

std::vector<std::pair<int, int>> givens_order(int d) {
  std::vector<std::pair<int, int>> order;
  order.reserve(static_cast<std::size_t>(d * (d - 1) / 2));
  for (int col = 0; col + 1 < d; ++col) {
    for (int row = d - 1; row > col; --row) order.emplace_back(row - 1, row);
  }
  return order;
}

CMatrix compile_observable(ObservableKind kind, int d,
                           std::span<const double> angles) {
  if (d < 2) throw InvalidDimension("observable dimension must be >= 2");
  const int expected = angle_count(kind, d);
  if (static_cast<int>(angles.size()) != expected) {
    throw ParametrizationError(
        std::string(to_string(kind)) + " at d=" + std::to_string(d) +
        " takes " + std::to_string(expected) + " angles, got " +
        std::to_string(angles.size()));
  }

  if (kind == ObservableKind::FullUnitary) {
    const auto order = givens_order(d);
    const std::size_t rot = order.size();
    // Build G_1 ... G_K D by applying the factors right to left.
    CMatrix u = CMatrix::Zero(d, d);
    for (int j = 0; j < d; ++j) u(j, j) = std::polar(1.0, angles[2 * rot + j]);
    for (std::size_t r = rot; r-- > 0;) {
      apply_givens_left(u, order[r].first, order[r].second, angles[2 * r],
                        angles[2 * r + 1]);
    }
    return u;
  }

  const CMatrix f = fourier_matrix(d);
  const int layers = layer_count(kind);
  CMatrix u = CMatrix::Identity(d, d);
  for (int l = 0; l < layers; ++l) {
    const auto phases = angles.subspan(static_cast<std::size_t>(l) * (d - 1),
                                       static_cast<std::size_t>(d - 1));
    CMatrix layer = f;
    for (int j = 1; j < d; ++j) layer.col(j) *= std::polar(1.0, phases[j - 1]);
    u = layer * u;
  }
  return u;
}

std::vector<double> chirp_phases(int d) {
  if (d < 2) throw InvalidDimension("chirp needs d >= 2");
  std::vector<double> out(static_cast<std::size_t>(d - 1));
  for (int k = 1; k < d; ++k) {
    const double kk = k;
    out[k - 1] = (d % 2 == 1) ? 2.0 * kPi * kk * (kk - 1.0) / (2.0 * d)
                              : kPi * kk * kk / d;
  }
  return out;
}

std::vector<double> lift_angles(ObservableKind from, ObservableKind to, int d,
                                std::span<const double> angles) {
  const int lf = layer_count(from);
  const int lt = layer_count(to);
  if (lf == 0 || lt == 0 || lt < lf) {
    throw ParametrizationError(std::string("cannot lift ") +
                               std::string(to_string(from)) + " angles to " +
                               std::string(to_string(to)));
  }
  if (static_cast<int>(angles.size()) != angle_count(from, d)) {
    throw ParametrizationError("lift_angles: wrong angle count");
  }
  const auto chirp = chirp_phases(d);
  // F Y F D_R^-1 = D P F. Row 0 of F Y F gives D_R up to a Fourier row,
  // which only shifts P.
  const CMatrix f = fourier_matrix(d);
  const CMatrix g = f * phase_layer(chirp) * f;
  std::vector<double> right(static_cast<std::size_t>(d - 1));
  for (int j = 1; j < d; ++j) right[j - 1] = std::arg(g(0, j) / g(0, 0));

  std::vector<double> out(angles.begin(), angles.end());
  for (int l = lf; l < lt; ++l) {
    for (int j = 0; j < d - 1; ++j) {
      out[static_cast<std::size_t>((l - 1) * (d - 1) + j)] -= right[j];
    }
    out.insert(out.end(), chirp.begin(), chirp.end());
  }
  return out;
}

std::vector<double> decompose_unitary(const CMatrix& u) {
  const int d = static_cast<int>(u.rows());
  if (u.rows() != u.cols() || d < 2) {
    throw ParametrizationError("decompose_unitary needs a square matrix");
  }
  if (unitarity_defect(u) > 1e-8) {
    throw ParametrizationError("decompose_unitary: matrix is not unitary");
  }
  const auto order = givens_order(d);
  std::vector<double> angles(static_cast<std::size_t>(d * d), 0.0);
  CMatrix w = u;
  std::size_t r = 0;
  for (int col = 0; col + 1 < d; ++col) {
    for (int row = d - 1; row > col; --row, ++r) {
      const int p = row - 1;
      const int q = row;
      const Complex x = w(p, col);
      const Complex y = w(q, col);
      const double theta = std::atan2(std::abs(y), std::abs(x));
      double phi = 0.0;
      if (std::abs(y) > 0.0) {
        phi = std::abs(x) > 0.0 ? std::arg(y) - std::arg(x) : std::arg(y);
      }
      // Apply G^dagger = G(-theta, phi) on the left, which zeroes w(q, col).
      apply_givens_left(w, p, q, -theta, phi);
      angles[2 * r] = theta;
      angles[2 * r + 1] = phi;
    }
  }
  for (int j = 0; j < d; ++j) {
    angles[2 * order.size() + j] = std::arg(w(j, j));
  }
  return angles;
}

std::vector<double> gauge_fixed_angles(const CMatrix& u) {
  std::vector<double> angles = decompose_unitary(u);
  const int d = static_cast<int>(u.rows());
  const auto order = givens_order(d);
  const std::size_t rot = order.size();
  // G(theta, phi) D(a, b) = D(a, b) G(theta, phi + a - b): sweep the input
  // phases out to the left, where they only rephase outcomes.
  for (std::size_t r = rot; r-- > 0;) {
    const auto [p, q] = order[r];
    angles[2 * r + 1] += angles[2 * rot + p] - angles[2 * rot + q];
  }
  for (int j = 0; j < d; ++j) angles[2 * rot + j] = 0.0;
  return angles;
}

std::vector<int> gauge_redundant_angles(ObservableKind kind, int d) {
  std::vector<int> out;
  if (kind != ObservableKind::FullUnitary) return out;
  const int first = d * (d - 1);
  for (int j = 0; j < d; ++j) out.push_back(first + j);
  return out;
}

}  // namespace bellmap
