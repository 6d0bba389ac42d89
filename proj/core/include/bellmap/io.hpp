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

#include <filesystem>
#include <iosfwd>

#include "bellmap/probability.hpp"
#include "bellmap/state.hpp"

namespace bellmap {

/// Probability-table text: a header "m <m> d <d>" followed by one
/// "i k a b p" line per entry, whitespace separated, '#' starts a comment.
/// Every entry must appear exactly once. Throws ParseError.
ProbabilityTable read_probability_table(std::istream& in);
ProbabilityTable read_probability_table(const std::filesystem::path& path);

void write_probability_table(std::ostream& out, const ProbabilityTable& table);
void write_probability_table(const std::filesystem::path& path,
                             const ProbabilityTable& table);

/// Density-matrix text: "d <d>" then d^2 rows of d^2 "re,im" tokens ('#'
/// comments allowed). The matrix is checked as a state with tolerance 1e-8.
QuditState read_density_matrix(std::istream& in);
QuditState read_density_matrix(const std::filesystem::path& path);

void write_density_matrix(std::ostream& out, const QuditState& state);
void write_density_matrix(const std::filesystem::path& path,
                          const QuditState& state);

}  // namespace bellmap
