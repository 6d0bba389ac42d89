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

#include "bellmap/io.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "bellmap/errors.hpp"

namespace bellmap {

namespace {

struct Token {
  std::string_view text;
  int column = 0;
};

// Splits the non-comment part of a line into whitespace-separated tokens.
std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> out;
  const std::size_t hash = line.find('#');
  if (hash != std::string_view::npos) line = line.substr(0, hash);
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i >= line.size()) break;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    out.push_back({line.substr(start, i - start), static_cast<int>(start) + 1});
  }
  return out;
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  // Next line with at least one token; false at end of input.
  bool next(std::vector<Token>& tokens) {
    while (std::getline(in_, buffer_)) {
      ++line_;
      if (!buffer_.empty() && buffer_.back() == '\r') buffer_.pop_back();
      tokens = tokenize(buffer_);
      if (!tokens.empty()) return true;
    }
    return false;
  }

  int line() const noexcept { return line_; }

 private:
  std::istream& in_;
  std::string buffer_;
  int line_ = 0;
};

double parse_real(std::string_view text, int line, int column) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ParseError("expected a number, got '" + std::string(text) + "'", line, column);
  }
  return v;
}

long parse_int(std::string_view text, int line, int column) {
  long v = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ParseError("expected an integer, got '" + std::string(text) + "'", line, column);
  }
  return v;
}

void expect_keyword(const Token& t, std::string_view keyword, int line) {
  if (t.text != keyword) {
    throw ParseError("expected '" + std::string(keyword) + "', got '" +
                         std::string(t.text) + "'",
                     line, t.column);
  }
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string(), 0, 0);
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

}  // namespace

ProbabilityTable read_probability_table(std::istream& in) {
  LineReader reader(in);
  std::vector<Token> t;
  if (!reader.next(t)) throw ParseError("empty probability table", reader.line() + 1, 1);
  if (t.size() != 4) {
    throw ParseError("header must read 'm <m> d <d>'", reader.line(), t.front().column);
  }
  expect_keyword(t[0], "m", reader.line());
  expect_keyword(t[2], "d", reader.line());
  const long m = parse_int(t[1].text, reader.line(), t[1].column);
  const long d = parse_int(t[3].text, reader.line(), t[3].column);
  if (m < 1 || m > 16) throw ParseError("m out of range", reader.line(), t[1].column);
  if (d < 2 || d > 16) throw ParseError("d out of range", reader.line(), t[3].column);

  const std::size_t size = static_cast<std::size_t>(m * m * d * d);
  std::vector<double> entries(size, 0.0);
  std::vector<int> seen(size, 0);
  while (reader.next(t)) {
    const int line = reader.line();
    if (t.size() != 5) {
      throw ParseError("expected 'i k a b p', got " + std::to_string(t.size()) + " fields",
                       line, t.front().column);
    }
    long idx[4];
    const long limits[4] = {m, m, d, d};
    for (int j = 0; j < 4; ++j) {
      idx[j] = parse_int(t[j].text, line, t[j].column);
      if (idx[j] < 0 || idx[j] >= limits[j]) {
        throw ParseError("index out of range", line, t[j].column);
      }
    }
    const std::size_t pos =
        static_cast<std::size_t>(((idx[0] * m + idx[1]) * d + idx[2]) * d + idx[3]);
    if (seen[pos]) {
      throw ParseError("duplicate entry (also on line " + std::to_string(seen[pos]) + ")",
                       line, t[0].column);
    }
    seen[pos] = line;
    entries[pos] = parse_real(t[4].text, line, t[4].column);
  }
  for (std::size_t pos = 0; pos < size; ++pos) {
    if (!seen[pos]) {
      const std::size_t b = pos % d, a = pos / d % d, k = pos / (d * d) % m,
                        i = pos / (d * d * m);
      throw ParseError("missing entry i=" + std::to_string(i) + " k=" + std::to_string(k) +
                           " a=" + std::to_string(a) + " b=" + std::to_string(b),
                       reader.line() + 1, 1);
    }
  }
  try {
    return ProbabilityTable(static_cast<int>(m), static_cast<int>(d), std::move(entries));
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(e.what(), reader.line(), 1);
  }
}

ProbabilityTable read_probability_table(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  return read_probability_table(in);
}

void write_probability_table(std::ostream& out, const ProbabilityTable& table) {
  const int m = table.settings();
  const int d = table.outcomes();
  out << "m " << m << " d " << d << '\n';
  out << std::setprecision(17);
  for (int i = 0; i < m; ++i) {
    for (int k = 0; k < m; ++k) {
      for (int a = 0; a < d; ++a) {
        for (int b = 0; b < d; ++b) {
          out << i << ' ' << k << ' ' << a << ' ' << b << ' ' << table(i, k, a, b) << '\n';
        }
      }
    }
  }
}

void write_probability_table(const std::filesystem::path& path,
                             const ProbabilityTable& table) {
  std::ofstream out = open_output(path);
  write_probability_table(out, table);
}

QuditState read_density_matrix(std::istream& in) {
  LineReader reader(in);
  std::vector<Token> t;
  if (!reader.next(t)) throw ParseError("empty density matrix file", reader.line() + 1, 1);
  if (t.size() != 2) throw ParseError("header must read 'd <d>'", reader.line(), t.front().column);
  expect_keyword(t[0], "d", reader.line());
  const long d = parse_int(t[1].text, reader.line(), t[1].column);
  if (d < 2 || d > 16) throw ParseError("d out of range", reader.line(), t[1].column);
  const Eigen::Index n = static_cast<Eigen::Index>(d * d);
  CMatrix rho(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    if (!reader.next(t)) {
      throw ParseError("expected " + std::to_string(n) + " rows, got " + std::to_string(r),
                       reader.line() + 1, 1);
    }
    const int line = reader.line();
    if (static_cast<Eigen::Index>(t.size()) != n) {
      throw ParseError("expected " + std::to_string(n) + " entries, got " +
                           std::to_string(t.size()),
                       line, t.front().column);
    }
    for (Eigen::Index c = 0; c < n; ++c) {
      const Token& tok = t[static_cast<std::size_t>(c)];
      const std::size_t comma = tok.text.find(',');
      if (comma == std::string_view::npos) {
        throw ParseError("expected 're,im', got '" + std::string(tok.text) + "'", line,
                         tok.column);
      }
      const double re = parse_real(tok.text.substr(0, comma), line, tok.column);
      const double im = parse_real(tok.text.substr(comma + 1), line,
                                   tok.column + static_cast<int>(comma) + 1);
      rho(r, c) = Complex(re, im);
    }
  }
  if (reader.next(t)) throw ParseError("trailing data after the matrix", reader.line(), t.front().column);
  try {
    return QuditState::mixed(static_cast<int>(d), std::move(rho), 1e-8);
  } catch (const Error& e) {
    throw ParseError(e.what(), reader.line(), 1);
  }
}

QuditState read_density_matrix(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  return read_density_matrix(in);
}

void write_density_matrix(std::ostream& out, const QuditState& state) {
  const CMatrix rho = state.density_matrix();
  out << "d " << state.dimension() << '\n' << std::setprecision(17);
  for (Eigen::Index r = 0; r < rho.rows(); ++r) {
    for (Eigen::Index c = 0; c < rho.cols(); ++c) {
      out << (c ? " " : "") << rho(r, c).real() << ',' << rho(r, c).imag();
    }
    out << '\n';
  }
}

void write_density_matrix(const std::filesystem::path& path, const QuditState& state) {
  std::ofstream out = open_output(path);
  write_density_matrix(out, state);
}

}  // namespace bellmap
