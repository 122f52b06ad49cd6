// Copyright 2026 The declab Authors. All Rights Reserved.
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

#include "declab/topology.hpp"

#include <cmath>
#include <utility>
#include <vector>

#include "declab/errors.hpp"
#include "declab/text_io.hpp"

namespace declab {

std::string to_string(TopologyFamily family) {
  switch (family) {
    case TopologyFamily::complete: return "complete";
    case TopologyFamily::ring: return "ring";
    case TopologyFamily::directed_exponential: return "directed_exponential";
    case TopologyFamily::custom: return "custom";
  }
  return "unknown";
}

TopologyFamily parse_topology_family(const std::string& text) {
  if (text == "complete") return TopologyFamily::complete;
  if (text == "ring") return TopologyFamily::ring;
  if (text == "directed_exponential" || text == "exponential") return TopologyFamily::directed_exponential;
  if (text == "custom") return TopologyFamily::custom;
  throw DomainError("unknown topology family '" + text + "'");
}

std::string MixingReport::failures() const {
  std::string out;
  auto add = [&](bool ok, const char* name) {
    if (ok) return;
    if (!out.empty()) out += ", ";
    out += name;
  };
  add(square, "square");
  add(nonnegative, "nonnegative");
  add(row_stochastic, "row-stochastic");
  add(column_stochastic, "column-stochastic");
  add(primitive, "primitive");
  add(contractive, "lambda<1");
  return out;
}

namespace {

double deviation_norm(const Matrix& w) {
  const std::size_t n = w.rows();
  Matrix d = w;
  const double avg = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) d(i, j) -= avg;
  return spectral_norm(d);
}

// Boolean powers of the support pattern of w, up to w^n.
bool is_primitive(const Matrix& w) {
  const std::size_t n = w.rows();
  std::vector<char> base(n * n), power(n * n), next(n * n);
  for (std::size_t i = 0; i < n * n; ++i) base[i] = power[i] = w.data()[i] > 0.0;
  for (std::size_t j = 1; j <= n; ++j) {
    bool all = true;
    for (char c : power) all = all && c;
    if (all) return true;
    if (j == n) break;
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < n; ++c) {
        char v = 0;
        for (std::size_t k = 0; k < n && !v; ++k) v = power[r * n + k] && base[k * n + c];
        next[r * n + c] = v;
      }
    }
    std::swap(power, next);
  }
  return false;
}

}  // namespace

MixingReport validate_mixing(const Matrix& w) {
  MixingReport rep;
  rep.square = w.rows() == w.cols() && w.rows() >= 1;
  if (!rep.square) return rep;
  const std::size_t n = w.rows();

  rep.nonnegative = true;
  for (double x : w.data()) rep.nonnegative = rep.nonnegative && x >= 0.0;

  rep.row_stochastic = rep.column_stochastic = true;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0, col = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      row += w(i, j);
      col += w(j, i);
    }
    rep.row_stochastic = rep.row_stochastic && std::abs(row - 1.0) <= kStochasticTolerance;
    rep.column_stochastic = rep.column_stochastic && std::abs(col - 1.0) <= kStochasticTolerance;
  }
  rep.primitive = rep.nonnegative && is_primitive(w);
  rep.mixing_rate = deviation_norm(w);
  rep.contractive = rep.mixing_rate < 1.0;
  return rep;
}

double mixing_rate(const Matrix& w) {
  const MixingReport rep = validate_mixing(w);
  if (!rep.ok()) throw InvalidMixing("invalid mixing matrix: fails " + rep.failures());
  return rep.mixing_rate;
}

MixingSpec MixingSpec::from_matrix(Matrix w, TopologyFamily family) {
  const double lambda = declab::mixing_rate(w);
  return MixingSpec(std::move(w), lambda, family);
}

Matrix MixingSpec::mix_row(std::size_t i, std::span<const Matrix> blocks) const {
  if (blocks.size() != nodes()) {
    throw DimensionMismatch("mixing " + std::to_string(blocks.size()) + " blocks over " +
                            std::to_string(nodes()) + " nodes");
  }
  Matrix acc(blocks.front().rows(), blocks.front().cols());
  for (std::size_t j = 0; j < nodes(); ++j) {
    const double wij = weights_(i, j);
    if (wij != 0.0) acc.add_scaled(wij, blocks[j]);
  }
  return acc;
}

MixingSpec build_complete(std::size_t n) {
  if (n < 1) throw DomainError("complete graph needs n >= 1");
  return MixingSpec::from_matrix(Matrix::constant(n, n, 1.0 / static_cast<double>(n)),
                                 TopologyFamily::complete);
}

MixingSpec build_ring(std::size_t n) {
  if (n < 3) throw DomainError("ring needs n >= 3, got " + std::to_string(n));
  Matrix w(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    w(i, i) = 1.0 / 3.0;
    w(i, (i + 1) % n) = 1.0 / 3.0;
    w(i, (i + n - 1) % n) = 1.0 / 3.0;
  }
  return MixingSpec::from_matrix(std::move(w), TopologyFamily::ring);
}

MixingSpec build_directed_exponential(std::size_t n) {
  if (n < 2 || (n & (n - 1)) != 0) {
    throw DomainError("directed exponential graph needs n = 2^t with t >= 1, got " + std::to_string(n));
  }
  std::vector<std::size_t> offsets{0};
  for (std::size_t hop = 1; hop < n; hop <<= 1) offsets.push_back(hop);
  const double weight = 1.0 / static_cast<double>(offsets.size());
  Matrix w(n, n);
  // Receiver r = i + offset averages what sender i transmits.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t off : offsets) w((i + off) % n, i) = weight;
  return MixingSpec::from_matrix(std::move(w), TopologyFamily::directed_exponential);
}

MixingSpec build_topology(TopologyFamily family, std::size_t n) {
  switch (family) {
    case TopologyFamily::complete: return build_complete(n);
    case TopologyFamily::ring: return build_ring(n);
    case TopologyFamily::directed_exponential: return build_directed_exponential(n);
    case TopologyFamily::custom: break;
  }
  throw DomainError("custom topology must be loaded from a weights file");
}

MixingSpec parse_mixing_csv(const std::string& text) {
  const auto lines = content_lines(text);
  if (lines.empty()) throw ParseError("mixing file is empty");
  const std::size_t n = lines.size();
  std::vector<double> entries;
  entries.reserve(n * n);
  for (const auto& line : lines) {
    const auto row = parse_csv_row(line.text, line.number);
    if (row.size() != n) {
      throw ParseError("line " + std::to_string(line.number) + ": expected " + std::to_string(n) +
                           " weights, got " + std::to_string(row.size()),
                       line.number);
    }
    entries.insert(entries.end(), row.begin(), row.end());
  }
  return MixingSpec::from_matrix(Matrix(n, n, std::move(entries)), TopologyFamily::custom);
}

MixingSpec load_mixing_csv(const std::filesystem::path& path) { return parse_mixing_csv(read_file(path)); }

}  // namespace declab
