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

// Finite-sum matrix objectives f(X) = (1/N) sum_i f_i(X) with exact oracles.
//
//   quadratic        f_i(X) = 0.5 ||A_i X - B_i||_F^2,   A_i: p x m, B_i: p x n
//   nonconvex_gram   f_i(X) = 0.25 ||X X^T - C_i||_F^2,  C_i: m x m symmetric
//
// Every problem carries a certified spectral-norm ball ||X|| <= radius on
// which its Lipschitz constant L_* (nuclear-norm gradient change per unit
// spectral-norm move) holds. Quadratics are certified globally (radius = inf).

#ifndef DECLAB_PROBLEMS_HPP_
#define DECLAB_PROBLEMS_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "declab/linalg.hpp"

namespace declab {

enum class ProblemKind { quadratic, nonconvex_gram };

std::string to_string(ProblemKind kind);
ProblemKind parse_problem_kind(const std::string& text);

class Problem {
 public:
  // Validates shapes; computes f_low (exact minimum of f) and L_* = max_i
  // ||A_i^T A_i||_*. Throws DimensionMismatch naming the offending node.
  static Problem quadratic(std::vector<Matrix> a, std::vector<Matrix> b);
  // `cols` is n (X is m x n). f_low = 0; L_* is certified on ||X|| <= radius.
  static Problem gram(std::vector<Matrix> c, std::size_t cols, double radius);

  ProblemKind kind() const noexcept { return kind_; }
  std::size_t nodes() const noexcept { return nodes_; }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  // p, the data height of quadratic instances (0 for gram).
  std::size_t data_rows() const noexcept { return data_rows_; }

  const std::vector<Matrix>& a() const noexcept { return a_; }
  const std::vector<Matrix>& b() const noexcept { return b_; }
  const std::vector<Matrix>& c() const noexcept { return c_; }

  double value(std::size_t node, const Matrix& x) const;
  Matrix gradient(std::size_t node, const Matrix& x) const;
  // f(X) = (1/N) sum_i f_i(X)
  double objective(const Matrix& x) const;
  // (1/N) sum_i grad f_i(X_i); throws DimensionMismatch unless xs.size() == N.
  Matrix average_gradient(std::span<const Matrix> xs) const;
  // Stack of grad f_i(X_i).
  std::vector<Matrix> local_gradients(std::span<const Matrix> xs) const;

  std::optional<double> lipschitz_star() const noexcept { return lipschitz_star_; }
  // L_F = N * L_*
  std::optional<double> lipschitz_stacked() const;
  std::optional<double> f_low() const noexcept { return f_low_; }
  double certified_radius() const noexcept { return certified_radius_; }
  // Minimizer of f when known in closed form (quadratics).
  const std::optional<Matrix>& minimizer() const noexcept { return minimizer_; }

  // Where runs start unless overridden: zero for quadratics (any point is
  // fine), a small fixed matrix for gram (X = 0 is stationary there).
  Matrix default_start() const;

  // Provenance label, e.g. "synthetic" or the file path.
  const std::string& origin() const noexcept { return origin_; }
  void set_origin(std::string origin) { origin_ = std::move(origin); }

  void check_node(std::size_t node) const;
  void check_point(const Matrix& x) const;

 private:
  Problem() = default;

  ProblemKind kind_ = ProblemKind::quadratic;
  std::size_t nodes_ = 0, rows_ = 0, cols_ = 0, data_rows_ = 0;
  std::vector<Matrix> a_, b_, c_;
  std::optional<double> lipschitz_star_;
  std::optional<double> f_low_;
  double certified_radius_ = 0.0;
  std::optional<Matrix> minimizer_;
  std::string origin_ = "synthetic";
};

struct QuadraticSpec {
  std::size_t nodes = 4;
  std::size_t rows = 6;   // m
  std::size_t cols = 4;   // n
  std::size_t data_rows = 8;  // p
  double heterogeneity = 0.0;
  double condition = 4.0;  // condition number of each A_i^T A_i
  double target_norm = 1.0;  // spectral norm of the planted X_*
  std::uint64_t seed = 1;
};

// B_i = A_i X_* + heterogeneity * D_i with sum_i D_i = 0, so X_* minimizes f
// when heterogeneity = 0. Deterministic in `seed`.
Problem make_quadratic(const QuadraticSpec& spec);

struct GramSpec {
  std::size_t nodes = 4;
  std::size_t rows = 6;
  std::size_t cols = 2;
  double heterogeneity = 0.0;
  double radius = 3.0;
  std::uint64_t seed = 1;
};

// C_i = Z Z^T + heterogeneity * S_i with symmetric S_i summing to zero.
Problem make_gram(const GramSpec& spec);

// Text format (see docs/problem_format.md):
//   quadratic N m n p            or   nonconvex_gram N m n [radius]
//   then per node, in index order, CSV rows: A_i (p rows), B_i (p rows)
//   or C_i (m rows). Blank lines and '#' comments are ignored.
Problem load_problem(const std::filesystem::path& path);
Problem parse_problem(const std::string& text);
void write_problem(std::ostream& out, const Problem& problem);

}  // namespace declab

#endif  // DECLAB_PROBLEMS_HPP_
