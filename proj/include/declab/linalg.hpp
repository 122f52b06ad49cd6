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

#ifndef DECLAB_LINALG_HPP_
#define DECLAB_LINALG_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace declab {

// Dense real matrix, row-major. Entries are finite on construction from data.
// Zero extents are allowed so that rank-0 SVD factors can be represented;
// optimization variables are always at least 1x1.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols);
  // Throws DimensionMismatch if entries.size() != rows*cols and DomainError on
  // a non-finite entry.
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> values);
  static Matrix constant(std::size_t rows, std::size_t cols, double value);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  Matrix transpose() const;
  bool is_finite() const noexcept;
  bool is_zero() const noexcept;
  bool same_shape(const Matrix& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  Matrix& operator+=(const Matrix& rhs);
  Matrix& operator-=(const Matrix& rhs);
  Matrix& operator*=(double s) noexcept;

  // this += s * x
  Matrix& add_scaled(double s, const Matrix& x);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix lhs, const Matrix& rhs);
Matrix operator-(Matrix lhs, const Matrix& rhs);
Matrix operator*(Matrix m, double s);
Matrix operator*(double s, Matrix m);
// Matrix product; throws DimensionMismatch.
Matrix operator*(const Matrix& a, const Matrix& b);

std::string shape_string(const Matrix& m);

// Frobenius inner product <a, b> = tr(a^T b).
double inner(const Matrix& a, const Matrix& b);

double frobenius_norm(const Matrix& a);
double spectral_norm(const Matrix& a);
double nuclear_norm(const Matrix& a);
double max_abs_diff(const Matrix& a, const Matrix& b);

// Vertical stack [Y_1; ...; Y_N] of same-shape blocks.
Matrix vstack(std::span<const Matrix> blocks);
// (1/N) sum of same-shape blocks; exact when all blocks are equal.
Matrix mean(std::span<const Matrix> blocks);

inline constexpr double kDefaultRankTolerance = 1e-12;

struct SvdFactors {
  Matrix u;                             // m x r, orthonormal columns
  std::vector<double> singular_values;  // r values, positive, nonincreasing
  Matrix v;                             // n x r, orthonormal columns
  double rank_tolerance = kDefaultRankTolerance;

  std::size_t rank() const noexcept { return singular_values.size(); }
  Matrix reconstruct() const;
};

// Reduced SVD by one-sided Jacobi rotations. Singular values at or below
// rank_tol * s_max are truncated; the zero matrix gives rank 0.
// Throws NumericalFailure if the sweeps do not converge.
SvdFactors reduced_svd(const Matrix& a, double rank_tol = kDefaultRankTolerance);

// Singular values only (all of them, including zeros), nonincreasing.
std::vector<double> singular_values(const Matrix& a);

// Polar factor U V^T. msgn(0) = 0.
Matrix msgn_exact(const Matrix& a);

struct NewtonSchulzParams {
  int iters = 15;
  double a = 1.5;
  double b = -0.5;
};

// Y0 = a / ||a||_F, Y <- a*Y + b*Y Y^T Y. Throws DomainError on a zero input
// or iters < 1.
Matrix msgn_newton_schulz(const Matrix& a, const NewtonSchulzParams& params = {});

// Step-direction orthogonalizer used by the optimizer. Zero maps to zero for
// both choices.
struct Orthogonalizer {
  enum class Kind { exact_svd, newton_schulz };

  Kind kind = Kind::exact_svd;
  NewtonSchulzParams newton_schulz{};

  static Orthogonalizer exact() { return {}; }
  static Orthogonalizer ns(int iters) { return {Kind::newton_schulz, {iters, 1.5, -0.5}}; }

  Matrix apply(const Matrix& a) const;
  // "svd" or "ns:<iters>"
  std::string to_string() const;
  static Orthogonalizer parse(const std::string& text);
};

// Minimum-Frobenius-norm solution of h x = r for symmetric positive
// semidefinite h, via the reduced SVD pseudo-inverse.
Matrix solve_psd(const Matrix& h, const Matrix& r);

}  // namespace declab

#endif  // DECLAB_LINALG_HPP_
