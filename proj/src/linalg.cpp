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

#include "declab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include "declab/errors.hpp"

namespace declab {

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (data_.size() != rows * cols) {
    throw DimensionMismatch("matrix " + std::to_string(rows) + "x" + std::to_string(cols) +
                            " given " + std::to_string(data_.size()) + " entries");
  }
  if (!is_finite()) throw DomainError("matrix entries must be finite");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> values) {
  Matrix m(values.size(), values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
  return m;
}

Matrix Matrix::constant(std::size_t rows, std::size_t cols, double value) {
  Matrix m(rows, cols);
  std::fill(m.data_.begin(), m.data_.end(), value);
  return m;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

bool Matrix::is_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

bool Matrix::is_zero() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return x == 0.0; });
}

Matrix& Matrix::operator+=(const Matrix& rhs) {
  if (!same_shape(rhs)) throw DimensionMismatch("add " + shape_string(*this) + " + " + shape_string(rhs));
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += rhs.data_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& rhs) {
  if (!same_shape(rhs)) throw DimensionMismatch("subtract " + shape_string(*this) + " - " + shape_string(rhs));
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= rhs.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(double s) noexcept {
  for (double& x : data_) x *= s;
  return *this;
}

Matrix& Matrix::add_scaled(double s, const Matrix& x) {
  if (!same_shape(x)) throw DimensionMismatch("axpy " + shape_string(*this) + " += s*" + shape_string(x));
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += s * x.data_[i];
  return *this;
}

Matrix operator+(Matrix lhs, const Matrix& rhs) { return lhs += rhs; }
Matrix operator-(Matrix lhs, const Matrix& rhs) { return lhs -= rhs; }
Matrix operator*(Matrix m, double s) { return m *= s; }
Matrix operator*(double s, Matrix m) { return m *= s; }

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw DimensionMismatch("multiply " + shape_string(a) + " * " + shape_string(b));
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

std::string shape_string(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

double inner(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) throw DimensionMismatch("inner " + shape_string(a) + " . " + shape_string(b));
  const auto x = a.data();
  const auto y = b.data();
  return std::inner_product(x.begin(), x.end(), y.begin(), 0.0);
}

double frobenius_norm(const Matrix& a) { return std::sqrt(inner(a, a)); }

double spectral_norm(const Matrix& a) {
  const auto s = singular_values(a);
  return s.empty() ? 0.0 : s.front();
}

double nuclear_norm(const Matrix& a) {
  const auto s = singular_values(a);
  return std::accumulate(s.begin(), s.end(), 0.0);
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) throw DimensionMismatch("compare " + shape_string(a) + " vs " + shape_string(b));
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a.data()[i] - b.data()[i]));
  return d;
}

Matrix vstack(std::span<const Matrix> blocks) {
  if (blocks.empty()) return {};
  const std::size_t m = blocks.front().rows();
  const std::size_t n = blocks.front().cols();
  Matrix out(m * blocks.size(), n);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (!blocks[b].same_shape(blocks.front())) {
      throw DimensionMismatch("vstack block " + std::to_string(b) + " is " + shape_string(blocks[b]));
    }
    std::copy(blocks[b].data().begin(), blocks[b].data().end(), out.data().begin() + b * m * n);
  }
  return out;
}

Matrix mean(std::span<const Matrix> blocks) {
  if (blocks.empty()) throw DimensionMismatch("mean of zero blocks");
  // Shifted by the first block: identical blocks average to themselves exactly.
  const Matrix& base = blocks.front();
  Matrix acc(base.rows(), base.cols());
  for (std::size_t i = 1; i < blocks.size(); ++i) acc += blocks[i] - base;
  acc *= 1.0 / static_cast<double>(blocks.size());
  return acc += base;
}

Matrix SvdFactors::reconstruct() const {
  Matrix us = u;
  for (std::size_t r = 0; r < us.rows(); ++r)
    for (std::size_t c = 0; c < us.cols(); ++c) us(r, c) *= singular_values[c];
  return us * v.transpose();
}

namespace {

constexpr int kMaxJacobiSweeps = 80;

struct JacobiResult {
  Matrix w;  // columns are u_j * s_j
  Matrix v;  // accumulated right rotations (empty when not requested)
  std::vector<double> norms;
  std::vector<std::size_t> order;  // column indices by nonincreasing norm
};

// One-sided (Hestenes) Jacobi on a tall matrix (rows >= cols): rotate column
// pairs until every pair is orthogonal to working precision.
JacobiResult one_sided_jacobi(const Matrix& a, bool want_v) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  JacobiResult res{a, want_v ? Matrix::identity(n) : Matrix{}, {}, {}};
  Matrix& w = res.w;
  const double eps = std::numeric_limits<double>::epsilon();
  const double tol = eps * static_cast<double>(std::max<std::size_t>(m, 1));
  // Columns below the rounding floor of the whole matrix are numerically null;
  // rotating them against each other never settles.
  const double fro = frobenius_norm(a);
  const double null_floor = (eps * fro) * (eps * fro);

  bool converged = n < 2;
  int sweep = 0;
  while (!converged && sweep < kMaxJacobiSweeps) {
    ++sweep;
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          const double wp = w(i, p), wq = w(i, q);
          alpha += wp * wp;
          beta += wq * wq;
          gamma += wp * wq;
        }
        if (gamma == 0.0 || alpha <= null_floor || beta <= null_floor) continue;
        if (std::abs(gamma) <= tol * std::sqrt(alpha) * std::sqrt(beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::hypot(1.0, t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double wp = w(i, p), wq = w(i, q);
          w(i, p) = c * wp - s * wq;
          w(i, q) = s * wp + c * wq;
        }
        if (want_v) {
          for (std::size_t i = 0; i < n; ++i) {
            const double vp = res.v(i, p), vq = res.v(i, q);
            res.v(i, p) = c * vp - s * vq;
            res.v(i, q) = s * vp + c * vq;
          }
        }
      }
    }
    converged = !rotated;
  }
  if (!converged) {
    throw NumericalFailure("one-sided Jacobi SVD did not converge after " + std::to_string(sweep) +
                               " sweeps on a " + shape_string(a) + " matrix",
                           sweep);
  }

  res.norms.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    double ss = 0.0;
    for (std::size_t i = 0; i < m; ++i) ss += w(i, j) * w(i, j);
    res.norms[j] = std::sqrt(ss);
  }
  res.order.resize(n);
  std::iota(res.order.begin(), res.order.end(), std::size_t{0});
  std::stable_sort(res.order.begin(), res.order.end(),
                   [&](std::size_t x, std::size_t y) { return res.norms[x] > res.norms[y]; });
  return res;
}

}  // namespace

SvdFactors reduced_svd(const Matrix& a, double rank_tol) {
  if (!(rank_tol >= 0.0)) throw DomainError("rank tolerance must be nonnegative");
  if (a.rows() < a.cols()) {
    SvdFactors f = reduced_svd(a.transpose(), rank_tol);
    std::swap(f.u, f.v);
    return f;
  }
  const JacobiResult jac = one_sided_jacobi(a, /*want_v=*/true);
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  const double s_max = n == 0 ? 0.0 : jac.norms[jac.order.front()];

  std::vector<std::size_t> kept;
  for (std::size_t idx : jac.order) {
    const double s = jac.norms[idx];
    if (s > 0.0 && s > rank_tol * s_max) kept.push_back(idx);
  }

  SvdFactors f;
  f.rank_tolerance = rank_tol;
  f.u = Matrix(m, kept.size());
  f.v = Matrix(n, kept.size());
  f.singular_values.reserve(kept.size());
  for (std::size_t c = 0; c < kept.size(); ++c) {
    const std::size_t j = kept[c];
    const double s = jac.norms[j];
    f.singular_values.push_back(s);
    for (std::size_t i = 0; i < m; ++i) f.u(i, c) = jac.w(i, j) / s;
    for (std::size_t i = 0; i < n; ++i) f.v(i, c) = jac.v(i, j);
  }
  return f;
}

std::vector<double> singular_values(const Matrix& a) {
  if (a.empty()) return {};
  const JacobiResult jac =
      a.rows() >= a.cols() ? one_sided_jacobi(a, false) : one_sided_jacobi(a.transpose(), false);
  std::vector<double> s;
  s.reserve(jac.order.size());
  for (std::size_t idx : jac.order) s.push_back(jac.norms[idx]);
  return s;
}

Matrix msgn_exact(const Matrix& a) {
  const SvdFactors f = reduced_svd(a);
  if (f.rank() == 0) return Matrix(a.rows(), a.cols());
  return f.u * f.v.transpose();
}

Matrix msgn_newton_schulz(const Matrix& a, const NewtonSchulzParams& params) {
  if (params.iters < 1) throw DomainError("Newton-Schulz needs at least one iteration");
  const double fro = frobenius_norm(a);
  if (fro == 0.0) throw DomainError("Newton-Schulz is undefined for the zero matrix");
  Matrix y = a * (1.0 / fro);
  const bool tall = y.rows() >= y.cols();
  for (int it = 0; it < params.iters; ++it) {
    // Use the smaller Gram matrix: Y (Y^T Y) == (Y Y^T) Y.
    Matrix cubic = tall ? y * (y.transpose() * y) : (y * y.transpose()) * y;
    y *= params.a;
    y.add_scaled(params.b, cubic);
  }
  return y;
}

Matrix Orthogonalizer::apply(const Matrix& a) const {
  if (a.is_zero()) return Matrix(a.rows(), a.cols());
  return kind == Kind::exact_svd ? msgn_exact(a) : msgn_newton_schulz(a, newton_schulz);
}

std::string Orthogonalizer::to_string() const {
  return kind == Kind::exact_svd ? std::string("svd") : "ns:" + std::to_string(newton_schulz.iters);
}

Orthogonalizer Orthogonalizer::parse(const std::string& text) {
  if (text == "svd") return exact();
  if (text.rfind("ns:", 0) == 0) {
    const std::string digits = text.substr(3);
    if (!digits.empty() && std::all_of(digits.begin(), digits.end(), [](char ch) { return ch >= '0' && ch <= '9'; })) {
      const int iters = std::stoi(digits);
      if (iters >= 1) return ns(iters);
    }
  }
  throw DomainError("orthogonalizer must be 'svd' or 'ns:<iters>' with iters >= 1, got '" + text + "'");
}

Matrix solve_psd(const Matrix& h, const Matrix& r) {
  if (h.rows() != h.cols() || h.rows() != r.rows()) {
    throw DimensionMismatch("solve " + shape_string(h) + " x = " + shape_string(r));
  }
  const SvdFactors f = reduced_svd(h);
  Matrix ut_r = f.u.transpose() * r;
  for (std::size_t i = 0; i < ut_r.rows(); ++i)
    for (std::size_t j = 0; j < ut_r.cols(); ++j) ut_r(i, j) /= f.singular_values[i];
  return f.v * ut_r;
}

}  // namespace declab
