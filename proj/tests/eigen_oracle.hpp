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

// Eigen's SVD as a reference implementation, independent of declab's
// one-sided Jacobi.

#ifndef DECLAB_TESTS_EIGEN_ORACLE_HPP_
#define DECLAB_TESTS_EIGEN_ORACLE_HPP_

#include <Eigen/Dense>

#include "declab/linalg.hpp"

namespace declab::testing {

inline Eigen::MatrixXd to_eigen(const Matrix& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) e(r, c) = m(r, c);
  return e;
}

inline Matrix from_eigen(const Eigen::MatrixXd& e) {
  Matrix m(e.rows(), e.cols());
  for (Eigen::Index r = 0; r < e.rows(); ++r)
    for (Eigen::Index c = 0; c < e.cols(); ++c) m(r, c) = e(r, c);
  return m;
}

inline Eigen::VectorXd oracle_singular_values(const Matrix& m) {
  return Eigen::JacobiSVD<Eigen::MatrixXd>(to_eigen(m)).singularValues();
}

// U V^T over singular values above tol * s_max.
inline Matrix oracle_polar(const Matrix& m, double tol = 1e-12) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(m), Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > tol * s(0) && s(i) > 0) out += svd.matrixU().col(i) * svd.matrixV().col(i).transpose();
  }
  return from_eigen(out);
}

}  // namespace declab::testing

#endif  // DECLAB_TESTS_EIGEN_ORACLE_HPP_
