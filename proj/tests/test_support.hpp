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

// Shared generators and reference conversions for the test suites.

#ifndef DECLAB_TESTS_TEST_SUPPORT_HPP_
#define DECLAB_TESTS_TEST_SUPPORT_HPP_

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "declab/linalg.hpp"

namespace declab::testing {

inline Matrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Matrix m(rows, cols);
  for (double& x : m.data()) x = normal(rng);
  return m;
}

inline std::size_t random_dim(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline Matrix from_rows(std::size_t rows, std::size_t cols, std::vector<double> entries) {
  return Matrix(rows, cols, std::move(entries));
}

inline Matrix scalar(double x) { return Matrix(1, 1, {x}); }

inline std::vector<Matrix> random_stack(std::mt19937_64& rng, std::size_t n, std::size_t rows, std::size_t cols) {
  std::vector<Matrix> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(random_matrix(rng, rows, cols));
  return out;
}

}  // namespace declab::testing

#endif  // DECLAB_TESTS_TEST_SUPPORT_HPP_
