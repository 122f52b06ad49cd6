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

// Stochastic gradient oracles G_i(X; xi) = grad f_i(X) + noise with i.i.d.
// zero-mean entries. Each (base_seed, node, iter) triple owns an independent
// counter-derived stream, so draws do not depend on evaluation order.

#ifndef DECLAB_NOISE_HPP_
#define DECLAB_NOISE_HPP_

#include <cstddef>
#include <cstdint>
#include <string>

#include "declab/linalg.hpp"
#include "declab/problems.hpp"

namespace declab {

enum class NoiseFamily { gaussian, student_t };

std::string to_string(NoiseFamily family);
NoiseFamily parse_noise_family(const std::string& text);

struct NoiseModel {
  NoiseFamily family = NoiseFamily::gaussian;
  // Moment order: E ||noise||_*^alpha is finite.
  double alpha = 2.0;
  // Entry scale; 0 disables noise (exact gradients).
  double scale = 0.0;
  // Student-t degrees of freedom, must exceed alpha.
  double dof = 3.0;
  std::uint64_t base_seed = 0;

  // Throws DomainError: alpha in (1,2], scale >= 0, gaussian needs alpha = 2,
  // student_t needs dof > alpha.
  void validate() const;
};

// splitmix64 finalizer chain over the triple.
std::uint64_t stream_seed(std::uint64_t base_seed, std::uint64_t node, std::uint64_t iter);

// rows x cols matrix: Normal(0, scale^2) or scale * T(dof) entries, row-major.
Matrix sample_noise(const NoiseModel& model, std::size_t rows, std::size_t cols, std::uint64_t node,
                    std::uint64_t iter);

Matrix stochastic_gradient(const Problem& problem, std::size_t node, const Matrix& x, const NoiseModel& model,
                           std::uint64_t iter);

// Monte-Carlo estimate of E ||noise||_*^alpha over `draws` samples taken from
// a reserved stream that runs never touch.
double estimate_alpha_moment(const NoiseModel& model, std::size_t rows, std::size_t cols, std::size_t draws);

}  // namespace declab

#endif  // DECLAB_NOISE_HPP_
