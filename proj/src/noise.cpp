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

#include "declab/noise.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "declab/errors.hpp"

namespace declab {

std::string to_string(NoiseFamily family) {
  return family == NoiseFamily::gaussian ? "gaussian" : "student_t";
}

NoiseFamily parse_noise_family(const std::string& text) {
  if (text == "gaussian" || text == "normal") return NoiseFamily::gaussian;
  if (text == "student_t" || text == "student" || text == "t") return NoiseFamily::student_t;
  throw DomainError("unknown noise family '" + text + "'");
}

void NoiseModel::validate() const {
  if (!(alpha > 1.0 && alpha <= 2.0)) throw DomainError("noise alpha must lie in (1,2]");
  if (!(scale >= 0.0) || !std::isfinite(scale)) throw DomainError("noise scale must be finite and >= 0");
  if (family == NoiseFamily::gaussian && alpha != 2.0) throw DomainError("gaussian noise requires alpha = 2");
  if (family == NoiseFamily::student_t && !(dof > alpha)) {
    throw DomainError("student_t noise requires dof > alpha");
  }
}

namespace {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t kMomentStreamNode = std::numeric_limits<std::uint64_t>::max();

}  // namespace

std::uint64_t stream_seed(std::uint64_t base_seed, std::uint64_t node, std::uint64_t iter) {
  std::uint64_t h = splitmix64(base_seed);
  h = splitmix64(h ^ node);
  h = splitmix64(h ^ (iter * 0xd1b54a32d192ed03ULL));
  return h;
}

Matrix sample_noise(const NoiseModel& model, std::size_t rows, std::size_t cols, std::uint64_t node,
                    std::uint64_t iter) {
  Matrix out(rows, cols);
  if (model.scale == 0.0) return out;
  std::mt19937_64 rng(stream_seed(model.base_seed, node, iter));
  if (model.family == NoiseFamily::gaussian) {
    std::normal_distribution<double> dist(0.0, model.scale);
    for (double& x : out.data()) x = dist(rng);
  } else {
    std::student_t_distribution<double> dist(model.dof);
    for (double& x : out.data()) x = model.scale * dist(rng);
  }
  return out;
}

Matrix stochastic_gradient(const Problem& problem, std::size_t node, const Matrix& x, const NoiseModel& model,
                           std::uint64_t iter) {
  Matrix g = problem.gradient(node, x);
  if (model.scale > 0.0) g += sample_noise(model, g.rows(), g.cols(), node, iter);
  return g;
}

double estimate_alpha_moment(const NoiseModel& model, std::size_t rows, std::size_t cols, std::size_t draws) {
  if (draws == 0 || model.scale == 0.0) return 0.0;
  double sum = 0.0;
  for (std::size_t d = 0; d < draws; ++d) {
    sum += std::pow(nuclear_norm(sample_noise(model, rows, cols, kMomentStreamNode, d)), model.alpha);
  }
  return sum / static_cast<double>(draws);
}

}  // namespace declab
