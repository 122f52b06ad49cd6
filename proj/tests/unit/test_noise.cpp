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

#include <algorithm>
#include <cmath>
#include <vector>

#include "declab/errors.hpp"
#include "declab/noise.hpp"
#include "doctest.h"

using namespace declab;

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

const Problem& fixed_problem() {
  static const Problem p = make_quadratic({.nodes = 2, .rows = 3, .cols = 2, .data_rows = 4, .seed = 12});
  return p;
}

}  // namespace

TEST_CASE("model validation") {
  auto check = [](NoiseFamily family, double alpha, double scale, double dof) {
    NoiseModel{family, alpha, scale, dof, 1}.validate();
  };
  CHECK_NOTHROW(check(NoiseFamily::gaussian, 2.0, 1.0, 0.0));
  CHECK_THROWS_AS(check(NoiseFamily::gaussian, 1.5, 1.0, 0.0), DomainError);
  CHECK_THROWS_AS(check(NoiseFamily::student_t, 1.5, 1.0, 1.4), DomainError);
  CHECK_THROWS_AS(check(NoiseFamily::student_t, 1.0, 1.0, 3.0), DomainError);
  CHECK_THROWS_AS(check(NoiseFamily::student_t, 2.5, 1.0, 3.0), DomainError);
  CHECK_THROWS_AS(check(NoiseFamily::gaussian, 2.0, -1.0, 0.0), DomainError);
}

TEST_CASE("zero scale gives zero noise and exact gradients") {
  const NoiseModel quiet{NoiseFamily::student_t, 1.5, 0.0, 1.8, 5};
  CHECK(sample_noise(quiet, 3, 4, 0, 0).is_zero());
  const Matrix x = Matrix::constant(3, 2, 0.3);
  CHECK(stochastic_gradient(fixed_problem(), 1, x, quiet, 7) == fixed_problem().gradient(1, x));
}

TEST_CASE("draws are deterministic per (seed, node, iter)") {
  const NoiseModel g{NoiseFamily::gaussian, 2.0, 1.0, 0.0, 99};
  CHECK(sample_noise(g, 3, 3, 2, 10) == sample_noise(g, 3, 3, 2, 10));
  CHECK_FALSE(sample_noise(g, 3, 3, 2, 10) == sample_noise(g, 3, 3, 2, 11));
  CHECK_FALSE(sample_noise(g, 3, 3, 2, 10) == sample_noise(g, 3, 3, 3, 10));
  NoiseModel other = g;
  other.base_seed = 100;
  CHECK_FALSE(sample_noise(g, 3, 3, 2, 10) == sample_noise(other, 3, 3, 2, 10));
  CHECK(stream_seed(1, 2, 3) != stream_seed(1, 3, 2));
}

TEST_CASE("stochastic gradients are unbiased over 10^4 draws") {
  const Problem& p = fixed_problem();
  const Matrix x = Matrix::constant(3, 2, -0.4);
  const Matrix exact = p.gradient(0, x);
  for (const NoiseModel& model : {NoiseModel{NoiseFamily::gaussian, 2.0, 0.5, 0.0, 3},
                                  NoiseModel{NoiseFamily::student_t, 1.5, 0.5, 3.0, 3}}) {
    constexpr int kDraws = 10000;
    Matrix sum(3, 2), sum_sq(3, 2);
    for (int d = 0; d < kDraws; ++d) {
      const Matrix err = stochastic_gradient(p, 0, x, model, static_cast<std::uint64_t>(d)) - exact;
      sum += err;
      for (std::size_t i = 0; i < err.size(); ++i) sum_sq.data()[i] += err.data()[i] * err.data()[i];
    }
    for (std::size_t i = 0; i < sum.size(); ++i) {
      const double mu = sum.data()[i] / kDraws;
      const double sd = std::sqrt(sum_sq.data()[i] / kDraws - mu * mu);
      CHECK(std::abs(mu) <= 4.0 * sd / std::sqrt(double{kDraws}));
    }
  }
}

TEST_CASE("different nodes draw independent streams") {
  const NoiseModel g{NoiseFamily::gaussian, 2.0, 1.0, 0.0, 21};
  constexpr int kDraws = 10000;
  double sxy = 0, sxx = 0, syy = 0;
  for (int d = 0; d < kDraws; ++d) {
    const double a = sample_noise(g, 1, 1, 0, d)(0, 0);
    const double b = sample_noise(g, 1, 1, 1, d)(0, 0);
    sxy += a * b;
    sxx += a * a;
    syy += b * b;
  }
  CHECK(std::abs(sxy / std::sqrt(sxx * syy)) <= 4.0 / std::sqrt(double{kDraws}));
}

TEST_CASE("student_t dof 1.8: finite alpha = 1.5 moment, divergent second moment") {
  const NoiseModel heavy{NoiseFamily::student_t, 1.5, 1.0, 1.8, 1};
  constexpr int kDraws = 100000;
  double sum = 0.0, at_half = 0.0;
  for (int d = 0; d < kDraws; ++d) {
    sum += std::pow(nuclear_norm(sample_noise(heavy, 2, 2, 0, d)), heavy.alpha);
    if (d + 1 == kDraws / 2) at_half = sum / (kDraws / 2);
  }
  const double full = sum / kDraws;
  CHECK(std::isfinite(full));
  CHECK(std::abs(full - at_half) / full < 0.05);
  CHECK(estimate_alpha_moment(heavy, 2, 2, 4096) > 0.0);

  // Median over replicate streams of the running second moment grows with the
  // sample count for infinite variance and stays flat for the gaussian control.
  auto second_moment_growth = [](const NoiseModel& model) {
    std::vector<double> early, late;
    for (std::uint64_t stream = 0; stream < 9; ++stream) {
      double s2 = 0.0;
      for (int d = 0; d < 20000; ++d) {
        const double v = nuclear_norm(sample_noise(model, 2, 2, stream, d));
        s2 += v * v;
        if (d + 1 == 200) early.push_back(s2 / 200);
      }
      late.push_back(s2 / 20000);
    }
    return median(late) / median(early);
  };
  CHECK(second_moment_growth(heavy) > 1.2);
  const double control = second_moment_growth({NoiseFamily::gaussian, 2.0, 1.0, 0.0, 1});
  CHECK(control == doctest::Approx(1.0).epsilon(0.15));
}
