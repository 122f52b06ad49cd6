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

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "declab/diagnostics.hpp"
#include "declab/errors.hpp"
#include "declab/optimizers.hpp"
#include "doctest.h"
#include "eigen_oracle.hpp"
#include "test_support.hpp"

using namespace declab;
using declab::testing::random_dim;
using declab::testing::random_stack;
using declab::testing::scalar;

TEST_CASE("consensus_error") {
  const std::vector<Matrix> same(3, Matrix::constant(2, 2, 0.7));
  CHECK(consensus_error(same) == 0.0);
  // Stack of (1, -1) as a 2x1 matrix has spectral norm sqrt(2).
  const std::vector<Matrix> split{scalar(1), scalar(-1)};
  CHECK(consensus_error(split) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK_THROWS_AS(consensus_error(std::vector<Matrix>{}), DimensionMismatch);
  CHECK_THROWS_AS(consensus_error(std::vector<Matrix>{Matrix(1, 2), Matrix(2, 1)}), DimensionMismatch);

  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const auto xs = random_stack(rng, random_dim(rng, 1, 8), random_dim(rng, 1, 5), random_dim(rng, 1, 5));
    double sq = 0.0;
    for (const Matrix& d : deviations(xs)) sq += std::pow(spectral_norm(d), 2);
    CHECK(consensus_error(xs) <= std::sqrt(sq) * (1 + 1e-12));
  }
}

TEST_CASE("consensus_bound") {
  CHECK(consensus_bound(0.3, 0.0, 8) == 0.0);
  CHECK(consensus_bound(0.1, 1.0 / 3.0, 4) == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(consensus_bound(1.0, 0.0, 1) == 0.0);
  CHECK_THROWS_AS(consensus_bound(0.1, 1.0, 4), DomainError);
  CHECK_THROWS_AS(consensus_bound(0.1, -0.1, 4), DomainError);
}

TEST_CASE("potential") {
  std::mt19937_64 rng(8);
  const auto p = make_quadratic({.nodes = 3, .rows = 3, .cols = 2, .data_rows = 4, .heterogeneity = 0.3, .seed = 6});
  const auto xs = random_stack(rng, 3, 3, 2);
  const auto ms = random_stack(rng, 3, 3, 2);
  const auto vs = random_stack(rng, 3, 3, 2);

  SUBCASE("degenerate weights reduce to f at the mean") {
    const PotentialParams zero{.p = 0.0, .q = 0.0, .alpha = 1.5};
    CHECK(potential(p, xs, ms, vs, zero) == doctest::Approx(p.objective(mean(xs))).epsilon(1e-15));
  }

  SUBCASE("matches a brute-force recomputation") {
    const PotentialParams pp{.p = 0.37, .q = 1.9, .alpha = 1.5};
    // Recompute from raw entries: average X, per-node objective, stacked
    // Frobenius norm by summing squares, stacked nuclear norm via Eigen.
    Matrix xbar(3, 2), vbar(3, 2);
    for (int i = 0; i < 3; ++i) {
      xbar.add_scaled(1.0 / 3.0, xs[i]);
      vbar.add_scaled(1.0 / 3.0, vs[i]);
    }
    double f = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
      const Matrix r = p.a()[i] * xbar - p.b()[i];
      double s = 0.0;
      for (double e : r.data()) s += e * e;
      f += 0.5 * s / 3.0;
    }
    double fro_sq = 0.0;
    Eigen::MatrixXd stack(9, 2);
    for (std::size_t i = 0; i < 3; ++i) {
      const Matrix g = p.a()[i].transpose() * (p.a()[i] * xs[i] - p.b()[i]);
      for (std::size_t e = 0; e < 6; ++e) fro_sq += std::pow(g.data()[e] - ms[i].data()[e], 2);
      for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < 2; ++c) stack(3 * i + r, c) = vs[i](r, c) - vbar(r, c);
    }
    const double nuc = Eigen::JacobiSVD<Eigen::MatrixXd>(stack).singularValues().sum();
    const double brute = f + pp.p * std::pow(std::sqrt(fro_sq), pp.alpha) + pp.q * nuc;
    CHECK(std::abs(potential(p, xs, ms, vs, pp) - brute) <= 1e-12 * std::max(1.0, brute));
  }

  SUBCASE("exact momentum on a complete graph leaves only f") {
    const auto mixing = build_complete(3);
    const NoiseModel quiet{};
    const Executor exec;
    const StepContext ctx{p, mixing, quiet, exec};
    ScheduleParams sched;
    sched.eta = 0.05;
    sched.theta = 1.0;  // M^k = G(X^k) exactly; outside the run-level (0,1) check
    RunState s = RunState::initial(Algorithm::demuon, p, Matrix::constant(3, 2, 0.2));
    s = demuon_step(s, ctx, sched);
    const RunState next = demuon_step(s, ctx, sched);
    const PotentialParams pp = theorem_potential_params(64, 1.5, sched.eta, mixing.mixing_rate());
    CHECK(potential(p, s.x, next.m, next.v, pp) == doctest::Approx(p.objective(mean(s.x))).epsilon(1e-12));
  }
}

TEST_CASE("theorem potential weights") {
  for (double alpha : {1.1, 1.5, 1.9, 2.0}) {
    const auto pp = theorem_potential_params(1000, alpha, 0.01, 0.5);
    CHECK(pp.p <= 1.0);
    CHECK(pp.q == doctest::Approx(0.04));
  }
  CHECK(theorem_potential_params(1000, 2.0, 0.01, 0.5).p == 1.0);
}

TEST_CASE("u_dm_constant substitutions") {
  // f0 - f_low = 1, N = 1, sigma = 0, alpha = 2, lambda = 0, L_* = 1, m = n = 1:
  // 1 + 0 + 0 + 0 + 3*1*1 + (0 + 1/2)*1 + 1*(2/2)^2 = 5.5
  CHECK(u_dm_constant({1.0, 1, 0.0, 2.0, 0.0, 1.0, 1, 1}) == 5.5);
  // Only the last term survives: (2*1/2)^2 = 1.
  CHECK(u_dm_constant({0.0, 1, 0.0, 2.0, 0.0, 0.0, 1, 1}) == 1.0);
  CHECK_THROWS_AS(u_dm_constant({1.0, 4, 0.1, 2.0, 1.0, 1.0, 2, 2}), DomainError);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const UdmInputs in{u(rng) + 1e-3, random_dim(rng, 1, 16), u(rng), 1.0 + 0.999 * u(rng) + 1e-3,
                       0.99 * u(rng), u(rng), random_dim(rng, 1, 8), random_dim(rng, 1, 8)};
    CHECK(u_dm_constant(in) > 0.0);
  }
}

TEST_CASE("min_horizon") {
  CHECK(min_horizon(0.3, 0.5, 2.0) == 4);
  CHECK(min_horizon(5.5, 0.5, 2.0) == 14641);
  // alpha = 1.5 gives exponent 2.5/0.5 = 5.
  CHECK(min_horizon(1.0, 0.5, 1.5) == 32);
  CHECK_THROWS_AS(min_horizon(1.0, 1.0, 2.0), DomainError);
  CHECK_THROWS_AS(min_horizon(1.0, 0.0, 2.0), DomainError);
  CHECK_THROWS_AS(min_horizon(1e6, 0.01, 1.1), std::overflow_error);

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (int trial = 0; trial < 300; ++trial) {
    const double alpha = 1.3 + 0.7 * u(rng);
    const double udm = 0.1 + 3.0 * u(rng);
    const double e1 = u(rng), e2 = std::max(e1, u(rng));
    CHECK(min_horizon(udm, e1, alpha) >= min_horizon(udm, e2, alpha));
    CHECK(min_horizon(udm, e1, alpha) <= min_horizon(udm * 1.5, e1, alpha));
  }
}

TEST_CASE("stacked-norm sandwich on 500 random stacks") {
  std::mt19937_64 rng(500);
  for (int trial = 0; trial < 500; ++trial) {
    const auto ys = random_stack(rng, random_dim(rng, 1, 8), random_dim(rng, 1, 6), random_dim(rng, 1, 6));
    CHECK(stacked_norm_slack(ys).min() >= -1e-12);
  }
}

TEST_CASE("metrics CSV line") {
  MetricsRow row;
  row.iter = 3;
  row.consensus_error_x = 0.5;
  row.consensus_bound = 0.25;
  row.avg_grad_nuclear = 1.0 / 3.0;
  row.objective_at_mean = 2.0;
  CHECK(to_csv_line(row) == "3,0.5,0.25,0.3333333333333333,,,,2,0");
  row.tracking_residual = 0.0;
  row.consensus_error_v = 1e-20;
  row.potential = 7.5;
  CHECK(to_csv_line(row) == "3,0.5,0.25,0.3333333333333333,0,1e-20,7.5,2,0");

  std::ostringstream out;
  CsvSink sink(out);
  sink.append(row);
  CHECK(out.str() == std::string(kMetricsCsvHeader) + "\n" + to_csv_line(row) + "\n");
}
