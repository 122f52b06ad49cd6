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

#include "declab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "declab/errors.hpp"
#include "declab/text_io.hpp"

namespace declab {

namespace {

std::string optional_field(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

void check_alpha(double alpha) {
  if (!(alpha > 1.0 && alpha <= 2.0)) throw DomainError("alpha must lie in (1,2]");
}

void check_lambda(double lambda) {
  if (!(lambda >= 0.0 && lambda < 1.0)) throw DomainError("mixing rate must lie in [0,1)");
}

}  // namespace

std::string to_csv_line(const MetricsRow& row) {
  std::string line = std::to_string(row.iter);
  for (const std::string& field :
       {format_double(row.consensus_error_x), format_double(row.consensus_bound), format_double(row.avg_grad_nuclear),
        optional_field(row.tracking_residual), optional_field(row.consensus_error_v), optional_field(row.potential),
        format_double(row.objective_at_mean), format_double(row.wall_time_ms)}) {
    line += ',';
    line += field;
  }
  return line;
}

CsvSink::CsvSink(std::ostream& out) : out_(out) { out_ << kMetricsCsvHeader << '\n'; }

void CsvSink::append(const MetricsRow& row) { out_ << to_csv_line(row) << '\n'; }

std::vector<Matrix> deviations(std::span<const Matrix> blocks) {
  const Matrix avg = mean(blocks);
  std::vector<Matrix> out;
  out.reserve(blocks.size());
  for (const Matrix& b : blocks) out.push_back(b - avg);
  return out;
}

double consensus_error(std::span<const Matrix> xs) { return spectral_norm(vstack(deviations(xs))); }

double consensus_error_nuclear(std::span<const Matrix> xs) { return nuclear_norm(vstack(deviations(xs))); }

double consensus_bound(double eta, double lambda, std::size_t nodes) {
  check_lambda(lambda);
  return std::sqrt(static_cast<double>(nodes)) * lambda * eta / (1.0 - lambda);
}

PotentialParams theorem_potential_params(std::uint64_t horizon, double alpha, double eta, double lambda) {
  check_alpha(alpha);
  check_lambda(lambda);
  PotentialParams pp;
  pp.alpha = alpha;
  pp.p = std::pow(static_cast<double>(horizon), (alpha * alpha - 3.0 * alpha + 2.0) / (3.0 * alpha - 2.0));
  pp.q = 2.0 * eta / (1.0 - lambda);
  return pp;
}

double potential(const Problem& problem, std::span<const Matrix> xs, std::span<const Matrix> ms,
                 std::span<const Matrix> vs, const PotentialParams& params) {
  if (ms.size() != xs.size() || vs.size() != xs.size()) {
    throw DimensionMismatch("potential needs equally many X, M and V blocks");
  }
  const double f_mean = problem.objective(mean(xs));
  std::vector<Matrix> err = problem.local_gradients(xs);
  for (std::size_t i = 0; i < err.size(); ++i) err[i] -= ms[i];
  const double momentum_term = std::pow(frobenius_norm(vstack(err)), params.alpha);
  const double tracker_term = consensus_error_nuclear(vs);
  return f_mean + params.p * momentum_term + params.q * tracker_term;
}

double u_dm_constant(const UdmInputs& in) {
  check_alpha(in.alpha);
  check_lambda(in.lambda);
  if (in.sigma < 0.0 || in.lipschitz_star < 0.0) throw DomainError("sigma and L_* must be nonnegative");
  const double n = static_cast<double>(in.nodes);
  const double a = in.alpha;
  const double lam = in.lambda;
  const double gap = 1.0 - lam;
  const double l_f = n * in.lipschitz_star;
  const double spread = 2.0 * std::sqrt(n) * lam / gap + 1.0;
  const double r = static_cast<double>(std::min(in.rows, in.cols));

  return in.f0_minus_flow                                          //
         + 3.0 * std::pow(n * in.sigma, a)                         //
         + 2.0 * (n + 1.0) * lam * in.sigma / gap                  //
         + 4.0 * n * in.sigma * lam / gap                          //
         + 3.0 * std::pow(l_f, a) * std::pow(spread, a)            //
         + (2.0 * lam * l_f / gap + in.lipschitz_star / 2.0) * spread  //
         + (a - 1.0) * std::pow(2.0 * std::sqrt(r) / (a * gap), a / (a - 1.0));
}

std::uint64_t min_horizon(double u_dm, double epsilon, double alpha) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("epsilon must lie in (0,1)");
  check_alpha(alpha);
  if (!(u_dm > 0.0)) throw DomainError("U_dm must be positive");
  const double k = std::ceil(std::max(std::pow(u_dm / epsilon, (3.0 * alpha - 2.0) / (alpha - 1.0)), 4.0));
  if (!(k < 9.2e18)) throw std::overflow_error("minimum horizon exceeds 2^63");
  return static_cast<std::uint64_t>(k);
}

double SandwichSlack::min() const {
  return std::min({spectral_lower, spectral_upper, nuclear_lower, nuclear_upper});
}

SandwichSlack stacked_norm_slack(std::span<const Matrix> blocks) {
  const double n = static_cast<double>(blocks.size());
  double sum_spec = 0.0, sum_spec_sq = 0.0, sum_nuc = 0.0;
  for (const Matrix& b : blocks) {
    const auto s = singular_values(b);
    const double spec = s.empty() ? 0.0 : s.front();
    double nuc = 0.0;
    for (double x : s) nuc += x;
    sum_spec += spec;
    sum_spec_sq += spec * spec;
    sum_nuc += nuc;
  }
  const Matrix stack = vstack(blocks);
  const auto s = singular_values(stack);
  const double spec = s.empty() ? 0.0 : s.front();
  double nuc = 0.0;
  for (double x : s) nuc += x;
  return {spec - sum_spec / n, std::sqrt(sum_spec_sq) - spec, nuc - sum_nuc / n, sum_nuc - nuc};
}

}  // namespace declab
