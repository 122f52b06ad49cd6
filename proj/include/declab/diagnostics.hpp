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

// Per-iteration metrics and the analysis constants of the DeMuon method:
// the consensus bound sqrt(N) lambda eta / (1 - lambda), the potential
//
//   P_k = f(Xbar^k) + p ||grad F(X^k) - M^k||_F^alpha + q ||V^k - 1 (x) Vbar^k||_*
//
// (all norms on N*m x n stacks), the constant U_dm and the horizon it implies.

#ifndef DECLAB_DIAGNOSTICS_HPP_
#define DECLAB_DIAGNOSTICS_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "declab/linalg.hpp"
#include "declab/problems.hpp"

namespace declab {

struct MetricsRow {
  std::uint64_t iter = 0;
  double consensus_error_x = 0.0;  // ||X^k - 1 (x) Xbar^k||_2 of the stack
  double consensus_bound = 0.0;
  double avg_grad_nuclear = 0.0;  // ||(1/N) sum grad f_i(X_i^k)||_*
  std::optional<double> tracking_residual;  // ||Vbar^k - Mbar^k||_F
  std::optional<double> consensus_error_v;  // ||V^k - 1 (x) Vbar^k||_*
  std::optional<double> potential;
  double objective_at_mean = 0.0;  // f(Xbar^k)
  double wall_time_ms = 0.0;
};

// The fixed CSV column order.
inline constexpr const char* kMetricsCsvHeader =
    "iter,consensus_error_x,consensus_bound,avg_grad_nuclear,tracking_residual,consensus_error_v,potential,"
    "objective_at_mean,wall_time_ms";

// One line without the trailing newline. Absent optionals are empty fields;
// doubles use shortest round-trip formatting.
std::string to_csv_line(const MetricsRow& row);

class MetricsSink {
 public:
  virtual ~MetricsSink() = default;
  virtual void append(const MetricsRow& row) = 0;
};

class VectorSink final : public MetricsSink {
 public:
  void append(const MetricsRow& row) override { rows.push_back(row); }
  std::vector<MetricsRow> rows;
};

class CsvSink final : public MetricsSink {
 public:
  // Writes the header immediately.
  explicit CsvSink(std::ostream& out);
  void append(const MetricsRow& row) override;

 private:
  std::ostream& out_;
};

// Forwards to several sinks in order.
class TeeSink final : public MetricsSink {
 public:
  TeeSink(MetricsSink& first, MetricsSink& second) : first_(first), second_(second) {}
  void append(const MetricsRow& row) override {
    first_.append(row);
    second_.append(row);
  }

 private:
  MetricsSink& first_;
  MetricsSink& second_;
};

// Blocks Y_i - Ybar.
std::vector<Matrix> deviations(std::span<const Matrix> blocks);

// Spectral norm of the stacked deviations. Throws DimensionMismatch on an
// empty list or mixed shapes.
double consensus_error(std::span<const Matrix> xs);
double consensus_error_nuclear(std::span<const Matrix> xs);

// sqrt(N) lambda eta / (1 - lambda); throws DomainError unless 0 <= lambda < 1.
double consensus_bound(double eta, double lambda, std::size_t nodes);

struct PotentialParams {
  double p = 1.0;
  double q = 0.0;
  double alpha = 2.0;
  double target_epsilon = 0.1;  // reporting only
};

// p = K^{(alpha^2 - 3 alpha + 2)/(3 alpha - 2)}, q = 2 eta / (1 - lambda).
PotentialParams theorem_potential_params(std::uint64_t horizon, double alpha, double eta, double lambda);

double potential(const Problem& problem, std::span<const Matrix> xs, std::span<const Matrix> ms,
                 std::span<const Matrix> vs, const PotentialParams& params);

struct UdmInputs {
  double f0_minus_flow = 0.0;
  std::size_t nodes = 1;
  double sigma = 0.0;
  double alpha = 2.0;
  double lambda = 0.0;
  double lipschitz_star = 0.0;
  std::size_t rows = 1;
  std::size_t cols = 1;
};

// Sum of the eight nonnegative terms of U_dm with L_F = N L_*.
double u_dm_constant(const UdmInputs& in);

// ceil(max{(u_dm/eps)^{(3 alpha - 2)/(alpha - 1)}, 4}). Throws DomainError on
// eps outside (0,1), alpha outside (1,2] or u_dm <= 0, and
// std::overflow_error when the horizon does not fit in 63 bits.
std::uint64_t min_horizon(double u_dm, double epsilon, double alpha);

// Stacked-norm sandwich bounds for Y = [Y_1; ...; Y_N] as slacks
// (>= 0 means every inequality holds).
struct SandwichSlack {
  double spectral_lower;  // ||Y|| - (1/N) sum ||Y_i||
  double spectral_upper;  // sqrt(sum ||Y_i||^2) - ||Y||
  double nuclear_lower;   // ||Y||_* - (1/N) sum ||Y_i||_*
  double nuclear_upper;   // sum ||Y_i||_* - ||Y||_*
  double min() const;
};

SandwichSlack stacked_norm_slack(std::span<const Matrix> blocks);

}  // namespace declab

#endif  // DECLAB_DIAGNOSTICS_HPP_
