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

// Decentralized optimizers run as bulk-synchronous rounds over a MixingSpec.
//
// DeMuon round k, for every node i (each line is one barrier-separated stage):
//
//   M_i^k     = (1 - theta) M_i^{k-1} + theta G_i(X_i^k; xi_i^k)
//   V_i^k     = sum_j w_ij (V_j^{k-1} + M_j^k - M_j^{k-1})
//   X_i^{k+1} = sum_j w_ij (X_j^k - eta msgn(V_j^k))
//
// GT_NSGDm shares the M and V stages and steps along V_j / ||V_j||_F. DSGD
// steps along G_j with constant eta; DSGD_Clip along clip(G_j, tau_k) with
// eta_k = eta/(k+1) and tau_k = tau (k+1)^{2/5}.

#ifndef DECLAB_OPTIMIZERS_HPP_
#define DECLAB_OPTIMIZERS_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "declab/diagnostics.hpp"
#include "declab/executor.hpp"
#include "declab/linalg.hpp"
#include "declab/noise.hpp"
#include "declab/problems.hpp"
#include "declab/topology.hpp"

namespace declab {

enum class Algorithm { demuon, dsgd, dsgd_clip, gt_nsgdm };

std::string to_string(Algorithm algorithm);
Algorithm parse_algorithm(const std::string& text);
// True for the methods that keep momentum and tracker sequences.
bool has_trackers(Algorithm algorithm);

struct ScheduleParams {
  double eta = 0.1;
  double theta = 0.2;
  std::uint64_t horizon = 100;
  double alpha = 2.0;
  bool derived_from_theorem = false;

  void validate() const;
};

// eta = K^{-(2a-1)/(3a-2)}, theta = K^{-a/(3a-2)}. Throws DomainError when
// K < 4 or alpha is outside (1,2].
ScheduleParams theoretical_schedule(std::uint64_t horizon, double alpha);

struct BaselineParams {
  double dsgd_eta = 0.01;
  double clip_eta = 10.0;
  double clip_tau = 0.1;
  double gt_eta = 0.1;
  double gt_theta = 0.2;

  void validate() const;
};

// g * min(1, tau / ||g||_F)
Matrix clip_frobenius(const Matrix& g, double tau);

struct RunState {
  std::uint64_t iter = 0;
  Algorithm algorithm = Algorithm::demuon;
  Orthogonalizer orthogonalizer{};
  std::vector<Matrix> x;       // X^k, the point the next round evaluates at
  std::vector<Matrix> m;       // M^{k-1}
  std::vector<Matrix> v;       // V^{k-1}
  std::vector<Matrix> m_prev;  // M^{k-2}
  // Unscaled per-node directions applied by the last round (msgn(V),
  // V/||V||_F, G or clip(G)); empty before the first round.
  std::vector<Matrix> direction;
  double last_step_size = 0.0;
  double last_clip_threshold = 0.0;

  // All X_i = start, trackers zero.
  static RunState initial(Algorithm algorithm, const Problem& problem, const Matrix& start,
                          Orthogonalizer orthogonalizer = {});

  std::size_t nodes() const noexcept { return x.size(); }
};

struct StepContext {
  const Problem& problem;
  const MixingSpec& mixing;
  const NoiseModel& noise;
  const Executor& executor;
};

RunState demuon_step(const RunState& state, const StepContext& ctx, const ScheduleParams& schedule);
RunState dsgd_step(const RunState& state, const StepContext& ctx, const BaselineParams& params);
RunState dsgd_clip_step(const RunState& state, const StepContext& ctx, const BaselineParams& params);
RunState gt_nsgdm_step(const RunState& state, const StepContext& ctx, const BaselineParams& params);

// Dispatches on state.algorithm.
RunState step(const RunState& state, const StepContext& ctx, const ScheduleParams& schedule,
              const BaselineParams& baselines);

// eta_k used by `algorithm` at round k.
double step_size(Algorithm algorithm, std::uint64_t k, const ScheduleParams& schedule, const BaselineParams& baselines);

struct RunOptions {
  Algorithm algorithm = Algorithm::demuon;
  Orthogonalizer orthogonalizer{};
  ScheduleParams schedule{};  // schedule.horizon is K for every algorithm
  BaselineParams baselines{};
  // Master seed: the noise base seed and the iota_K draw derive from it.
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::optional<Matrix> start;  // defaults to problem.default_start()
  bool record_wall_time = false;
  bool compute_potential = true;
};

struct RunResult {
  std::uint64_t iterations = 0;
  std::uint64_t iota = 0;
  double grad_at_iota = 0.0;
  double running_average_grad = 0.0;  // (1/K) sum_k ||avg grad at X^k||_*
  double initial_avg_grad = 0.0;
  double final_avg_grad = 0.0;
  std::size_t consensus_violations = 0;  // DeMuon rows above bound + 1e-9
  std::size_t ball_exits = 0;  // rows with some ||X_i^k|| > certified radius
  std::vector<std::string> warnings;
  PotentialParams potential_params{};
  RunState final_state;
};

inline constexpr double kConsensusSlack = 1e-9;

// K synchronous rounds with one MetricsRow per round. Row k describes
// (X^k, M^k, V^k). Throws NumericalFailure with the round index if an SVD
// fails or an iterate becomes non-finite.
RunResult run(const Problem& problem, const MixingSpec& mixing, const NoiseModel& noise, const RunOptions& options,
              MetricsSink& sink);

}  // namespace declab

#endif  // DECLAB_OPTIMIZERS_HPP_
