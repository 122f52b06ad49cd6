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

#include "declab/optimizers.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include "declab/errors.hpp"

namespace declab {

std::string to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::demuon: return "demuon";
    case Algorithm::dsgd: return "dsgd";
    case Algorithm::dsgd_clip: return "dsgd_clip";
    case Algorithm::gt_nsgdm: return "gt_nsgdm";
  }
  return "unknown";
}

Algorithm parse_algorithm(const std::string& text) {
  if (text == "demuon") return Algorithm::demuon;
  if (text == "dsgd") return Algorithm::dsgd;
  if (text == "dsgd_clip") return Algorithm::dsgd_clip;
  if (text == "gt_nsgdm") return Algorithm::gt_nsgdm;
  throw DomainError("unknown algorithm '" + text + "' (expected demuon, dsgd, dsgd_clip or gt_nsgdm)");
}

bool has_trackers(Algorithm algorithm) {
  return algorithm == Algorithm::demuon || algorithm == Algorithm::gt_nsgdm;
}

void ScheduleParams::validate() const {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw DomainError("eta must be positive");
  if (!(theta > 0.0 && theta < 1.0)) throw DomainError("theta must lie in (0,1)");
  if (horizon < 1) throw DomainError("horizon must be >= 1");
  if (!(alpha > 1.0 && alpha <= 2.0)) throw DomainError("alpha must lie in (1,2]");
  if (derived_from_theorem && horizon < 4) throw DomainError("theorem schedule requires K >= 4");
}

ScheduleParams theoretical_schedule(std::uint64_t horizon, double alpha) {
  if (horizon < 4) throw DomainError("theorem schedule requires K >= 4, got " + std::to_string(horizon));
  if (!(alpha > 1.0 && alpha <= 2.0)) throw DomainError("alpha must lie in (1,2]");
  const double k = static_cast<double>(horizon);
  const double denom = 3.0 * alpha - 2.0;
  ScheduleParams s;
  s.eta = std::pow(k, -(2.0 * alpha - 1.0) / denom);
  s.theta = std::pow(k, -alpha / denom);
  s.horizon = horizon;
  s.alpha = alpha;
  s.derived_from_theorem = true;
  return s;
}

void BaselineParams::validate() const {
  if (!(dsgd_eta > 0.0)) throw DomainError("dsgd_eta must be positive");
  if (!(clip_eta > 0.0)) throw DomainError("clip_eta must be positive");
  if (!(clip_tau > 0.0)) throw DomainError("clip_tau must be positive");
  if (!(gt_eta > 0.0)) throw DomainError("gt_eta must be positive");
  if (!(gt_theta > 0.0 && gt_theta < 1.0)) throw DomainError("gt_theta must lie in (0,1)");
}

Matrix clip_frobenius(const Matrix& g, double tau) {
  const double norm = frobenius_norm(g);
  if (norm <= tau) return g;
  return g * (tau / norm);
}

RunState RunState::initial(Algorithm algorithm, const Problem& problem, const Matrix& start,
                           Orthogonalizer orthogonalizer) {
  problem.check_point(start);
  RunState s;
  s.algorithm = algorithm;
  s.orthogonalizer = orthogonalizer;
  s.x.assign(problem.nodes(), start);
  if (has_trackers(algorithm)) {
    const Matrix zero(problem.rows(), problem.cols());
    s.m.assign(problem.nodes(), zero);
    s.v.assign(problem.nodes(), zero);
    s.m_prev.assign(problem.nodes(), zero);
  }
  return s;
}

namespace {

void check_state(const RunState& s, const StepContext& ctx, Algorithm expected) {
  if (s.algorithm != expected) {
    throw DomainError("state belongs to " + to_string(s.algorithm) + ", not " + to_string(expected));
  }
  if (s.nodes() != ctx.problem.nodes() || s.nodes() != ctx.mixing.nodes()) {
    throw DimensionMismatch("state has " + std::to_string(s.nodes()) + " nodes, problem " +
                            std::to_string(ctx.problem.nodes()) + ", mixing " + std::to_string(ctx.mixing.nodes()));
  }
  if (has_trackers(expected) && (s.m.size() != s.nodes() || s.v.size() != s.nodes())) {
    throw DimensionMismatch("tracker state is incomplete");
  }
}

using DirectionFn = std::function<Matrix(const Matrix&)>;

// Shared X stage: X_i^{k+1} = sum_j w_ij (X_j^k - eta D_j).
void mix_iterates(RunState& next, const RunState& s, const StepContext& ctx, double eta) {
  const std::size_t n = s.nodes();
  std::vector<Matrix> pre(n);
  ctx.executor.for_each_node(n, [&](std::size_t j) {
    pre[j] = s.x[j];
    pre[j].add_scaled(-eta, next.direction[j]);
  });
  next.x.assign(n, Matrix{});
  ctx.executor.for_each_node(n, [&](std::size_t i) { next.x[i] = ctx.mixing.mix_row(i, pre); });
}

RunState tracked_step(const RunState& s, const StepContext& ctx, double eta, double theta, const DirectionFn& dir) {
  const std::size_t n = s.nodes();
  const std::uint64_t k = s.iter;
  RunState next;
  next.iter = k + 1;
  next.algorithm = s.algorithm;
  next.orthogonalizer = s.orthogonalizer;
  next.m_prev = s.m;
  next.m.assign(n, Matrix{});
  next.v.assign(n, Matrix{});
  next.direction.assign(n, Matrix{});
  next.last_step_size = eta;

  // M stage, plus the local tracker increment V_j^{k-1} + M_j^k - M_j^{k-1}.
  std::vector<Matrix> increment(n);
  ctx.executor.for_each_node(n, [&](std::size_t i) {
    const Matrix g = stochastic_gradient(ctx.problem, i, s.x[i], ctx.noise, k);
    Matrix mi = s.m[i] * (1.0 - theta);
    mi.add_scaled(theta, g);
    increment[i] = s.v[i] + mi - s.m[i];
    next.m[i] = std::move(mi);
  });
  // V stage.
  ctx.executor.for_each_node(n, [&](std::size_t i) { next.v[i] = ctx.mixing.mix_row(i, increment); });
  // X stage.
  ctx.executor.for_each_node(n, [&](std::size_t j) { next.direction[j] = dir(next.v[j]); });
  mix_iterates(next, s, ctx, eta);
  return next;
}

RunState gradient_step(const RunState& s, const StepContext& ctx, double eta, double tau) {
  const std::size_t n = s.nodes();
  const std::uint64_t k = s.iter;
  RunState next;
  next.iter = k + 1;
  next.algorithm = s.algorithm;
  next.orthogonalizer = s.orthogonalizer;
  next.direction.assign(n, Matrix{});
  next.last_step_size = eta;
  next.last_clip_threshold = tau;
  ctx.executor.for_each_node(n, [&](std::size_t j) {
    Matrix g = stochastic_gradient(ctx.problem, j, s.x[j], ctx.noise, k);
    next.direction[j] = tau > 0.0 ? clip_frobenius(g, tau) : std::move(g);
  });
  mix_iterates(next, s, ctx, eta);
  return next;
}

double clip_threshold(std::uint64_t k, const BaselineParams& params) {
  return params.clip_tau * std::pow(static_cast<double>(k + 1), 0.4);
}

}  // namespace

RunState demuon_step(const RunState& state, const StepContext& ctx, const ScheduleParams& schedule) {
  check_state(state, ctx, Algorithm::demuon);
  const Orthogonalizer orth = state.orthogonalizer;
  return tracked_step(state, ctx, schedule.eta, schedule.theta, [orth](const Matrix& v) { return orth.apply(v); });
}

RunState gt_nsgdm_step(const RunState& state, const StepContext& ctx, const BaselineParams& params) {
  check_state(state, ctx, Algorithm::gt_nsgdm);
  return tracked_step(state, ctx, params.gt_eta, params.gt_theta, [](const Matrix& v) {
    const double norm = frobenius_norm(v);
    return norm == 0.0 ? Matrix(v.rows(), v.cols()) : v * (1.0 / norm);
  });
}

RunState dsgd_step(const RunState& state, const StepContext& ctx, const BaselineParams& params) {
  check_state(state, ctx, Algorithm::dsgd);
  return gradient_step(state, ctx, params.dsgd_eta, 0.0);
}

RunState dsgd_clip_step(const RunState& state, const StepContext& ctx, const BaselineParams& params) {
  check_state(state, ctx, Algorithm::dsgd_clip);
  const std::uint64_t k = state.iter;
  return gradient_step(state, ctx, step_size(Algorithm::dsgd_clip, k, {}, params), clip_threshold(k, params));
}

RunState step(const RunState& state, const StepContext& ctx, const ScheduleParams& schedule,
              const BaselineParams& baselines) {
  switch (state.algorithm) {
    case Algorithm::demuon: return demuon_step(state, ctx, schedule);
    case Algorithm::dsgd: return dsgd_step(state, ctx, baselines);
    case Algorithm::dsgd_clip: return dsgd_clip_step(state, ctx, baselines);
    case Algorithm::gt_nsgdm: return gt_nsgdm_step(state, ctx, baselines);
  }
  throw DomainError("unknown algorithm");
}

double step_size(Algorithm algorithm, std::uint64_t k, const ScheduleParams& schedule,
                 const BaselineParams& baselines) {
  switch (algorithm) {
    case Algorithm::demuon: return schedule.eta;
    case Algorithm::dsgd: return baselines.dsgd_eta;
    case Algorithm::dsgd_clip: return baselines.clip_eta / static_cast<double>(k + 1);
    case Algorithm::gt_nsgdm: return baselines.gt_eta;
  }
  return 0.0;
}

namespace {

constexpr std::uint64_t kIotaStream = 0x696f74615f4bULL;  // "iota_K"

bool all_finite(const std::vector<Matrix>& blocks) {
  for (const Matrix& b : blocks)
    if (!b.is_finite()) return false;
  return true;
}

}  // namespace

RunResult run(const Problem& problem, const MixingSpec& mixing, const NoiseModel& noise_in, const RunOptions& options,
              MetricsSink& sink) {
  options.schedule.validate();
  options.baselines.validate();
  noise_in.validate();
  if (problem.nodes() != mixing.nodes()) {
    throw DimensionMismatch("problem has " + std::to_string(problem.nodes()) + " nodes but mixing matrix has " +
                            std::to_string(mixing.nodes()));
  }
  NoiseModel noise = noise_in;
  noise.base_seed = options.seed;
  const Executor executor(options.workers);
  const StepContext ctx{problem, mixing, noise, executor};
  const std::uint64_t horizon = options.schedule.horizon;
  const Algorithm alg = options.algorithm;
  const double lambda = mixing.mixing_rate();
  const std::size_t n = problem.nodes();
  const double radius = problem.certified_radius();

  RunResult result;
  if (has_trackers(alg)) {
    const double eta = alg == Algorithm::demuon ? options.schedule.eta : options.baselines.gt_eta;
    result.potential_params = theorem_potential_params(horizon, options.schedule.alpha, eta, lambda);
  }

  RunState state = RunState::initial(alg, problem, options.start.value_or(problem.default_start()),
                                     options.orthogonalizer);
  std::vector<double> grad_nuclear;
  grad_nuclear.reserve(horizon);

  for (std::uint64_t k = 0; k < horizon; ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    RunState next;
    try {
      next = step(state, ctx, options.schedule, options.baselines);
    } catch (const NumericalFailure& e) {
      throw NumericalFailure("round " + std::to_string(k) + ": " + e.what(), static_cast<std::int64_t>(k));
    }
    if (!all_finite(next.x)) {
      throw NumericalFailure("round " + std::to_string(k) + ": iterate became non-finite",
                             static_cast<std::int64_t>(k));
    }
    const auto t1 = std::chrono::steady_clock::now();

    MetricsRow row;
    row.iter = k;
    row.consensus_error_x = consensus_error(state.x);
    row.consensus_bound = consensus_bound(step_size(alg, k, options.schedule, options.baselines), lambda, n);
    row.avg_grad_nuclear = nuclear_norm(problem.average_gradient(state.x));
    row.objective_at_mean = problem.objective(mean(state.x));
    if (has_trackers(alg)) {
      row.tracking_residual = frobenius_norm(mean(next.v) - mean(next.m));
      row.consensus_error_v = consensus_error_nuclear(next.v);
      if (options.compute_potential) row.potential = potential(problem, state.x, next.m, next.v, result.potential_params);
    }
    if (options.record_wall_time) row.wall_time_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();

    if (alg == Algorithm::demuon && row.consensus_error_x > row.consensus_bound + kConsensusSlack) {
      ++result.consensus_violations;
    }
    if (std::isfinite(radius)) {
      bool outside = false;
      for (const Matrix& xi : state.x) outside = outside || spectral_norm(xi) > radius;
      if (outside && result.ball_exits++ == 0) {
        result.warnings.push_back("round " + std::to_string(k) +
                                  ": iterates left the ball on which L_* is certified (radius " +
                                  std::to_string(radius) + ")");
      }
    }
    grad_nuclear.push_back(row.avg_grad_nuclear);
    sink.append(row);
    state = std::move(next);
  }

  result.iterations = horizon;
  std::mt19937_64 rng(stream_seed(options.seed, kIotaStream, horizon));
  result.iota = std::uniform_int_distribution<std::uint64_t>(0, horizon - 1)(rng);
  result.grad_at_iota = grad_nuclear[result.iota];
  double sum = 0.0;
  for (double g : grad_nuclear) sum += g;
  result.running_average_grad = sum / static_cast<double>(horizon);
  result.initial_avg_grad = grad_nuclear.front();
  result.final_avg_grad = grad_nuclear.back();
  result.final_state = std::move(state);
  return result;
}

}  // namespace declab
