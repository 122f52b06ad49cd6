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

// Experiment configs and the artifacts written for them.
//
// Configs are INI text (see docs/config.md). A run writes
// metrics_<runid>.csv and summary_<runid>.json into the output directory;
// both are byte-identical for a fixed config and seed.

#ifndef DECLAB_EXPERIMENT_HPP_
#define DECLAB_EXPERIMENT_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "declab/linalg.hpp"
#include "declab/noise.hpp"
#include "declab/optimizers.hpp"
#include "declab/problems.hpp"
#include "declab/topology.hpp"

namespace declab {

struct TopologyConfig {
  TopologyFamily family = TopologyFamily::ring;
  std::size_t nodes = 4;
  std::filesystem::path path;  // custom family only
};

struct ProblemConfig {
  ProblemKind kind = ProblemKind::quadratic;
  std::size_t rows = 6;
  std::size_t cols = 4;
  std::size_t data_rows = 8;
  double heterogeneity = 0.0;
  double condition = 4.0;
  double target_norm = 1.0;
  double radius = 3.0;
  std::uint64_t seed = 1;
  std::filesystem::path path;  // when set, dimensions come from the file
};

enum class ScheduleMode { constant, theorem };

std::string to_string(ScheduleMode mode);

struct ExperimentConfig {
  std::string name;  // optional label used in run ids and comparison columns
  Algorithm algorithm = Algorithm::demuon;
  std::uint64_t horizon = 100;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> seeds;  // sweep only; defaults to {seed}
  std::vector<std::uint64_t> sweep;  // K values; defaults to {horizon}
  std::filesystem::path out_dir = "results";
  Orthogonalizer orthogonalizer{};
  std::size_t workers = 1;
  bool timing = false;
  double target_epsilon = 0.1;
  std::size_t moment_draws = 2000;

  TopologyConfig topology{};
  ProblemConfig problem{};
  NoiseModel noise{};

  ScheduleMode schedule_mode = ScheduleMode::constant;
  double schedule_alpha = 2.0;
  double eta = 0.1;
  double theta = 0.2;
  BaselineParams baselines{};

  // DeMuon schedule for a horizon K: theorem values or the constant eta/theta.
  ScheduleParams schedule_for(std::uint64_t horizon) const;
  // Throws ConfigError naming the offending key.
  void validate() const;
};

// Relative input paths resolve against `base_dir`; out_dir does not. Unknown
// sections or keys are rejected. Throws ParseError or ConfigError.
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

// Canonical INI rendering; parse_config(config_to_ini(c)) reproduces c.
std::string config_to_ini(const ExperimentConfig& config);

struct Instance {
  Problem problem;
  MixingSpec mixing;
};

Instance build_instance(const ExperimentConfig& config);

// "<name or algorithm>_K<horizon>_s<seed>"
std::string run_id(const ExperimentConfig& config, std::uint64_t horizon, std::uint64_t seed);

struct RunArtifacts {
  std::string id;
  std::filesystem::path metrics_csv;
  std::filesystem::path summary_json;
  RunResult result;
};

// One run at (horizon, seed). Creates the output directory if needed.
RunArtifacts execute_run(const ExperimentConfig& config, std::uint64_t horizon, std::uint64_t seed);
RunArtifacts execute(const ExperimentConfig& config);

struct SweepPoint {
  std::uint64_t horizon = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<double> running_average_grad;  // one per seed
  double mean_running_average_grad = 0.0;
  double mean_grad_at_iota = 0.0;
};

struct SweepReport {
  std::vector<SweepPoint> points;
  // Least-squares slope of log(mean running average) on log K; empty with
  // fewer than two horizons.
  std::optional<double> log_log_slope;
  std::filesystem::path summary_json;
};

// Runs every (K, seed) pair, `workers` runs at a time, then writes
// sweep_<name or algorithm>.json.
SweepReport sweep(const ExperimentConfig& config);

// Least-squares slope of log y on log x.
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

// Runs each config (they must agree on problem, topology, seed and horizon)
// and writes an aligned CSV with avg_grad_nuclear and objective_at_mean per
// config. Returns the CSV path.
std::filesystem::path compare(const std::vector<ExperimentConfig>& configs);

// {"error": {"type": ..., "message": ...[, "key": ...]}}
std::string error_json(const std::exception& e);

const char* version_hash();

}  // namespace declab

#endif  // DECLAB_EXPERIMENT_HPP_
