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

// declab: run, sweep, compare and validate experiment configs.
//
// Exit status is 0 on success, 2 for a rejected config and 1 for any other
// failure; failures print a JSON error object on stderr.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "declab/errors.hpp"
#include "declab/experiment.hpp"
#include "declab/text_io.hpp"

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> orthogonalizer;
  std::optional<std::size_t> workers;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--seed", seed, "Master seed (replaces run.seed and run.seeds)");
    cmd.add_option("--out-dir", out_dir, "Output directory for artifacts");
    cmd.add_option("--orthogonalizer", orthogonalizer, "svd or ns:<iters>");
    cmd.add_option("--workers", workers, "Worker threads (nodes per run, or runs in a sweep)");
  }

  declab::ExperimentConfig load(const std::string& path) const {
    declab::ExperimentConfig c = declab::load_config(path);
    if (seed) {
      c.seed = *seed;
      c.seeds.clear();
    }
    if (out_dir) c.out_dir = *out_dir;
    if (orthogonalizer) {
      try {
        c.orthogonalizer = declab::Orthogonalizer::parse(*orthogonalizer);
      } catch (const std::exception& e) {
        throw declab::ConfigError("--orthogonalizer", e.what());
      }
    }
    if (workers) c.workers = *workers;
    c.validate();
    return c;
  }
};

int fail(const std::exception& e) {
  std::cerr << declab::error_json(e) << "\n";
  const bool config = dynamic_cast<const declab::ConfigError*>(&e) || dynamic_cast<const declab::ParseError*>(&e);
  return config ? 2 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decentralized matrix optimization laboratory"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(declab::version_hash()));

  Overrides overrides;
  std::string config_path;
  std::vector<std::string> config_paths;

  CLI::App* run_cmd = app.add_subcommand("run", "Execute one run and write its metrics and summary");
  run_cmd->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  overrides.add_to(*run_cmd);

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Run every horizon in run.sweep for every seed in run.seeds");
  sweep_cmd->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  overrides.add_to(*sweep_cmd);

  CLI::App* compare_cmd = app.add_subcommand("compare", "Run several configs and align their metrics");
  compare_cmd->add_option("configs", config_paths, "Config files")->required()->check(CLI::ExistingFile);
  overrides.add_to(*compare_cmd);

  CLI::App* validate_cmd = app.add_subcommand("validate", "Check a config and build its problem and topology");
  validate_cmd->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  overrides.add_to(*validate_cmd);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      const declab::RunArtifacts art = declab::execute(overrides.load(config_path));
      std::cout << art.metrics_csv.string() << "\n" << art.summary_json.string() << "\n";
    } else if (*sweep_cmd) {
      const declab::SweepReport report = declab::sweep(overrides.load(config_path));
      for (const declab::SweepPoint& p : report.points) {
        std::cout << "K=" << p.horizon << " mean_running_average_grad="
                  << declab::format_double(p.mean_running_average_grad) << "\n";
      }
      if (report.log_log_slope) std::cout << "log_log_slope=" << declab::format_double(*report.log_log_slope) << "\n";
      std::cout << report.summary_json.string() << "\n";
    } else if (*compare_cmd) {
      std::vector<declab::ExperimentConfig> configs;
      for (const std::string& p : config_paths) configs.push_back(overrides.load(p));
      std::cout << declab::compare(configs).string() << "\n";
    } else if (*validate_cmd) {
      const declab::ExperimentConfig c = overrides.load(config_path);
      const declab::Instance inst = declab::build_instance(c);
      std::cout << "ok: " << inst.problem.nodes() << " nodes, " << inst.problem.rows() << "x" << inst.problem.cols()
                << ", lambda=" << declab::format_double(inst.mixing.mixing_rate()) << "\n";
    }
  } catch (const std::exception& e) {
    return fail(e);
  }
  return 0;
}
