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
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "declab/errors.hpp"
#include "declab/experiment.hpp"
#include "declab/text_io.hpp"
#include "doctest.h"

using namespace declab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("declab_test_experiment_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::size_t line_count(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

std::string config_key_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "";
}

const char* kMinimal = "[run]\nalgorithm = demuon\nhorizon = 8\n[topology]\nfamily = ring\nnodes = 4\n";

}  // namespace

TEST_CASE("minimal config gets the documented defaults") {
  const ExperimentConfig c = parse_config(kMinimal);
  CHECK(c.algorithm == Algorithm::demuon);
  CHECK(c.horizon == 8);
  CHECK(c.topology.family == TopologyFamily::ring);
  CHECK(c.topology.nodes == 4);
  CHECK(c.eta == 0.1);
  CHECK(c.theta == 0.2);
  CHECK(c.baselines.dsgd_eta == 0.01);
  CHECK(c.baselines.clip_eta == 10.0);
  CHECK(c.baselines.clip_tau == 0.1);
  CHECK(c.baselines.gt_eta == 0.1);
  CHECK(c.baselines.gt_theta == 0.2);
  CHECK(c.schedule_mode == ScheduleMode::constant);
  CHECK(c.orthogonalizer.kind == Orthogonalizer::Kind::exact_svd);
  CHECK(c.workers == 1);
}

TEST_CASE("config validation names the key") {
  try {
    parse_config(std::string(kMinimal) + "[schedule]\ntheta = 1.2\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "schedule.theta");
    CHECK(std::string(e.what()).find("theta must lie in (0,1)") != std::string::npos);
  }
  CHECK(config_key_of("[run]\nhorizon = 3\n[schedule]\nmode = theorem\n") == "run.horizon");
  CHECK(config_key_of("[run]\nsweep = 16, 2\n[schedule]\nmode = theorem\n") == "run.sweep");
  CHECK(config_key_of("[run]\nhorizon = 8\ncolour = red\n") == "run.colour");
  CHECK(config_key_of("[runs]\nhorizon = 8\n") == "runs");
  CHECK(config_key_of("[run]\nhorizon = -3\n") == "run.horizon");
  CHECK(config_key_of("[run]\nalgorithm = adam\n") == "run.algorithm");
  CHECK(config_key_of("[run]\northogonalizer = ns:0\n") == "run.orthogonalizer");
  CHECK(config_key_of("[topology]\nfamily = ring\nnodes = 2\n") == "topology.nodes");
  CHECK(config_key_of("[topology]\nfamily = directed_exponential\nnodes = 6\n") == "topology.nodes");
  CHECK(config_key_of("[topology]\nfamily = custom\n") == "topology.path");
  CHECK(config_key_of("[noise]\nfamily = gaussian\nalpha = 1.5\n") == "noise.alpha");
  CHECK(config_key_of("[noise]\nfamily = student_t\nalpha = 1.5\ndof = 1.2\n") == "noise.dof");
  CHECK(config_key_of("[baselines]\ngt_theta = 0\n") == "baselines.gt_theta");
  CHECK(config_key_of("[run]\ntiming = maybe\n") == "run.timing");
  CHECK(config_key_of("[run]\nsweep = 16, x\n") == "run.sweep");
  CHECK_THROWS_AS(parse_config("[run\nhorizon = 3\n"), ParseError);
  CHECK_THROWS_AS(parse_config("[run]\nhorizon = 3\nhorizon = 4\n"), ParseError);
}

TEST_CASE("config round trip") {
  const ExperimentConfig c = parse_config(
      "[run]\nname = trial\nalgorithm = gt_nsgdm\nhorizon = 64\nseed = 3\nseeds = 1, 2\nsweep = 16, 64, 256\n"
      "orthogonalizer = ns:12\nworkers = 2\ntiming = true\n"
      "[topology]\nfamily = directed_exponential\nnodes = 8\n"
      "[problem]\nkind = nonconvex_gram\nm = 5\nn = 2\nradius = 4\nheterogeneity = 0.25\nseed = 9\n"
      "[noise]\nfamily = student_t\nalpha = 1.5\nscale = 0.1\ndof = 1.8\n"
      "[schedule]\nmode = theorem\n"
      "[baselines]\ngt_eta = 0.05\n");
  CHECK(c.schedule_alpha == 1.5);  // follows the noise alpha unless set
  CHECK(c.sweep == std::vector<std::uint64_t>{16, 64, 256});
  CHECK(c.orthogonalizer.newton_schulz.iters == 12);
  const ExperimentConfig again = parse_config(config_to_ini(c));
  CHECK(config_to_ini(again) == config_to_ini(c));
  CHECK(again.schedule_for(16).eta == doctest::Approx(std::pow(16.0, -0.8)));
  CHECK(again.schedule_for(16).derived_from_theorem);
}

TEST_CASE("relative paths resolve against the config directory") {
  const fs::path dir = scratch("paths");
  {
    std::ofstream(dir / "w.csv") << "0.5,0.5\n0.5,0.5\n";
    std::ofstream(dir / "p.txt") << "quadratic 3 1 1 1\n1\n0\n1\n1\n1\n2\n";
    std::ofstream(dir / "c.ini") << "[run]\nhorizon = 4\n[topology]\nfamily = custom\npath = w.csv\n"
                                 << "[problem]\npath = p.txt\n";
  }
  const ExperimentConfig c = load_config(dir / "c.ini");
  CHECK(c.topology.path == dir / "w.csv");
  try {
    build_instance(c);
    FAIL("expected a node-count mismatch");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "problem.path");
  }
  std::ofstream(dir / "p.txt") << "quadratic 2 1 1 1\n1\n0\n1\n2\n";
  const Instance inst = build_instance(c);
  CHECK(inst.problem.nodes() == 2);
  CHECK(inst.problem.origin() == (dir / "p.txt").string());
  CHECK(inst.mixing.family() == TopologyFamily::custom);
}

TEST_CASE("run artifacts") {
  ExperimentConfig c = parse_config(kMinimal);
  c.out_dir = scratch("run");
  c.noise.scale = 0.3;
  c.seed = 11;
  const RunArtifacts a = execute(c);
  CHECK(a.id == "demuon_K8_s11");
  CHECK(line_count(a.metrics_csv) == 9);
  const std::string csv = read_file(a.metrics_csv);
  CHECK(csv.rfind(std::string(kMetricsCsvHeader) + "\n", 0) == 0);

  const auto summary = nlohmann::json::parse(read_file(a.summary_json));
  const auto iota = summary["results"]["iota"].get<std::uint64_t>();
  CHECK(iota < 8);
  CHECK(summary["results"]["consensus_violations"] == 0);
  CHECK(summary["topology"]["mixing_rate"].get<double>() == doctest::Approx(1.0 / 3.0));
  CHECK(summary["noise"]["empirical_alpha_moment"].get<double>() > 0.0);
  CHECK(summary["theory"]["u_dm"].get<double>() > 0.0);
  CHECK(summary["version"].get<std::string>() == version_hash());
  CHECK(summary["config"]["run"]["horizon"] == "8");

  // The iota row of the CSV carries the reported metric.
  std::istringstream rows(csv);
  std::string line;
  for (std::uint64_t k = 0; k <= iota + 1; ++k) std::getline(rows, line);
  CHECK(line.rfind(std::to_string(iota) + ",", 0) == 0);
  std::vector<std::string> fields;
  std::istringstream cells(line);
  for (std::string cell; std::getline(cells, cell, ',');) fields.push_back(cell);
  CHECK(parse_double(fields.at(3), 0) == summary["results"]["grad_at_iota"].get<double>());

  const std::string first_summary = read_file(a.summary_json);
  execute(c);
  CHECK(read_file(a.metrics_csv) == csv);
  CHECK(read_file(a.summary_json) == first_summary);
  c.workers = 4;
  execute(c);
  CHECK(read_file(a.metrics_csv) == csv);
}

TEST_CASE("failed runs leave an error file") {
  ExperimentConfig c = parse_config("[run]\nalgorithm = dsgd\nhorizon = 20\n[topology]\nfamily = complete\nnodes = 2\n"
                                    "[baselines]\ndsgd_eta = 1e200\n[problem]\nkind = nonconvex_gram\nm = 3\nn = 2\n");
  c.out_dir = scratch("error");
  CHECK_THROWS_AS(execute(c), NumericalFailure);
  const fs::path err = c.out_dir / "error_dsgd_K20_s0.json";
  REQUIRE(fs::exists(err));
  const auto j = nlohmann::json::parse(read_file(err));
  CHECK(j["error"]["type"] == "numerical_failure");
}

TEST_CASE("sweep schedules one run per horizon and seed") {
  ExperimentConfig c = parse_config("[run]\nsweep = 16, 64, 256\nseeds = 1, 2\nworkers = 3\n"
                                    "[topology]\nfamily = ring\nnodes = 4\n[schedule]\nmode = theorem\n");
  c.out_dir = scratch("sweep");
  const SweepReport r = sweep(c);
  REQUIRE(r.points.size() == 3);
  for (const SweepPoint& p : r.points) {
    CHECK(p.running_average_grad.size() == 2);
    for (std::uint64_t s : {1, 2}) {
      const fs::path csv = c.out_dir / ("metrics_demuon_K" + std::to_string(p.horizon) + "_s" + std::to_string(s) + ".csv");
      CHECK(line_count(csv) == p.horizon + 1);
    }
  }
  REQUIRE(r.log_log_slope.has_value());
  CHECK(std::isfinite(*r.log_log_slope));
  const auto j = nlohmann::json::parse(read_file(r.summary_json));
  CHECK(j["points"].size() == 3);
  CHECK(j["points"][2]["horizon"] == 256);
}

TEST_CASE("log_log_slope") {
  CHECK(log_log_slope({16, 64, 256}, {1.0, 0.5, 0.25}) == doctest::Approx(-0.5));
  CHECK(log_log_slope({2, 8}, {3.0, 3.0}) == doctest::Approx(0.0));
  CHECK_THROWS_AS(log_log_slope({1}, {1}), DomainError);
  CHECK_THROWS_AS(log_log_slope({1, 1}, {1, 2}), DomainError);
  CHECK_THROWS_AS(log_log_slope({1, 2}, {0, 2}), DomainError);
}

TEST_CASE("compare") {
  const fs::path out = scratch("compare");
  std::vector<ExperimentConfig> configs;
  for (const char* alg : {"demuon", "dsgd", "dsgd_clip", "gt_nsgdm"}) {
    ExperimentConfig c = parse_config(std::string("[run]\nhorizon = 12\nalgorithm = ") + alg +
                                      "\n[topology]\nfamily = ring\nnodes = 8\n[noise]\nscale = 0.1\n");
    c.out_dir = out;
    configs.push_back(c);
  }
  CHECK_THROWS_AS(compare({configs[0]}), ConfigError);
  const fs::path two = compare({configs[0], configs[1]});
  CHECK(two.filename() == "compare_demuon_vs_dsgd.csv");
  const fs::path four = compare(configs);
  std::ifstream in(four);
  std::string header;
  std::getline(in, header);
  CHECK(header ==
        "iter,demuon_avg_grad_nuclear,dsgd_avg_grad_nuclear,dsgd_clip_avg_grad_nuclear,gt_nsgdm_avg_grad_nuclear,"
        "demuon_objective_at_mean,dsgd_objective_at_mean,dsgd_clip_objective_at_mean,gt_nsgdm_objective_at_mean");
  CHECK(line_count(four) == 13);

  ExperimentConfig other = configs[1];
  other.topology.family = TopologyFamily::complete;
  CHECK_THROWS_AS(compare({configs[0], other}), ConfigError);
  other = configs[1];
  other.problem.seed = 99;
  CHECK_THROWS_AS(compare({configs[0], other}), ConfigError);
  other = configs[1];
  other.seed = 5;
  CHECK_THROWS_AS(compare({configs[0], other}), ConfigError);

  // Two DeMuon configs differing only in the orthogonalizer get distinct columns.
  ExperimentConfig ns = configs[0];
  ns.orthogonalizer = Orthogonalizer::ns(10);
  const fs::path dup = compare({configs[0], ns});
  CHECK(dup.filename() == "compare_demuon_vs_demuon_2.csv");
}

TEST_CASE("error_json") {
  const auto type_of = [](const std::exception& e) {
    return nlohmann::json::parse(error_json(e))["error"]["type"].get<std::string>();
  };
  CHECK(type_of(ConfigError("run.horizon", "bad")) == "config_error");
  CHECK(nlohmann::json::parse(error_json(ConfigError("run.horizon", "bad")))["error"]["key"] == "run.horizon");
  CHECK(type_of(ParseError("x", 3)) == "parse_error");
  CHECK(type_of(DimensionMismatch("x")) == "dimension_mismatch");
  CHECK(type_of(InvalidMixing("x")) == "invalid_mixing");
  CHECK(type_of(DomainError("x")) == "domain_error");
  CHECK(type_of(NumericalFailure("x", 4)) == "numerical_failure");
  CHECK(type_of(std::runtime_error("x")) == "error");
}
