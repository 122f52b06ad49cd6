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

#include "declab/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <nlohmann/json.hpp>

#include "declab/diagnostics.hpp"
#include "declab/errors.hpp"
#include "declab/executor.hpp"
#include "declab/text_io.hpp"

#ifndef DECLAB_VERSION_HASH
#define DECLAB_VERSION_HASH "unknown"
#endif

namespace declab {

namespace pt = boost::property_tree;
using Json = nlohmann::ordered_json;

const char* version_hash() { return DECLAB_VERSION_HASH; }

std::string to_string(ScheduleMode mode) { return mode == ScheduleMode::theorem ? "theorem" : "constant"; }

ScheduleParams ExperimentConfig::schedule_for(std::uint64_t k) const {
  if (schedule_mode == ScheduleMode::theorem) return theoretical_schedule(k, schedule_alpha);
  ScheduleParams s;
  s.eta = eta;
  s.theta = theta;
  s.horizon = k;
  s.alpha = schedule_alpha;
  return s;
}

namespace {

// ---- config text -----------------------------------------------------------

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"run",
       {"name", "algorithm", "horizon", "seed", "seeds", "sweep", "out_dir", "orthogonalizer", "workers", "timing",
        "target_epsilon", "moment_draws"}},
      {"topology", {"family", "nodes", "path"}},
      {"problem", {"kind", "m", "n", "p", "heterogeneity", "condition", "target_norm", "radius", "seed", "path"}},
      {"noise", {"family", "alpha", "scale", "dof"}},
      {"schedule", {"mode", "alpha", "eta", "theta"}},
      {"baselines", {"dsgd_eta", "clip_eta", "clip_tau", "gt_eta", "gt_theta"}},
  };
  return keys;
}

class Reader {
 public:
  Reader(const pt::ptree& tree, std::filesystem::path base) : tree_(tree), base_(std::move(base)) {}

  std::optional<std::string> raw(const std::string& section, const std::string& key) const {
    const auto sec = tree_.get_child_optional(section);
    if (!sec) return std::nullopt;
    const auto value = sec->get_optional<std::string>(key);
    if (!value) return std::nullopt;
    return std::string(trim(*value));
  }

  template <typename F>
  void with(const std::string& section, const std::string& key, F&& apply) const {
    const auto value = raw(section, key);
    if (!value) return;
    try {
      apply(*value);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(section + "." + key, e.what());
    }
  }

  void text(const std::string& s, const std::string& k, std::string& out) const {
    with(s, k, [&](const std::string& v) { out = v; });
  }
  void real(const std::string& s, const std::string& k, double& out) const {
    with(s, k, [&](const std::string& v) { out = parse_real(v); });
  }
  template <typename Int>
  void count(const std::string& s, const std::string& k, Int& out) const {
    with(s, k, [&](const std::string& v) { out = static_cast<Int>(parse_count(v)); });
  }
  void flag(const std::string& s, const std::string& k, bool& out) const {
    with(s, k, [&](const std::string& v) {
      if (v == "true" || v == "yes" || v == "1") out = true;
      else if (v == "false" || v == "no" || v == "0") out = false;
      else throw DomainError("expected true or false, got '" + v + "'");
    });
  }
  void counts(const std::string& s, const std::string& k, std::vector<std::uint64_t>& out) const {
    with(s, k, [&](const std::string& v) {
      out.clear();
      std::stringstream ss(v);
      std::string item;
      while (std::getline(ss, item, ',')) out.push_back(parse_count(std::string(trim(item))));
      if (out.empty()) throw DomainError("expected a comma-separated list of integers");
    });
  }
  // Input files resolve against the config directory; the output directory
  // stays relative to the working directory.
  void path(const std::string& s, const std::string& k, std::filesystem::path& out, bool input = true) const {
    with(s, k, [&](const std::string& v) {
      if (v.empty()) throw DomainError("empty path");
      const std::filesystem::path p(v);
      out = p.is_absolute() || base_.empty() || !input ? p : base_ / p;
    });
  }

 private:
  static double parse_real(const std::string& v) {
    try {
      return parse_double(v, 0);
    } catch (const ParseError&) {
      throw DomainError("expected a finite number, got '" + v + "'");
    }
  }
  static std::uint64_t parse_count(const std::string& v) {
    std::uint64_t out = 0;
    const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || end != v.data() + v.size() || v.empty()) {
      throw DomainError("expected a nonnegative integer, got '" + v + "'");
    }
    return out;
  }

  const pt::ptree& tree_;
  std::filesystem::path base_;
};

void check_keys(const pt::ptree& tree) {
  for (const auto& [section, node] : tree) {
    const auto it = known_keys().find(section);
    if (it == known_keys().end()) {
      if (node.empty()) throw ConfigError(section, "keys must appear inside a [section]");
      throw ConfigError(section, "unknown section");
    }
    for (const auto& [key, value] : node) {
      if (!it->second.contains(key)) throw ConfigError(section + "." + key, "unknown key");
    }
  }
}

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError(key, what);
}

}  // namespace

void ExperimentConfig::validate() const {
  const bool theorem = schedule_mode == ScheduleMode::theorem;
  require(horizon >= 1, "run.horizon", "horizon must be >= 1");
  require(!theorem || horizon >= 4, "run.horizon", "theorem schedule requires K >= 4");
  for (std::uint64_t k : sweep) {
    require(k >= 1, "run.sweep", "horizons must be >= 1");
    require(!theorem || k >= 4, "run.sweep", "theorem schedule requires K >= 4, got " + std::to_string(k));
  }
  require(workers >= 1, "run.workers", "workers must be >= 1");
  require(target_epsilon > 0.0 && target_epsilon < 1.0, "run.target_epsilon", "target_epsilon must lie in (0,1)");
  require(orthogonalizer.kind != Orthogonalizer::Kind::newton_schulz || orthogonalizer.newton_schulz.iters >= 1,
          "run.orthogonalizer", "Newton-Schulz needs at least one iteration");

  switch (topology.family) {
    case TopologyFamily::complete: require(topology.nodes >= 1, "topology.nodes", "nodes must be >= 1"); break;
    case TopologyFamily::ring: require(topology.nodes >= 3, "topology.nodes", "ring needs nodes >= 3"); break;
    case TopologyFamily::directed_exponential:
      require(topology.nodes >= 2 && (topology.nodes & (topology.nodes - 1)) == 0, "topology.nodes",
              "directed_exponential needs a power of two >= 2");
      break;
    case TopologyFamily::custom: require(!topology.path.empty(), "topology.path", "custom topology needs a path"); break;
  }

  if (problem.path.empty()) {
    require(problem.rows >= 1, "problem.m", "m must be >= 1");
    require(problem.cols >= 1, "problem.n", "n must be >= 1");
    require(problem.kind != ProblemKind::quadratic || problem.data_rows >= 1, "problem.p", "p must be >= 1");
    require(problem.heterogeneity >= 0.0, "problem.heterogeneity", "heterogeneity must be >= 0");
    require(problem.condition >= 1.0, "problem.condition", "condition must be >= 1");
    require(problem.target_norm > 0.0, "problem.target_norm", "target_norm must be positive");
    require(problem.radius > 0.0, "problem.radius", "radius must be positive");
  }

  require(noise.alpha > 1.0 && noise.alpha <= 2.0, "noise.alpha", "alpha must lie in (1,2]");
  require(noise.scale >= 0.0, "noise.scale", "scale must be >= 0");
  require(noise.family != NoiseFamily::gaussian || noise.alpha == 2.0, "noise.alpha",
          "gaussian noise requires alpha = 2");
  require(noise.family != NoiseFamily::student_t || noise.dof > noise.alpha, "noise.dof", "dof must exceed alpha");

  require(schedule_alpha > 1.0 && schedule_alpha <= 2.0, "schedule.alpha", "alpha must lie in (1,2]");
  require(eta > 0.0, "schedule.eta", "eta must be positive");
  require(theta > 0.0 && theta < 1.0, "schedule.theta", "theta must lie in (0,1)");

  require(baselines.dsgd_eta > 0.0, "baselines.dsgd_eta", "dsgd_eta must be positive");
  require(baselines.clip_eta > 0.0, "baselines.clip_eta", "clip_eta must be positive");
  require(baselines.clip_tau > 0.0, "baselines.clip_tau", "clip_tau must be positive");
  require(baselines.gt_eta > 0.0, "baselines.gt_eta", "gt_eta must be positive");
  require(baselines.gt_theta > 0.0 && baselines.gt_theta < 1.0, "baselines.gt_theta", "gt_theta must lie in (0,1)");
}

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError("config: " + e.message() + " (line " + std::to_string(e.line()) + ")", e.line());
  }
  check_keys(tree);
  const Reader r(tree, base_dir);

  ExperimentConfig c;
  r.text("run", "name", c.name);
  r.with("run", "algorithm", [&](const std::string& v) { c.algorithm = parse_algorithm(v); });
  r.count("run", "horizon", c.horizon);
  r.count("run", "seed", c.seed);
  r.counts("run", "seeds", c.seeds);
  r.counts("run", "sweep", c.sweep);
  r.path("run", "out_dir", c.out_dir, false);
  r.with("run", "orthogonalizer", [&](const std::string& v) { c.orthogonalizer = Orthogonalizer::parse(v); });
  r.count("run", "workers", c.workers);
  r.flag("run", "timing", c.timing);
  r.real("run", "target_epsilon", c.target_epsilon);
  r.count("run", "moment_draws", c.moment_draws);

  r.with("topology", "family", [&](const std::string& v) { c.topology.family = parse_topology_family(v); });
  r.count("topology", "nodes", c.topology.nodes);
  r.path("topology", "path", c.topology.path);

  r.with("problem", "kind", [&](const std::string& v) { c.problem.kind = parse_problem_kind(v); });
  r.count("problem", "m", c.problem.rows);
  r.count("problem", "n", c.problem.cols);
  r.count("problem", "p", c.problem.data_rows);
  r.real("problem", "heterogeneity", c.problem.heterogeneity);
  r.real("problem", "condition", c.problem.condition);
  r.real("problem", "target_norm", c.problem.target_norm);
  r.real("problem", "radius", c.problem.radius);
  r.count("problem", "seed", c.problem.seed);
  r.path("problem", "path", c.problem.path);

  r.with("noise", "family", [&](const std::string& v) { c.noise.family = parse_noise_family(v); });
  r.real("noise", "alpha", c.noise.alpha);
  r.real("noise", "scale", c.noise.scale);
  r.real("noise", "dof", c.noise.dof);

  r.with("schedule", "mode", [&](const std::string& v) {
    if (v == "theorem") c.schedule_mode = ScheduleMode::theorem;
    else if (v == "constant") c.schedule_mode = ScheduleMode::constant;
    else throw DomainError("expected theorem or constant, got '" + v + "'");
  });
  c.schedule_alpha = c.noise.alpha;
  r.real("schedule", "alpha", c.schedule_alpha);
  r.real("schedule", "eta", c.eta);
  r.real("schedule", "theta", c.theta);

  r.real("baselines", "dsgd_eta", c.baselines.dsgd_eta);
  r.real("baselines", "clip_eta", c.baselines.clip_eta);
  r.real("baselines", "clip_tau", c.baselines.clip_tau);
  r.real("baselines", "gt_eta", c.baselines.gt_eta);
  r.real("baselines", "gt_theta", c.baselines.gt_theta);

  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_file(path), path.parent_path());
}

std::string config_to_ini(const ExperimentConfig& c) {
  const auto list = [](const std::vector<std::uint64_t>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + std::to_string(v[i]);
    return out;
  };
  std::ostringstream o;
  o << "[run]\n";
  if (!c.name.empty()) o << "name = " << c.name << "\n";
  o << "algorithm = " << to_string(c.algorithm) << "\n"
    << "horizon = " << c.horizon << "\n"
    << "seed = " << c.seed << "\n";
  if (!c.seeds.empty()) o << "seeds = " << list(c.seeds) << "\n";
  if (!c.sweep.empty()) o << "sweep = " << list(c.sweep) << "\n";
  o << "out_dir = " << c.out_dir.string() << "\n"
    << "orthogonalizer = " << c.orthogonalizer.to_string() << "\n"
    << "workers = " << c.workers << "\n"
    << "timing = " << (c.timing ? "true" : "false") << "\n"
    << "target_epsilon = " << format_double(c.target_epsilon) << "\n"
    << "moment_draws = " << c.moment_draws << "\n\n";
  o << "[topology]\nfamily = " << to_string(c.topology.family) << "\n";
  if (c.topology.family == TopologyFamily::custom) o << "path = " << c.topology.path.string() << "\n";
  else o << "nodes = " << c.topology.nodes << "\n";
  o << "\n[problem]\n";
  if (!c.problem.path.empty()) {
    o << "path = " << c.problem.path.string() << "\n";
  } else {
    o << "kind = " << to_string(c.problem.kind) << "\n"
      << "m = " << c.problem.rows << "\n"
      << "n = " << c.problem.cols << "\n";
    if (c.problem.kind == ProblemKind::quadratic) {
      o << "p = " << c.problem.data_rows << "\n"
        << "condition = " << format_double(c.problem.condition) << "\n"
        << "target_norm = " << format_double(c.problem.target_norm) << "\n";
    } else {
      o << "radius = " << format_double(c.problem.radius) << "\n";
    }
    o << "heterogeneity = " << format_double(c.problem.heterogeneity) << "\n"
      << "seed = " << c.problem.seed << "\n";
  }
  o << "\n[noise]\nfamily = " << to_string(c.noise.family) << "\n"
    << "alpha = " << format_double(c.noise.alpha) << "\n"
    << "scale = " << format_double(c.noise.scale) << "\n";
  if (c.noise.family == NoiseFamily::student_t) o << "dof = " << format_double(c.noise.dof) << "\n";
  o << "\n[schedule]\nmode = " << to_string(c.schedule_mode) << "\n"
    << "alpha = " << format_double(c.schedule_alpha) << "\n"
    << "eta = " << format_double(c.eta) << "\n"
    << "theta = " << format_double(c.theta) << "\n";
  o << "\n[baselines]\n"
    << "dsgd_eta = " << format_double(c.baselines.dsgd_eta) << "\n"
    << "clip_eta = " << format_double(c.baselines.clip_eta) << "\n"
    << "clip_tau = " << format_double(c.baselines.clip_tau) << "\n"
    << "gt_eta = " << format_double(c.baselines.gt_eta) << "\n"
    << "gt_theta = " << format_double(c.baselines.gt_theta) << "\n";
  return o.str();
}

// ---- instances and runs ------------------------------------------------------

Instance build_instance(const ExperimentConfig& c) {
  MixingSpec mixing = c.topology.family == TopologyFamily::custom ? load_mixing_csv(c.topology.path)
                                                                   : build_topology(c.topology.family, c.topology.nodes);
  const std::size_t n = mixing.nodes();
  std::optional<Problem> problem;
  if (!c.problem.path.empty()) {
    problem = load_problem(c.problem.path);
    problem->set_origin(c.problem.path.string());
    if (problem->nodes() != n) {
      throw ConfigError("problem.path", "problem has " + std::to_string(problem->nodes()) +
                                            " nodes but the topology has " + std::to_string(n));
    }
  } else if (c.problem.kind == ProblemKind::quadratic) {
    problem = make_quadratic({.nodes = n,
                              .rows = c.problem.rows,
                              .cols = c.problem.cols,
                              .data_rows = c.problem.data_rows,
                              .heterogeneity = c.problem.heterogeneity,
                              .condition = c.problem.condition,
                              .target_norm = c.problem.target_norm,
                              .seed = c.problem.seed});
  } else {
    problem = make_gram({.nodes = n,
                         .rows = c.problem.rows,
                         .cols = c.problem.cols,
                         .heterogeneity = c.problem.heterogeneity,
                         .radius = c.problem.radius,
                         .seed = c.problem.seed});
  }
  return Instance{std::move(*problem), std::move(mixing)};
}

std::string run_id(const ExperimentConfig& c, std::uint64_t horizon, std::uint64_t seed) {
  return (c.name.empty() ? to_string(c.algorithm) : c.name) + "_K" + std::to_string(horizon) + "_s" +
         std::to_string(seed);
}

namespace {

class LastRowSink final : public MetricsSink {
 public:
  void append(const MetricsRow& row) override { last = row; }
  MetricsRow last;
};

Json optional_number(const std::optional<double>& v) {
  return v && std::isfinite(*v) ? Json(*v) : Json(nullptr);
}

Json config_json(const ExperimentConfig& c) {
  pt::ptree tree;
  std::istringstream in(config_to_ini(c));
  pt::read_ini(in, tree);
  Json out = Json::object();
  for (const auto& [section, node] : tree) {
    Json sec = Json::object();
    for (const auto& [key, value] : node) sec[key] = value.data();
    out[section] = std::move(sec);
  }
  return out;
}

Json theory_json(const ExperimentConfig& c, const Instance& inst, const Matrix& start, double moment,
                 double alpha) {
  Json t = Json::object();
  const Problem& p = inst.problem;
  if (!p.f_low() || !p.lipschitz_star()) {
    t["u_dm"] = nullptr;
    t["min_horizon"] = nullptr;
    t["note"] = "problem constants unavailable";
    return t;
  }
  const double sigma = moment > 0.0 ? std::pow(moment, 1.0 / alpha) : 0.0;
  const UdmInputs in{.f0_minus_flow = std::max(0.0, p.objective(start) - *p.f_low()),
                     .nodes = p.nodes(),
                     .sigma = sigma,
                     .alpha = alpha,
                     .lambda = inst.mixing.mixing_rate(),
                     .lipschitz_star = *p.lipschitz_star(),
                     .rows = p.rows(),
                     .cols = p.cols()};
  const double u = u_dm_constant(in);
  t["f0_minus_flow"] = in.f0_minus_flow;
  t["sigma"] = sigma;
  t["u_dm"] = u;
  t["target_epsilon"] = c.target_epsilon;
  try {
    t["min_horizon"] = min_horizon(u, c.target_epsilon, alpha);
  } catch (const std::overflow_error&) {
    t["min_horizon"] = nullptr;
    t["note"] = "min_horizon exceeds 64-bit range";
  }
  return t;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

RunArtifacts run_and_write(const ExperimentConfig& c, std::uint64_t horizon, std::uint64_t seed,
                           MetricsSink* extra) {
  RunArtifacts art;
  art.id = run_id(c, horizon, seed);
  std::filesystem::create_directories(c.out_dir);
  art.metrics_csv = c.out_dir / ("metrics_" + art.id + ".csv");
  art.summary_json = c.out_dir / ("summary_" + art.id + ".json");
  try {
    const Instance inst = build_instance(c);
    RunOptions opt;
    opt.algorithm = c.algorithm;
    opt.orthogonalizer = c.orthogonalizer;
    opt.schedule = c.schedule_for(horizon);
    opt.baselines = c.baselines;
    opt.seed = seed;
    opt.workers = c.workers;
    opt.record_wall_time = c.timing;
    const Matrix start = inst.problem.default_start();

    std::ofstream csv(art.metrics_csv, std::ios::binary);
    if (!csv) throw std::runtime_error("cannot write " + art.metrics_csv.string());
    CsvSink csv_sink(csv);
    LastRowSink last;
    TeeSink tee(csv_sink, last);
    VectorSink unused;
    TeeSink outer(tee, extra ? *extra : static_cast<MetricsSink&>(unused));
    art.result = run(inst.problem, inst.mixing, c.noise, opt, outer);
    csv.close();
    if (!csv) throw std::runtime_error("write failed: " + art.metrics_csv.string());

    NoiseModel noise = c.noise;
    noise.base_seed = seed;
    const double moment = estimate_alpha_moment(noise, inst.problem.rows(), inst.problem.cols(), c.moment_draws);
    const RunResult& r = art.result;
    const double lambda = inst.mixing.mixing_rate();

    Json s;
    s["run_id"] = art.id;
    s["version"] = version_hash();
    s["algorithm"] = to_string(c.algorithm);
    s["orthogonalizer"] = c.orthogonalizer.to_string();
    s["horizon"] = horizon;
    s["seed"] = seed;
    s["results"] = {
        {"initial_avg_grad_nuclear", r.initial_avg_grad},
        {"final_avg_grad_nuclear", r.final_avg_grad},
        {"iota", r.iota},
        {"grad_at_iota", r.grad_at_iota},
        {"running_average_grad", r.running_average_grad},
        {"final_objective_at_mean", last.last.objective_at_mean},
        {"consensus_bound", c.algorithm == Algorithm::demuon ? Json(last.last.consensus_bound) : Json(nullptr)},
        {"consensus_violations", r.consensus_violations},
        {"ball_exits", r.ball_exits},
        {"warnings", r.warnings},
    };
    s["topology"] = {{"family", to_string(inst.mixing.family())},
                     {"nodes", inst.mixing.nodes()},
                     {"mixing_rate", lambda}};
    s["problem"] = {{"kind", to_string(inst.problem.kind())},
                    {"origin", inst.problem.origin()},
                    {"rows", inst.problem.rows()},
                    {"cols", inst.problem.cols()},
                    {"lipschitz_star", optional_number(inst.problem.lipschitz_star())},
                    {"f_low", optional_number(inst.problem.f_low())},
                    {"certified_radius", optional_number(inst.problem.certified_radius())}};
    s["schedule"] = {{"mode", to_string(c.schedule_mode)},
                     {"eta", opt.schedule.eta},
                     {"theta", opt.schedule.theta},
                     {"alpha", opt.schedule.alpha}};
    if (has_trackers(c.algorithm)) {
      s["potential"] = {{"p", r.potential_params.p}, {"q", r.potential_params.q}};
    }
    s["noise"] = {{"family", to_string(c.noise.family)},
                  {"alpha", c.noise.alpha},
                  {"scale", c.noise.scale},
                  {"empirical_alpha_moment", moment},
                  {"moment_draws", c.moment_draws}};
    s["theory"] = theory_json(c, inst, start, moment, c.noise.alpha);
    s["config"] = config_json(c);
    write_text(art.summary_json, s.dump(2) + "\n");
  } catch (const std::exception& e) {
    const std::filesystem::path err = c.out_dir / ("error_" + art.id + ".json");
    std::ofstream(err, std::ios::binary) << error_json(e) << "\n";
    throw;
  }
  return art;
}

}  // namespace

RunArtifacts execute_run(const ExperimentConfig& config, std::uint64_t horizon, std::uint64_t seed) {
  config.validate();
  return run_and_write(config, horizon, seed, nullptr);
}

RunArtifacts execute(const ExperimentConfig& config) { return execute_run(config, config.horizon, config.seed); }

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("log_log_slope needs two or more paired points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw DomainError("log_log_slope needs positive values");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw DomainError("log_log_slope needs distinct x values");
  return sxy / sxx;
}

SweepReport sweep(const ExperimentConfig& config) {
  config.validate();
  const std::vector<std::uint64_t> horizons = config.sweep.empty() ? std::vector{config.horizon} : config.sweep;
  const std::vector<std::uint64_t> seeds = config.seeds.empty() ? std::vector{config.seed} : config.seeds;

  // Parallelism moves from nodes to runs; each run stays single-threaded.
  ExperimentConfig single = config;
  single.workers = 1;
  std::filesystem::create_directories(config.out_dir);
  std::vector<std::pair<std::uint64_t, std::uint64_t>> jobs;
  for (std::uint64_t k : horizons)
    for (std::uint64_t s : seeds) jobs.emplace_back(k, s);
  std::vector<RunResult> results(jobs.size());
  Executor(config.workers).for_each_node(jobs.size(), [&](std::size_t j) {
    results[j] = run_and_write(single, jobs[j].first, jobs[j].second, nullptr).result;
  });

  SweepReport report;
  Json points = Json::array();
  std::vector<double> ks, means;
  for (std::size_t h = 0; h < horizons.size(); ++h) {
    SweepPoint pt;
    pt.horizon = horizons[h];
    pt.seeds = seeds;
    double iota_sum = 0.0;
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      const RunResult& r = results[h * seeds.size() + s];
      pt.running_average_grad.push_back(r.running_average_grad);
      pt.mean_running_average_grad += r.running_average_grad;
      iota_sum += r.grad_at_iota;
    }
    pt.mean_running_average_grad /= static_cast<double>(seeds.size());
    pt.mean_grad_at_iota = iota_sum / static_cast<double>(seeds.size());
    ks.push_back(static_cast<double>(pt.horizon));
    means.push_back(pt.mean_running_average_grad);
    points.push_back({{"horizon", pt.horizon},
                      {"seeds", pt.seeds},
                      {"running_average_grad", pt.running_average_grad},
                      {"mean_running_average_grad", pt.mean_running_average_grad},
                      {"mean_grad_at_iota", pt.mean_grad_at_iota}});
    report.points.push_back(std::move(pt));
  }
  std::set<std::uint64_t> distinct(horizons.begin(), horizons.end());
  if (distinct.size() >= 2) report.log_log_slope = log_log_slope(ks, means);

  Json s;
  s["name"] = config.name.empty() ? to_string(config.algorithm) : config.name;
  s["version"] = version_hash();
  s["points"] = std::move(points);
  s["log_log_slope"] = report.log_log_slope ? Json(*report.log_log_slope) : Json(nullptr);
  s["config"] = config_json(config);
  report.summary_json =
      config.out_dir / ("sweep_" + (config.name.empty() ? to_string(config.algorithm) : config.name) + ".json");
  write_text(report.summary_json, s.dump(2) + "\n");
  return report;
}

namespace {

std::string section_text(const std::string& ini, const std::string& section) {
  const std::string head = "[" + section + "]\n";
  const auto begin = ini.find(head);
  if (begin == std::string::npos) return {};
  const auto end = ini.find("\n[", begin + head.size());
  return ini.substr(begin, end == std::string::npos ? std::string::npos : end - begin);
}

}  // namespace

std::filesystem::path compare(const std::vector<ExperimentConfig>& configs) {
  if (configs.size() < 2) throw ConfigError("compare", "need at least two configs, got " + std::to_string(configs.size()));
  const ExperimentConfig& ref = configs.front();
  const std::string ref_ini = config_to_ini(ref);
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const ExperimentConfig& c = configs[i];
    c.validate();
    const std::string ini = config_to_ini(c);
    for (const char* section : {"problem", "topology"}) {
      if (section_text(ini, section) != section_text(ref_ini, section)) {
        throw ConfigError(section, "config " + std::to_string(i + 1) + " differs from config 1; compare needs a shared " +
                                       section);
      }
    }
    if (c.seed != ref.seed) throw ConfigError("run.seed", "compared configs must share the seed");
    if (c.horizon != ref.horizon) throw ConfigError("run.horizon", "compared configs must share the horizon");
    std::string label = c.name.empty() ? to_string(c.algorithm) : c.name;
    const std::string base = label;
    for (int dup = 2; std::find(labels.begin(), labels.end(), label) != labels.end(); ++dup)
      label = base + "_" + std::to_string(dup);
    labels.push_back(label);
  }

  std::vector<VectorSink> rows(configs.size());
  for (std::size_t i = 0; i < configs.size(); ++i) {
    ExperimentConfig c = configs[i];
    c.name = labels[i];
    run_and_write(c, c.horizon, c.seed, &rows[i]);
  }

  std::ostringstream out;
  out << "iter";
  for (const std::string& l : labels) out << "," << l << "_avg_grad_nuclear";
  for (const std::string& l : labels) out << "," << l << "_objective_at_mean";
  out << "\n";
  for (std::uint64_t k = 0; k < ref.horizon; ++k) {
    out << k;
    for (const VectorSink& r : rows) out << "," << format_double(r.rows[k].avg_grad_nuclear);
    for (const VectorSink& r : rows) out << "," << format_double(r.rows[k].objective_at_mean);
    out << "\n";
  }
  std::string joined;
  for (std::size_t i = 0; i < labels.size(); ++i) joined += (i ? "_vs_" : "") + labels[i];
  std::filesystem::create_directories(ref.out_dir);
  const std::filesystem::path path = ref.out_dir / ("compare_" + joined + ".csv");
  write_text(path, out.str());
  return path;
}

std::string error_json(const std::exception& e) {
  Json err;
  if (const auto* c = dynamic_cast<const ConfigError*>(&e)) {
    err = {{"type", "config_error"}, {"key", c->key()}};
  } else if (const auto* p = dynamic_cast<const ParseError*>(&e)) {
    err = {{"type", "parse_error"}, {"line", p->line()}};
  } else if (const auto* n = dynamic_cast<const NumericalFailure*>(&e)) {
    err = {{"type", "numerical_failure"}, {"iteration", n->iterations()}};
  } else if (dynamic_cast<const DimensionMismatch*>(&e)) {
    err = {{"type", "dimension_mismatch"}};
  } else if (dynamic_cast<const InvalidMixing*>(&e)) {
    err = {{"type", "invalid_mixing"}};
  } else if (dynamic_cast<const DomainError*>(&e)) {
    err = {{"type", "domain_error"}};
  } else {
    err = {{"type", "error"}};
  }
  err["message"] = e.what();
  return Json{{"error", err}}.dump();
}

}  // namespace declab
