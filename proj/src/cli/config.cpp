// Copyright 2026 The nlfilter Authors
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


#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include <fmt/format.h>
#include <json.hpp>

#include "nlfilter/cli.hpp"

namespace nlfilter::cli {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw ConfigError(fmt::format("config: {}: {}", field, what));
}

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) fail(where.empty() ? key : where + "." + key, "unknown key");
  }
}

const json* find(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double get_double(const json& obj, const std::string& where, const char* key, double fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_number()) fail(where + "." + key, "expected a number");
  return v->get<double>();
}

std::size_t get_count(const json& obj, const std::string& where, const char* key, std::size_t fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_number_integer() || v->get<long long>() < 0) {
    fail(where + "." + key, "expected a nonnegative integer");
  }
  return v->get<std::size_t>();
}

std::vector<double> get_vector(const json& v, const std::string& field) {
  if (!v.is_array()) fail(field, "expected an array of numbers");
  std::vector<double> out;
  for (const json& e : v) {
    if (!e.is_number()) fail(field, "expected an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

std::vector<double> get_vector(const json& obj, const std::string& where, const char* key,
                               std::vector<double> fallback) {
  const json* v = find(obj, key);
  return v ? get_vector(*v, where + "." + key) : std::move(fallback);
}

Vector to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// A scalar is accepted as a 1x1 matrix.
Matrix get_matrix(const json& v, const std::string& field) {
  if (v.is_number()) return Matrix::Constant(1, 1, v.get<double>());
  if (!v.is_array() || v.empty()) fail(field, "expected a matrix (array of rows)");
  const auto rows = static_cast<Eigen::Index>(v.size());
  const json& first = v.front();
  if (!first.is_array()) fail(field, "expected a matrix (array of rows)");
  const auto cols = static_cast<Eigen::Index>(first.size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const std::vector<double> row = get_vector(v[static_cast<std::size_t>(i)], field);
    if (static_cast<Eigen::Index>(row.size()) != cols) fail(field, "ragged matrix rows");
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = row[static_cast<std::size_t>(j)];
  }
  return m;
}

void parse_scalar_linear(const json& p, models::ScalarLinearParams& out) {
  reject_unknown(p, "model.params", {"a", "sigma", "sigma_bar", "sensor", "prior_mean", "prior_var"});
  out.a = get_double(p, "model.params", "a", out.a);
  out.sigma = get_double(p, "model.params", "sigma", out.sigma);
  out.sigma_bar = get_double(p, "model.params", "sigma_bar", out.sigma_bar);
  out.sensor = get_double(p, "model.params", "sensor", out.sensor);
  out.prior_mean = get_double(p, "model.params", "prior_mean", out.prior_mean);
  out.prior_var = get_double(p, "model.params", "prior_var", out.prior_var);
  if (!(out.prior_var >= 0.0)) fail("model.params.prior_var", "must be >= 0");
}

void parse_jump_ou(const json& p, models::JumpOuParams& out) {
  const std::string w = "model.params";
  reject_unknown(p, w, {"mean_reversion", "sigma", "sigma_bar", "jump_scale", "jump_rate", "atoms",
                        "levy_drift_a", "prior_var"});
  out.mean_reversion = get_double(p, w, "mean_reversion", out.mean_reversion);
  out.sigma = get_double(p, w, "sigma", out.sigma);
  out.sigma_bar = get_double(p, w, "sigma_bar", out.sigma_bar);
  out.jump_scale = get_double(p, w, "jump_scale", out.jump_scale);
  out.jump_rate = get_double(p, w, "jump_rate", out.jump_rate);
  out.levy_drift_a = get_double(p, w, "levy_drift_a", out.levy_drift_a);
  out.prior_var = get_double(p, w, "prior_var", out.prior_var);
  if (const json* atoms = find(p, "atoms")) {
    if (!atoms->is_array()) fail(w + ".atoms", "expected [[mark, probability], ...]");
    for (const json& a : *atoms) {
      const std::vector<double> pair = get_vector(a, w + ".atoms");
      if (pair.size() != 2) fail(w + ".atoms", "expected [[mark, probability], ...]");
      out.atoms.push_back({Vector::Constant(1, pair[0]), pair[1]});
    }
  }
  if (!(out.prior_var >= 0.0)) fail(w + ".prior_var", "must be >= 0");
}

void parse_change_detection(const json& p, models::ChangeDetectionParams& out) {
  const std::string w = "model.params";
  reject_unknown(p, w, {"b0", "b_grid", "b_weights", "tau_grid", "tau_weights", "b", "tau"});
  const double b0 = get_double(p, w, "b0", out.b0);
  if (find(p, "b") || find(p, "tau")) {
    if (!find(p, "b") || !find(p, "tau")) fail(w, "'b' and 'tau' must be given together");
    if (find(p, "b_grid") || find(p, "tau_grid")) fail(w, "fixed 'b'/'tau' exclude the grids");
    out = models::ChangeDetectionParams::fixed(b0, get_double(p, w, "b", 0.0), get_double(p, w, "tau", 0.0));
    return;
  }
  out.b0 = b0;
  out.b_grid = get_vector(p, w, "b_grid", out.b_grid);
  out.b_weights = get_vector(p, w, "b_weights", out.b_weights);
  out.tau_grid = get_vector(p, w, "tau_grid", out.tau_grid);
  out.tau_weights = get_vector(p, w, "tau_weights", out.tau_weights);
}

LinearGaussianSpec parse_inline(const json& l) {
  const std::string w = "model.linear";
  reject_unknown(l, w, {"drift", "sigma", "sigma_bar", "sensor", "prior_mean", "prior_cov",
                        "drift_offset", "sensor_offset"});
  for (const char* key : {"drift", "sigma", "sensor", "prior_mean", "prior_cov"}) {
    if (!find(l, key)) fail(w + "." + key, "required");
  }
  LinearGaussianSpec s;
  s.drift = get_matrix(l["drift"], w + ".drift");
  s.sigma = get_matrix(l["sigma"], w + ".sigma");
  s.sensor = get_matrix(l["sensor"], w + ".sensor");
  s.sigma_bar = find(l, "sigma_bar") ? get_matrix(l["sigma_bar"], w + ".sigma_bar")
                                     : Matrix::Zero(s.drift.rows(), s.sensor.rows());
  const json& pm = l["prior_mean"];
  s.prior_mean = pm.is_number() ? Vector::Constant(1, pm.get<double>())
                                : to_eigen(get_vector(pm, w + ".prior_mean"));
  s.prior_cov = get_matrix(l["prior_cov"], w + ".prior_cov");
  if (const json* c = find(l, "drift_offset")) {
    s.drift_offset = c->is_number() ? Vector::Constant(1, c->get<double>())
                                    : to_eigen(get_vector(*c, w + ".drift_offset"));
  }
  if (const json* c = find(l, "sensor_offset")) {
    s.sensor_offset = c->is_number() ? Vector::Constant(1, c->get<double>())
                                     : to_eigen(get_vector(*c, w + ".sensor_offset"));
  }
  try {
    s.validate();
  } catch (const ModelError& e) {
    fail(w, e.what());
  }
  return s;
}

ModelBlock parse_model(const json& m) {
  if (!m.is_object()) fail("model", "expected an object");
  reject_unknown(m, "model", {"builtin", "params", "linear"});
  ModelBlock block;
  const json* builtin = find(m, "builtin");
  const json* linear = find(m, "linear");
  if (!builtin == !linear) fail("model", "exactly one of 'builtin' or 'linear' is required");
  if (linear) {
    block.inline_spec = parse_inline(*linear);
    if (find(m, "params")) fail("model.params", "not allowed with an inline model");
    return block;
  }
  if (!builtin->is_string()) fail("model.builtin", "expected a string");
  block.builtin = builtin->get<std::string>();
  const auto& names = models::builtin_names();
  if (std::find(names.begin(), names.end(), block.builtin) == names.end()) {
    fail("model.builtin", fmt::format("unknown built-in '{}'", block.builtin));
  }
  if (block.builtin == "correlated_linear") block.linear.sigma_bar = 0.5;
  const json params = find(m, "params") ? m["params"] : json::object();
  if (!params.is_object()) fail("model.params", "expected an object");
  if (block.builtin == "linear_gaussian" || block.builtin == "correlated_linear") {
    parse_scalar_linear(params, block.linear);
  } else if (block.builtin == "jump_ou") {
    parse_jump_ou(params, block.jump_ou);
  } else {
    parse_change_detection(params, block.change_detection);
  }
  return block;
}

}  // namespace

ScenarioConfig parse_config(std::string_view text, std::optional<std::uint64_t> seed_override) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("config: not valid JSON: {}", e.what()));
  }
  if (!root.is_object()) fail("<root>", "expected an object");
  reject_unknown(root, "", {"scenario", "seed", "model", "grid", "filter", "diagnostics",
                            "counterexample", "simulate", "observations", "output_dir"});
  ScenarioConfig c;

  if (seed_override) {
    root["seed"] = *seed_override;
  }
  const json* seed = find(root, "seed");
  if (!seed) fail("seed", "required (there is no default seed)");
  if (!seed->is_number_unsigned()) fail("seed", "expected a nonnegative integer");
  c.seed = seed->get<std::uint64_t>();

  if (const json* s = find(root, "scenario")) {
    if (!s->is_string()) fail("scenario", "expected a string");
    c.scenario = s->get<std::string>();
  }

  if (!find(root, "model")) fail("model", "required");
  c.model = parse_model(root["model"]);
  if (c.scenario.empty()) c.scenario = c.model.builtin.empty() ? "inline_linear" : c.model.builtin;

  if (const json* g = find(root, "grid")) {
    reject_unknown(*g, "grid", {"horizon", "dt"});
    c.horizon = get_double(*g, "grid", "horizon", c.horizon);
    c.dt = get_double(*g, "grid", "dt", c.dt);
  }
  if (!(c.dt > 0.0) || !std::isfinite(c.dt)) fail("grid.dt", "must be > 0");
  if (!(c.horizon > 0.0) || !std::isfinite(c.horizon)) fail("grid.horizon", "must be > 0");
  if (c.dt > c.horizon) fail("grid.dt", "must not exceed grid.horizon");
  try {
    (void)c.grid();
  } catch (const ConfigError& e) {
    fail("grid", e.what());
  }

  if (const json* f = find(root, "filter")) {
    reject_unknown(*f, "filter", {"n_particles", "resample_threshold", "collapse_floor"});
    c.filter.n_particles = get_count(*f, "filter", "n_particles", c.filter.n_particles);
    c.filter.resample_threshold = get_double(*f, "filter", "resample_threshold", c.filter.resample_threshold);
    c.filter.collapse_floor = get_double(*f, "filter", "collapse_floor", c.filter.collapse_floor);
  }
  try {
    c.filter.validate();
  } catch (const ConfigError& e) {
    fail("filter", e.what());
  }
  c.filter.seed = c.seed;

  if (const json* d = find(root, "diagnostics")) {
    const std::string w = "diagnostics";
    reject_unknown(*d, w, {"checks", "n_paths", "n_runs", "n_seeds", "n_particles",
                           "residual_particles", "record_stride", "alpha", "mean_times", "levels",
                           "hitting_dt", "dufresne_horizon", "tolerance", "fixed_b", "fixed_tau"});
    DiagnosticsBlock& b = c.diagnostics;
    if (const json* checks = find(*d, "checks")) {
      if (!checks->is_array()) fail(w + ".checks", "expected an array of names");
      const auto& known = check_names();
      for (const json& n : *checks) {
        if (!n.is_string()) fail(w + ".checks", "expected an array of names");
        const std::string name = n.get<std::string>();
        if (std::find(known.begin(), known.end(), name) == known.end()) {
          fail(w + ".checks", fmt::format("unknown check '{}'", name));
        }
        b.checks.push_back(name);
      }
    }
    b.n_paths = get_count(*d, w, "n_paths", b.n_paths);
    b.n_runs = get_count(*d, w, "n_runs", b.n_runs);
    b.n_seeds = get_count(*d, w, "n_seeds", b.n_seeds);
    b.n_particles = get_count(*d, w, "n_particles", b.n_particles);
    b.residual_particles = get_count(*d, w, "residual_particles", b.residual_particles);
    b.record_stride = get_count(*d, w, "record_stride", b.record_stride);
    b.alpha = get_double(*d, w, "alpha", b.alpha);
    b.mean_times = get_vector(*d, w, "mean_times", b.mean_times);
    b.levels = get_vector(*d, w, "levels", b.levels);
    b.hitting_dt = get_double(*d, w, "hitting_dt", b.hitting_dt);
    b.dufresne_horizon = get_double(*d, w, "dufresne_horizon", b.dufresne_horizon);
    b.tolerance = get_double(*d, w, "tolerance", b.tolerance);
    b.fixed_b = get_double(*d, w, "fixed_b", b.fixed_b);
    b.fixed_tau = get_double(*d, w, "fixed_tau", b.fixed_tau);
    if (b.n_paths < 2) fail(w + ".n_paths", "must be >= 2");
    if (b.n_runs < 2) fail(w + ".n_runs", "must be >= 2");
    if (b.n_seeds < 1) fail(w + ".n_seeds", "must be >= 1");
    if (b.record_stride < 1) fail(w + ".record_stride", "must be >= 1");
    if (!(b.hitting_dt > 0.0)) fail(w + ".hitting_dt", "must be > 0");
    if (!(b.dufresne_horizon > 0.0)) fail(w + ".dufresne_horizon", "must be > 0");
    if (!(b.alpha > 0.0)) fail(w + ".alpha", "must be > 0");
  }

  if (const json* x = find(root, "counterexample")) {
    const std::string w = "counterexample";
    reject_unknown(*x, w, {"kind", "alpha", "upper", "time_cap", "n_paths"});
    CounterexampleBlock& b = c.counterexample;
    if (const json* k = find(*x, "kind")) {
      if (!k->is_string()) fail(w + ".kind", "expected a string");
      try {
        b.kind = parse_counterexample_kind(k->get<std::string>());
      } catch (const ConfigError& e) {
        fail(w + ".kind", e.what());
      }
    }
    b.params.alpha = get_double(*x, w, "alpha", b.params.alpha);
    b.params.upper = get_double(*x, w, "upper", b.params.upper);
    b.params.time_cap = get_double(*x, w, "time_cap", b.params.time_cap);
    b.n_paths = get_count(*x, w, "n_paths", b.n_paths);
    if (b.n_paths < 1) fail(w + ".n_paths", "must be >= 1");
  }

  if (const json* s = find(root, "simulate")) {
    reject_unknown(*s, "simulate", {"n_paths"});
    c.simulate_paths = get_count(*s, "simulate", "n_paths", c.simulate_paths);
    if (c.simulate_paths < 1) fail("simulate.n_paths", "must be >= 1");
  }
  if (const json* o = find(root, "observations")) {
    if (!o->is_string()) fail("observations", "expected a path");
    c.observations = o->get<std::string>();
  }
  if (const json* o = find(root, "output_dir")) {
    if (!o->is_string()) fail("output_dir", "expected a path");
    c.output_dir = o->get<std::string>();
  }

  // Model construction errors surface as config errors here rather than mid-run.
  try {
    (void)build_model(c.model);
  } catch (const ModelError& e) {
    fail("model", e.what());
  }

  root.erase("output_dir");
  c.canonical = root.dump();
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path, std::optional<std::uint64_t> seed_override) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("config: cannot read '{}'", path.string()));
  std::ostringstream text;
  text << in.rdbuf();
  ScenarioConfig c = parse_config(text.str(), seed_override);
  return c;
}

SignalModel build_model(const ModelBlock& block) {
  if (block.inline_spec) return models::from_linear(*block.inline_spec, "inline_linear");
  if (block.builtin == "linear_gaussian") return models::linear_gaussian(block.linear);
  if (block.builtin == "correlated_linear") return models::correlated_linear(block.linear);
  if (block.builtin == "jump_ou") {
    SignalModel m = models::jump_ou(block.jump_ou);
    if (m.levy) m.levy->validate();
    return m;
  }
  if (block.builtin == "change_detection") return models::change_detection(block.change_detection);
  throw ConfigError(fmt::format("config: model.builtin: unknown built-in '{}'", block.builtin));
}

}  // namespace nlfilter::cli
