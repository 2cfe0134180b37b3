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


#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <utility>

#include <fmt/format.h>
#include <json.hpp>

#include "nlfilter/change_detection.hpp"
#include "nlfilter/cli.hpp"
#include "nlfilter/parallel.hpp"
#include "nlfilter/path_io.hpp"
#include "nlfilter/report.hpp"
#include "nlfilter/residuals.hpp"

namespace nlfilter::cli {
namespace {

constexpr const char* kVersion = "0.1.0";

std::string hex64(std::uint64_t h) { return fmt::format("{:016x}", h); }

/// Files are rendered in memory, then written together with a manifest listing their hashes.
class OutputSet {
 public:
  OutputSet(const ScenarioConfig& config, Command command) : config_(config), command_(command) {}

  void add(std::string name, std::string content) { files_.emplace_back(std::move(name), std::move(content)); }

  void write(std::ostream& log) const {
    std::filesystem::create_directories(config_.output_dir);
    nlohmann::json manifest;
    manifest["command"] = to_string(command_);
    manifest["scenario"] = config_.scenario;
    manifest["seed"] = config_.seed;
    manifest["config_hash"] = hex64(fnv1a64(config_.canonical));
    const TimeGrid grid = config_.grid();
    manifest["grid"] = {{"horizon", format_number(grid.horizon)},
                        {"dt", format_number(grid.dt)},
                        {"n_steps", grid.n_steps}};
    manifest["version"] = kVersion;
    nlohmann::json files = nlohmann::json::object();
    for (const auto& [name, content] : files_) {
      put(name, content);
      files[name] = hex64(fnv1a64(content));
    }
    manifest["files"] = files;
    put("manifest.json", manifest.dump(2) + "\n");
    for (const auto& [name, content] : files_) log << "wrote " << (config_.output_dir / name).string() << "\n";
  }

 private:
  void put(const std::string& name, const std::string& content) const {
    const auto path = config_.output_dir / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  }

  const ScenarioConfig& config_;
  Command command_;
  std::vector<std::pair<std::string, std::string>> files_;
};

std::vector<Verdict> only(std::vector<Verdict> rows, std::string_view prefix) {
  std::vector<Verdict> out;
  for (Verdict& v : rows) {
    if (v.check.rfind(prefix, 0) == 0) out.push_back(std::move(v));
  }
  return out;
}

/// Diagnostics reports are shared between checks of one verify call.
class CheckContext {
 public:
  CheckContext(const ScenarioConfig& config, Exec exec)
      : config_(config), exec_(exec), grid_(config.grid()), model_(build_model(config.model)) {}

  const ScenarioConfig& config() const { return config_; }
  const SignalModel& model() const { return model_; }
  const TimeGrid& grid() const { return grid_; }
  Exec exec() const { return exec_; }

  const DiagnosticsReport& revuz_yor(SamplingMeasure measure) {
    return cached(measure == SamplingMeasure::transformed ? "ry_t" : "ry_p", [&] {
      return diagnostics(revuz_yor_scenario(config_.diagnostics.alpha, grid_, config_.seed), measure);
    });
  }
  const DiagnosticsReport& model_report(SamplingMeasure measure) {
    return cached(measure == SamplingMeasure::transformed ? "m_t" : "m_p", [&] {
      return diagnostics(model_scenario(model_, grid_, config_.seed), measure);
    });
  }
  const DiagnosticsReport& independent() {
    return cached("ind", [&] {
      return diagnostics(independent_scenario(grid_, config_.seed), SamplingMeasure::physical);
    });
  }
  const ResidualReport& residuals(ObservationMeasure measure) {
    const std::string key = measure == ObservationMeasure::physical ? "p" : "r";
    auto it = residuals_.find(key);
    if (it != residuals_.end()) return it->second;
    ResidualOptions o;
    o.n_runs = config_.diagnostics.n_runs;
    o.grid = grid_;
    o.filter = config_.filter;
    o.filter.n_particles = config_.diagnostics.residual_particles;
    o.seed = config_.seed;
    o.measure = measure;
    o.record_stride = config_.diagnostics.record_stride;
    o.exec = exec_;
    return residuals_.emplace(key, equation_residuals(model_, test_functions::battery(model_.dim_x), o))
        .first->second;
  }

 private:
  DiagnosticsReport diagnostics(const Scenario& s, SamplingMeasure measure) const {
    DiagnosticsOptions o;
    o.n_paths = config_.diagnostics.n_paths;
    o.measure = measure;
    o.record_stride = config_.diagnostics.record_stride;
    o.exec = exec_;
    return run_diagnostics(s, o);
  }
  template <class F>
  const DiagnosticsReport& cached(const std::string& key, F make) {
    auto it = reports_.find(key);
    if (it == reports_.end()) it = reports_.emplace(key, make()).first;
    return it->second;
  }

  const ScenarioConfig& config_;
  Exec exec_;
  TimeGrid grid_;
  SignalModel model_;
  std::map<std::string, DiagnosticsReport> reports_;
  std::map<std::string, ResidualReport> residuals_;
};

void require_linear(const CheckContext& ctx, const std::string& check) {
  if (!ctx.model().linear) {
    throw ConfigError(fmt::format("config: diagnostics.checks: '{}' needs a linear-Gaussian model", check));
  }
}

KalmanAgreementOptions kalman_options(const CheckContext& ctx) {
  const auto& d = ctx.config().diagnostics;
  KalmanAgreementOptions o;
  o.n_seeds = d.n_seeds;
  o.n_particles = d.n_particles;
  o.horizon = ctx.grid().horizon;
  o.dt = ctx.grid().dt;
  o.seed = ctx.config().seed;
  o.resample_threshold = ctx.config().filter.resample_threshold;
  o.tolerance = d.tolerance;
  o.exec = ctx.exec();
  return o;
}

std::vector<Verdict> kalman_rows(const KalmanAgreement& r, const std::string& scenario, double tol,
                                 const std::string& prefix, bool expected_fail) {
  return {{prefix + "_mean", scenario, r.mean_abs_mean_error, 0.0, tol, r.mean_abs_mean_error < tol,
           expected_fail},
          {prefix + "_var", scenario, r.mean_abs_var_error, 0.0, tol, r.mean_abs_var_error < tol,
           expected_fail}};
}

using CheckFn = std::function<std::vector<Verdict>(CheckContext&)>;

const std::vector<std::pair<std::string, CheckFn>>& catalog() {
  static const std::vector<std::pair<std::string, CheckFn>> checks = {
      {"revuz_yor_energy",
       [](CheckContext& c) {
         return only(revuz_yor_verdicts(c.revuz_yor(SamplingMeasure::transformed), c.config().diagnostics.alpha, {}),
                     "revuz_yor_energy");
       }},
      {"zlogz_identity",
       [](CheckContext& c) {
         auto rows = only(martingale_verdicts(c.revuz_yor(SamplingMeasure::transformed), {}), "zlogz_identity");
         for (Verdict& v : only(martingale_verdicts(c.model_report(SamplingMeasure::transformed), {}), "zlogz_identity")) {
           rows.push_back(std::move(v));
         }
         return rows;
       }},
      {"martingale_mean",
       [](CheckContext& c) {
         const auto& t = c.config().diagnostics.mean_times;
         auto rows = only(martingale_verdicts(c.revuz_yor(SamplingMeasure::physical), t), "martingale_mean");
         for (Verdict& v : only(martingale_verdicts(c.model_report(SamplingMeasure::physical), t), "martingale_mean")) {
           rows.push_back(std::move(v));
         }
         return rows;
       }},
      {"maximal_bound",
       [](CheckContext& c) {
         auto rows = only(martingale_verdicts(c.revuz_yor(SamplingMeasure::transformed), {}), "maximal_bound");
         for (Verdict& v : only(martingale_verdicts(c.model_report(SamplingMeasure::transformed), {}), "maximal_bound")) {
           rows.push_back(std::move(v));
         }
         return rows;
       }},
      {"energy_identity",
       [](CheckContext& c) {
         auto rows = only(martingale_verdicts(c.revuz_yor(SamplingMeasure::physical), {}), "energy_identity");
         for (Verdict& v : only(martingale_verdicts(c.model_report(SamplingMeasure::physical), {}), "energy_identity")) {
           rows.push_back(std::move(v));
         }
         return rows;
       }},
      {"independent_energy", [](CheckContext& c) { return independent_energy_verdicts(c.independent()); }},
      {"dufresne",
       [](CheckContext& c) {
         const auto& d = c.config().diagnostics;
         const DufresneResult r =
             dufresne_check(d.n_paths, TimeGrid::make(d.dufresne_horizon, c.grid().dt), c.config().seed, c.exec());
         return std::vector<Verdict>{{"dufresne", "dufresne", r.estimate.value, r.target,
                                      3.0 * r.estimate.se + r.truncation_allowance, r.pass, false}};
       }},
      {"hitting",
       [](CheckContext& c) {
         const auto& d = c.config().diagnostics;
         const KazamakiResult r = kazamaki_gap_check(d.levels, d.n_paths, d.hitting_dt, c.config().seed, 5.0, c.exec());
         std::vector<Verdict> rows;
         for (const HittingRow& h : r.rows) {
           rows.push_back({fmt::format("hitting@n={}", h.level), "hitting", h.p_lower.value, h.target,
                           5.0 * h.p_lower.se, h.pass, false});
         }
         return rows;
       }},
      {"kalman_agreement",
       [](CheckContext& c) {
         require_linear(c, "kalman_agreement");
         const auto o = kalman_options(c);
         return kalman_rows(kalman_agreement(c.model(), c.model(), o), c.config().scenario, o.tolerance,
                            "kalman_agreement", false);
       }},
      {"kalman_ablation",
       [](CheckContext& c) {
         require_linear(c, "kalman_ablation");
         const auto o = kalman_options(c);
         return kalman_rows(kalman_agreement(c.model(), models::decorrelated(c.model()), o),
                            c.config().scenario, o.tolerance, "kalman_ablation", true);
       }},
      {"change_detection_agreement",
       [](CheckContext& c) {
         if (c.config().model.builtin != "change_detection") {
           throw ConfigError("config: diagnostics.checks: 'change_detection_agreement' needs the change_detection model");
         }
         const auto& d = c.config().diagnostics;
         ChangeDetectionAgreementOptions o;
         o.n_seeds = d.n_seeds;
         o.n_particles = d.n_particles;
         o.horizon = c.grid().horizon;
         o.dt = c.grid().dt;
         o.seed = c.config().seed;
         o.resample_threshold = c.config().filter.resample_threshold;
         o.tolerance = d.tolerance;
         o.exec = c.exec();
         const auto r = change_detection_agreement(c.config().model.change_detection, o);
         return std::vector<Verdict>{{"change_detection_agreement", c.config().scenario, r.mean_sup_gap, 0.0,
                                      d.tolerance, r.pass, false}};
       }},
      {"gronwall",
       [](CheckContext& c) {
         const auto& d = c.config().diagnostics;
         GronwallCheck g;
         if (c.config().model.builtin == "change_detection") {
           g = gronwall_change_detection_check(c.config().model.change_detection.b0, d.fixed_b, d.fixed_tau,
                                               c.grid(), d.n_paths, c.config().seed, c.exec());
         } else {
           g = gronwall_model_check(c.model(), c.grid(), d.n_paths, c.config().seed, c.exec());
         }
         return std::vector<Verdict>{{"gronwall", c.config().scenario, g.worst_margin, 0.0, 0.0, g.pass, false}};
       }},
      {"zakai_residual",
       [](CheckContext& c) {
         auto rows = residual_verdicts(c.residuals(ObservationMeasure::physical), c.config().scenario, false);
         return only(std::move(rows), "zakai");
       }},
      {"ks_residual",
       [](CheckContext& c) {
         auto rows = residual_verdicts(c.residuals(ObservationMeasure::physical), c.config().scenario, false);
         return only(std::move(rows), "ks");
       }},
      {"ks_residual_ablation",
       [](CheckContext& c) {
         auto rows = residual_verdicts(c.residuals(ObservationMeasure::reference), c.config().scenario, true);
         return only(std::move(rows), "ks_residual_ablation");
       }},
  };
  return checks;
}

void write_counterexample_csv(const CounterexampleSet& set, std::ostream& out) {
  for (std::size_t j = 0; j < set.columns.size(); ++j) out << (j ? "," : "") << set.columns[j];
  out << "\n";
  for (Eigen::Index i = 0; i < set.rows.rows(); ++i) {
    for (Eigen::Index j = 0; j < set.rows.cols(); ++j) {
      out << (j ? "," : "") << format_number(set.rows(i, j));
    }
    out << "\n";
  }
}

}  // namespace

Command parse_command(std::string_view name) {
  if (name == "simulate") return Command::simulate;
  if (name == "filter") return Command::filter;
  if (name == "verify") return Command::verify;
  if (name == "counterexample") return Command::counterexample;
  throw ConfigError(fmt::format("unknown command '{}'", name));
}

std::string to_string(Command c) {
  switch (c) {
    case Command::simulate: return "simulate";
    case Command::filter: return "filter";
    case Command::verify: return "verify";
    case Command::counterexample: return "counterexample";
  }
  return "?";
}

const std::vector<std::string>& check_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& entry : catalog()) n.push_back(entry.first);
    return n;
  }();
  return names;
}

std::vector<Verdict> run_check(const std::string& name, const ScenarioConfig& config, Exec exec) {
  CheckContext ctx(config, exec);
  for (const auto& [n, fn] : catalog()) {
    if (n == name) return fn(ctx);
  }
  throw ConfigError(fmt::format("config: diagnostics.checks: unknown check '{}'", name));
}

int cmd_simulate(const ScenarioConfig& config, std::ostream& log) {
  const SignalModel model = build_model(config.model);
  const TimeGrid grid = config.grid();
  const std::vector<PathBundle> paths = simulate_paths(model, grid, config.seed, config.simulate_paths);
  OutputSet out(config, Command::simulate);
  const bool single = paths.size() == 1;
  for (const PathBundle& p : paths) {
    const std::string stem = single ? "path" : fmt::format("path_{:04d}", p.path_index);
    std::ostringstream csv;
    write_path_csv(p, csv);
    out.add(stem + ".csv", csv.str());
    if (model.dim_l > 0) {
      std::ostringstream jumps;
      write_jump_log_csv(p, jumps);
      out.add(single ? "jumps.csv" : fmt::format("jumps_{:04d}.csv", p.path_index), jumps.str());
    }
  }
  out.write(log);
  return kOk;
}

int cmd_filter(const ScenarioConfig& config, std::ostream& log) {
  const SignalModel model = build_model(config.model);
  OutputSet out(config, Command::filter);
  PathBundle obs;
  if (!config.observations.empty()) {
    std::ifstream in(config.observations, std::ios::binary);
    if (!in) throw ConfigError(fmt::format("config: observations: cannot read '{}'", config.observations));
    obs = read_path_csv(in);
    if (obs.y.cols() != static_cast<Eigen::Index>(model.dim_y)) {
      throw ConfigError("config: observations: observation dimension does not match the model");
    }
  } else {
    obs = simulate_pair(model, config.grid(), config.seed, 0);
    std::ostringstream csv;
    write_path_csv(obs, csv);
    out.add("observations.csv", csv.str());
  }
  std::vector<TestFunction> battery = test_functions::battery(model.dim_x);
  const bool change = config.model.builtin == "change_detection";
  if (change) battery.push_back(models::change_indicator());
  FilterTrajectory traj = run_filter(model, obs.y, obs.grid, battery, config.filter);
  if (change) {
    // Grid-Bayes reference column next to the particle estimate.
    const std::vector<double> oracle =
        change_probability_trajectory(config.model.change_detection, obs.y, obs.grid);
    traj.labels.push_back("oracle_prob_change");
    traj.estimates.conservativeResize(Eigen::NoChange, traj.estimates.cols() + 1);
    for (std::size_t k = 0; k < oracle.size(); ++k) {
      traj.estimates(static_cast<Eigen::Index>(k), traj.estimates.cols() - 1) = oracle[k];
    }
  }
  std::ostringstream csv;
  write_filter_csv(traj, csv);
  out.add("filter.csv", csv.str());
  out.write(log);
  return kOk;
}

int cmd_verify(const ScenarioConfig& config, std::ostream& log) {
  if (config.diagnostics.checks.empty()) throw ConfigError("config: diagnostics.checks: no checks selected");
  CheckContext ctx(config, Exec::parallel);
  std::vector<Verdict> verdicts;
  for (const std::string& name : config.diagnostics.checks) {
    for (const auto& [n, fn] : catalog()) {
      if (n != name) continue;
      for (Verdict& v : fn(ctx)) verdicts.push_back(std::move(v));
    }
  }
  std::ostringstream csv;
  write_verdicts_csv(verdicts, csv);
  OutputSet out(config, Command::verify);
  out.add("verdicts.csv", csv.str());
  out.write(log);
  for (const Verdict& v : verdicts) {
    log << fmt::format("{:<5} {} [{}] estimate={} reference={} tolerance={}{}\n", v.pass ? "PASS" : "FAIL",
                       v.check, v.scenario, format_number(v.estimate), format_number(v.reference),
                       format_number(v.tolerance), v.expected_fail ? " (expected-fail control)" : "");
  }
  const std::size_t passed = count_passed(verdicts);
  log << fmt::format("passed {}/{}\n", passed, verdicts.size());
  return passed == verdicts.size() ? kOk : kCheckFailure;
}

int cmd_counterexample(const ScenarioConfig& config, std::ostream& log) {
  const auto& b = config.counterexample;
  const CounterexampleSet set =
      simulate_counterexample_paths(b.kind, b.params, config.grid(), config.seed, b.n_paths);
  std::ostringstream csv;
  write_counterexample_csv(set, csv);
  OutputSet out(config, Command::counterexample);
  out.add(to_string(b.kind) + ".csv", csv.str());
  out.write(log);
  return kOk;
}

int run(Command command, const RunOptions& options, std::ostream& log, std::ostream& err) {
  try {
    ScenarioConfig config = load_config(options.config, options.seed);
    if (options.out) config.output_dir = *options.out;
    if (options.workers > 0) set_workers(static_cast<int>(options.workers));
    switch (command) {
      case Command::simulate: return cmd_simulate(config, log);
      case Command::filter: return cmd_filter(config, log);
      case Command::verify: return cmd_verify(config, log);
      case Command::counterexample: return cmd_counterexample(config, log);
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kConfig;
  } catch (const ModelError& e) {
    err << "error: " << e.what() << "\n";
    return kConfig;
  } catch (const BlowUpError& e) {
    err << "error: " << e.what() << "\n";
    return kBlowUp;
  } catch (const FilterCollapse& e) {
    err << "error: " << e.what() << "\n";
    return kCollapse;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInternal;
  }
  return kInternal;
}

}  // namespace nlfilter::cli
