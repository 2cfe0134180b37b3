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


#include "nlfilter/checks.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "nlfilter/change_detection.hpp"
#include "nlfilter/counterexamples.hpp"
#include "nlfilter/filter.hpp"
#include "nlfilter/kalman.hpp"
#include "nlfilter/stats.hpp"

namespace nlfilter {

namespace {

Verdict band(std::string check, std::string scenario, double estimate, double reference,
             double tolerance) {
  return {std::move(check), std::move(scenario), estimate, reference, tolerance,
          std::abs(estimate - reference) <= tolerance, false};
}

}  // namespace

double revuz_yor_closed_form(double alpha, double t) {
  const double a = 2.0 * alpha * t;
  return 0.25 * (std::exp(a) - a - 1.0);
}

std::vector<Verdict> martingale_verdicts(const DiagnosticsReport& report,
                                         const std::vector<double>& mean_times) {
  std::vector<Verdict> out;
  const std::string& sc = report.scenario;
  out.push_back(band("zlogz_identity", sc, report.z_log_z.value, 0.5 * report.transformed_energy.value,
                     3.0 * report.zlogz_minus_half_energy.se));
  for (const MeanCheck& mc : martingale_mean_check(report, mean_times)) {
    out.push_back(band(fmt::format("martingale_mean@t={}", mc.time), sc, mc.e_z.value, 1.0,
                       3.0 * mc.e_z.se));
  }
  const ZStarCheck zs = zstar_bound_check(report);
  out.push_back({"maximal_bound", sc, zs.lhs.value, zs.rhs, 3.0 * zs.se_combined, zs.pass, false});
  out.push_back(band("energy_identity", sc, report.transformed_energy.value,
                     report.z_times_plain.value, 3.0 * report.energy_identity_gap.se));
  return out;
}

std::vector<Verdict> revuz_yor_verdicts(const DiagnosticsReport& report, double alpha,
                                        const std::vector<double>& mean_times) {
  std::vector<Verdict> out;
  out.push_back(band("revuz_yor_energy", report.scenario, report.transformed_energy.value,
                     revuz_yor_closed_form(alpha, report.horizon),
                     3.0 * report.transformed_energy.se));
  for (Verdict& v : martingale_verdicts(report, mean_times)) out.push_back(std::move(v));
  return out;
}

std::vector<Verdict> independent_energy_verdicts(const DiagnosticsReport& report) {
  const double t = report.horizon;
  return {band("independent_energy", report.scenario, report.transformed_energy.value,
               report.plain_energy.value, 3.0 * report.energy_identity_gap.se),
          band("independent_plain_energy", report.scenario, report.plain_energy.value, 0.5 * t * t,
               3.0 * report.plain_energy.se)};
}

// --------------------------------------------------------------------------- Dufresne

DufresneResult dufresne_check(std::size_t n_paths, const TimeGrid& grid, std::uint64_t seed,
                              Exec exec) {
  if (n_paths < 2) throw ConfigError("dufresne: n_paths must be >= 2");
  DufresneResult out;
  out.target = std::exp(-2.0);
  out.truncation_allowance = std::exp(-0.5 * grid.horizon);
  if (grid.n_steps == 0) {
    // The truncated functional is identically 0, so P(X < 1) = 1.
    out.estimate = {1.0, 0.0};
    out.valid = false;
    out.truncation_warning = true;
    out.pass = false;
    return out;
  }
  std::vector<double> below(n_paths);
  for_each_index(
      exec, n_paths, [] { return 0; },
      [&](std::size_t i, int&) {
        auto rng = counterexample_stream(seed, CounterexampleKind::dufresne, 0, i);
        below[i] = dufresne_functional(grid, rng) < 1.0 ? 1.0 : 0.0;
      });
  RunningStats stats;
  for (double b : below) stats.add(b);
  out.estimate = stats.estimate();
  out.truncation_warning = out.truncation_allowance > 3.0 * out.estimate.se;
  out.pass = std::abs(out.estimate.value - out.target) <=
             3.0 * out.estimate.se + out.truncation_allowance;
  return out;
}

// --------------------------------------------------------------------------- hitting

double partial_sum(std::size_t n_terms) {
  double s = 0.0;
  for (std::size_t k = 1; k <= n_terms; ++k) {
    const double kd = static_cast<double>(k);
    s += kd / ((kd + 1.0) * (kd + 1.0));
  }
  return s;
}

KazamakiResult kazamaki_gap_check(const std::vector<double>& levels, std::size_t n_paths, double dt,
                                  std::uint64_t seed, double se_band, Exec exec) {
  if (n_paths < 2) throw ConfigError("hitting: n_paths must be >= 2");
  KazamakiResult out;
  for (double level : levels) {
    CounterexampleParams params;
    params.upper = level;
    const TimeGrid grid{0.0, dt, 0};
    const CounterexampleSet set =
        simulate_counterexample_paths(CounterexampleKind::hitting, params, grid, seed, n_paths, exec);
    RunningStats stats;
    HittingRow row;
    row.level = level;
    for (Eigen::Index i = 0; i < set.rows.rows(); ++i) {
      stats.add(set.rows(i, 2));
      if (set.rows(i, 3) != 0.0) ++row.capped;
    }
    row.p_lower = stats.estimate();
    row.target = level / (level + 1.0);
    row.pass = std::abs(row.p_lower.value - row.target) <= se_band * row.p_lower.se;
    out.rows.push_back(row);
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t n_terms : {10u, 100u, 1000u, 10000u}) {
    const double s = partial_sum(n_terms);
    out.partial_sums.push_back({n_terms, s});
    const double x = std::log(static_cast<double>(n_terms));
    sx += x;
    sy += s;
    sxx += x * x;
    sxy += x * s;
  }
  const double k = static_cast<double>(out.partial_sums.size());
  out.log_growth_slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  return out;
}

// --------------------------------------------------------------------------- Kalman agreement

KalmanAgreement kalman_agreement(const SignalModel& data_model, const SignalModel& filter_model,
                                 const KalmanAgreementOptions& options) {
  if (!data_model.linear) throw ModelError("kalman_agreement: data model is not linear-Gaussian");
  const TimeGrid grid = TimeGrid::make(options.horizon, options.dt);
  const std::vector<TestFunction> battery = {test_functions::coordinate(0),
                                             test_functions::product(0, 0)};
  KalmanAgreement out;
  FilterConfig config;
  config.n_particles = options.n_particles;
  config.resample_threshold = options.resample_threshold;
  config.seed = options.seed;
  config.exec = options.exec;
  for (std::size_t s = 0; s < options.n_seeds; ++s) {
    const PathBundle data = simulate_pair(data_model, grid, options.seed, s);
    config.run = s;
    const FilterTrajectory traj = run_filter(filter_model, data.y, grid, battery, config);
    const KalmanTrajectory oracle = kalman_bucy_oracle(*data_model.linear, data.y, grid);
    const auto last = static_cast<Eigen::Index>(grid.n_steps);
    const double pm = traj.estimates(last, 0);
    const double pv = traj.estimates(last, 1) - pm * pm;
    out.mean_errors.push_back(pm - oracle.mean.back()[0]);
    out.var_errors.push_back(pv - oracle.cov.back()(0, 0));
    out.oracle_var = oracle.cov.back()(0, 0);
  }
  for (std::size_t s = 0; s < options.n_seeds; ++s) {
    out.mean_abs_mean_error += std::abs(out.mean_errors[s]);
    out.mean_abs_var_error += std::abs(out.var_errors[s]);
  }
  const double ns = static_cast<double>(std::max<std::size_t>(options.n_seeds, 1));
  out.mean_abs_mean_error /= ns;
  out.mean_abs_var_error /= ns;
  out.pass = out.mean_abs_mean_error < options.tolerance && out.mean_abs_var_error < options.tolerance;
  return out;
}

// --------------------------------------------------------------------------- change detection

ChangeDetectionAgreement change_detection_agreement(const models::ChangeDetectionParams& params,
                                                    const ChangeDetectionAgreementOptions& options) {
  const TimeGrid grid = TimeGrid::make(options.horizon, options.dt);
  const SignalModel model = models::change_detection(params);
  const std::vector<TestFunction> battery = {models::change_indicator()};
  FilterConfig config;
  config.n_particles = options.n_particles;
  config.resample_threshold = options.resample_threshold;
  config.seed = options.seed;
  config.exec = options.exec;
  ChangeDetectionAgreement out;
  for (std::size_t s = 0; s < options.n_seeds; ++s) {
    const PathBundle data = simulate_pair(model, grid, options.seed, s);
    config.run = s;
    const FilterTrajectory traj = run_filter(model, data.y, grid, battery, config);
    const std::vector<double> oracle = change_probability_trajectory(params, data.y, grid);
    double sup = 0.0;
    for (std::size_t k = 0; k <= grid.n_steps; ++k) {
      sup = std::max(sup, std::abs(traj.estimates(static_cast<Eigen::Index>(k), 0) - oracle[k]));
    }
    out.sup_gaps.push_back(sup);
    out.mean_sup_gap += sup;
  }
  out.mean_sup_gap /= static_cast<double>(std::max<std::size_t>(options.n_seeds, 1));
  out.pass = out.mean_sup_gap < options.tolerance;
  return out;
}

// --------------------------------------------------------------------------- Gronwall

namespace {

std::size_t default_stride(const TimeGrid& grid) { return std::max<std::size_t>(1, grid.n_steps / 100); }

}  // namespace

GronwallCheck gronwall_model_check(const SignalModel& model, const TimeGrid& grid,
                                   std::size_t n_paths, std::uint64_t seed, Exec exec) {
  DiagnosticsOptions opt;
  opt.n_paths = n_paths;
  opt.record_stride = default_stride(grid);
  opt.exec = exec;
  const DiagnosticsReport rep = run_diagnostics(model_scenario(model, grid, seed), opt);
  const double e_u0 = model.initial_second_moment ? 1.0 + *model.initial_second_moment
                                                  : rep.zu_path.front().value;
  return gronwall_bound_check(rep, derived_gronwall_constant(model), e_u0, 2.0);
}

GronwallCheck gronwall_change_detection_check(double b0, double b, double tau, const TimeGrid& grid,
                                              std::size_t n_paths, std::uint64_t seed, Exec exec) {
  const SignalModel model = models::change_detection(models::ChangeDetectionParams::fixed(b0, b, tau));
  DiagnosticsOptions opt;
  opt.n_paths = n_paths;
  opt.record_stride = default_stride(grid);
  opt.exec = exec;
  const ControlFn u = [](ConstSpan, ConstSpan y) { return 1.0 + y[0] * y[0]; };
  const DiagnosticsReport rep = run_diagnostics(model_scenario(model, grid, seed, u), opt);
  // Y_0 = 0, so U_0 = 1; the strengthened estimate has rate c(b), not 2 c(b).
  return gronwall_bound_check(rep, change_detection_constant(b0, b), 1.0, 1.0);
}

// --------------------------------------------------------------------------- residuals

std::vector<Verdict> residual_verdicts(const ResidualReport& report, const std::string& scenario,
                                       bool ablation) {
  std::vector<Verdict> out;
  auto add_family = [&](const std::vector<ResidualStats>& family, const char* check, bool expected_fail) {
    for (const ResidualStats& rs : family) {
      if (rs.phi_label == "one") continue;
      Verdict v = band(check, fmt::format("{}:{}", scenario, rs.phi_label), rs.terminal.value, 0.0,
                       3.0 * rs.terminal.se);
      v.expected_fail = expected_fail;
      out.push_back(std::move(v));
    }
  };
  add_family(report.zakai, "zakai_residual", false);
  add_family(report.ks, "ks_residual", false);
  if (report.has_one) {
    out.push_back({"zakai_one_exact", scenario, report.zakai_one_deviation, 0.0, 0.0,
                   report.zakai_one_deviation == 0.0, false});
    out.push_back({"ks_one_exact", scenario, report.ks_one_max_abs, 0.0, 0.0,
                   report.ks_one_max_abs == 0.0, false});
  }
  if (ablation) add_family(report.ks_ablated, "ks_residual_ablation", true);
  return out;
}

}  // namespace nlfilter
