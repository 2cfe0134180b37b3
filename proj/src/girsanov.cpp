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


#include "nlfilter/girsanov.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <utility>

#include <fmt/format.h>

#include "nlfilter/counterexamples.hpp"
#include "nlfilter/stats.hpp"

namespace nlfilter {

double log_weight_increment(ConstSpan h, ConstSpan dy, double dt) {
  if (!(dt > 0.0)) throw ModelError("log_weight_increment: dt must be > 0");
  if (h.size() != dy.size()) throw ModelError("log_weight_increment: dimension mismatch");
  double dot = 0.0, sq = 0.0;
  for (std::size_t j = 0; j < h.size(); ++j) {
    dot += h[j] * dy[j];
    sq += h[j] * h[j];
  }
  const double out = dot - 0.5 * sq * dt;
  if (!std::isfinite(out)) throw ModelError("log_weight_increment: non-finite input");
  return out;
}

WeightTrajectory weight_trajectory(const SignalModel& model, const PathBundle& path) {
  const std::size_t n = path.grid.n_steps;
  WeightTrajectory out{path.grid, std::vector<double>(n + 1, 0.0), std::vector<double>(n, 0.0)};
  Vector h = Vector::Zero(static_cast<Eigen::Index>(model.dim_y));
  Vector dy(static_cast<Eigen::Index>(model.dim_y));
  for (std::size_t k = 0; k < n; ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    if (model.sensor) model.sensor(row_view(path.x, kk), row_view(path.y, kk), as_span(h));
    dy = (path.y.row(kk + 1) - path.y.row(kk)).transpose();
    out.energy_integrand[k] = std::exp(out.log_z[k]) * h.squaredNorm();
    out.log_z[k + 1] = out.log_z[k] + log_weight_increment(as_span(h), as_span(dy), path.grid.dt);
  }
  return out;
}

// --------------------------------------------------------------------------- scenarios

namespace {

void shape(DrivingPath& p, std::size_t n, std::size_t m, bool with_u) {
  const auto rows = static_cast<Eigen::Index>(n);
  const auto cols = static_cast<Eigen::Index>(m);
  if (p.h.rows() != rows + 1 || p.h.cols() != cols) p.h.resize(rows + 1, cols);
  if (p.dw.rows() != rows || p.dw.cols() != cols) p.dw.resize(rows, cols);
  if (with_u) {
    p.u.resize(n + 1);
  } else {
    p.u.clear();
  }
}

}  // namespace

Scenario revuz_yor_scenario(double alpha, const TimeGrid& grid, std::uint64_t seed) {
  if (!(alpha > 0.0)) throw ConfigError("revuz_yor: alpha must be > 0");
  Scenario s{fmt::format("revuz_yor(alpha={})", alpha), grid, seed, {}, {}};
  auto make = [alpha, grid, seed](bool transformed) {
    return [alpha, grid, seed, transformed](std::size_t path, DrivingPath& out) {
      shape(out, grid.n_steps, 1, true);
      // Under P these are the draws of revuz_yor_path for this (seed, path).
      auto rng = counterexample_stream(seed, CounterexampleKind::revuz_yor, transformed ? 1 : 0, path);
      std::normal_distribution<double> normal;
      const double sqrt_dt = std::sqrt(grid.dt);
      double w = 0.0;
      for (std::size_t k = 0; k < grid.n_steps; ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        out.h(kk, 0) = alpha * w;
        out.u[k] = 1.0 + w * w;
        out.dw(kk, 0) = sqrt_dt * normal(rng) + (transformed ? alpha * w * grid.dt : 0.0);
        w += out.dw(kk, 0);
      }
      out.h(static_cast<Eigen::Index>(grid.n_steps), 0) = alpha * w;
      out.u[grid.n_steps] = 1.0 + w * w;
    };
  };
  s.sampler = make(false);
  s.transformed_sampler = make(true);
  return s;
}

Scenario zero_scenario(const TimeGrid& grid, std::uint64_t seed) {
  Scenario s{"zero", grid, seed, {}, {}};
  s.sampler = [grid, seed](std::size_t path, DrivingPath& out) {
    shape(out, grid.n_steps, 1, true);
    auto rng = CounterRng::for_coords(seed, StreamDomain::diagnostics, {0, path});
    std::normal_distribution<double> normal;
    const double sqrt_dt = std::sqrt(grid.dt);
    out.h.setZero();
    std::fill(out.u.begin(), out.u.end(), 1.0);
    for (std::size_t k = 0; k < grid.n_steps; ++k) {
      out.dw(static_cast<Eigen::Index>(k), 0) = sqrt_dt * normal(rng);
    }
  };
  s.transformed_sampler = s.sampler;
  return s;
}

Scenario independent_scenario(const TimeGrid& grid, std::uint64_t seed) {
  Scenario s{"independent", grid, seed, {}, {}};
  auto make = [grid, seed](bool transformed) {
    return [grid, seed, transformed](std::size_t path, DrivingPath& out) {
      shape(out, grid.n_steps, 1, true);
      auto rng = CounterRng::for_coords(seed, StreamDomain::diagnostics, {transformed ? 2u : 1u, path});
      std::normal_distribution<double> normal;
      const double sqrt_dt = std::sqrt(grid.dt);
      double b = 0.0;
      for (std::size_t k = 0; k < grid.n_steps; ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        out.h(kk, 0) = std::abs(b);
        out.u[k] = 1.0 + b * b;
        out.dw(kk, 0) = sqrt_dt * normal(rng) + (transformed ? std::abs(b) * grid.dt : 0.0);
        b += sqrt_dt * normal(rng);
      }
      out.h(static_cast<Eigen::Index>(grid.n_steps), 0) = std::abs(b);
      out.u[grid.n_steps] = 1.0 + b * b;
    };
  };
  s.sampler = make(false);
  s.transformed_sampler = make(true);
  return s;
}

Scenario model_scenario(const SignalModel& model, const TimeGrid& grid, std::uint64_t seed,
                        ControlFn u) {
  if (!u) {
    u = [](ConstSpan x, ConstSpan) {
      double s = 1.0;
      for (double v : x) s += v * v;
      return s;
    };
  }
  Scenario s{model.name, grid, seed, {}, {}};
  s.sampler = [model, grid, seed, u](std::size_t path, DrivingPath& out) {
    shape(out, grid.n_steps, model.dim_y, true);
    const PathBundle bundle = simulate_pair(model, grid, seed, path);
    Vector h = Vector::Zero(static_cast<Eigen::Index>(model.dim_y));
    for (std::size_t k = 0; k <= grid.n_steps; ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      const ConstSpan x = row_view(bundle.x, kk);
      const ConstSpan y = row_view(bundle.y, kk);
      if (model.sensor) model.sensor(x, y, as_span(h));
      out.h.row(kk) = -h.transpose();
      out.u[k] = u(x, y);
    }
    out.dw = bundle.w_increments;
  };
  s.transformed_sampler = [model, grid, seed, u](std::size_t path, DrivingPath& out) {
    shape(out, grid.n_steps, model.dim_y, true);
    auto rng = CounterRng::for_coords(seed, StreamDomain::diagnostics, {3, path});
    std::normal_distribution<double> normal;
    const double sqrt_dt = std::sqrt(grid.dt);
    const auto d = static_cast<Eigen::Index>(model.dim_x);
    const auto m = static_cast<Eigen::Index>(model.dim_y);
    Vector x(d), x_next(d), y = Vector::Zero(m), dy(m);
    sample_initial(model, rng, as_span(x));
    CoefficientValues c(model);
    for (std::size_t k = 0;; ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      evaluate_coefficients(model, as_span(std::as_const(x)), as_span(std::as_const(y)), c);
      out.h.row(kk) = -c.h.transpose();
      out.u[k] = u(as_span(std::as_const(x)), as_span(std::as_const(y)));
      if (k == grid.n_steps) break;
      for (Eigen::Index j = 0; j < m; ++j) dy[j] = sqrt_dt * normal(rng);
      // W = Y - int h ds.
      out.dw.row(kk) = (dy - c.h * grid.dt).transpose();
      try {
        propagate_under_reference(model, c, as_span(std::as_const(x)), as_span(std::as_const(dy)),
                                  grid.dt, rng, as_span(x_next));
      } catch (const BlowUpError&) {
        throw BlowUpError(fmt::format("model '{}': non-finite state", model.name), k + 1);
      }
      x.swap(x_next);
      y += dy;
    }
  };
  return s;
}

// --------------------------------------------------------------------------- diagnostics

namespace {

enum Scalar : std::size_t {
  kZ,
  kEnergy,
  kZLogZ,
  kZStar,
  kPlain,
  kZPlain,
  kZLogZGap,
  kIdentityGap,
  kZStarExcess,
  kScalarCount
};

enum Trace : std::size_t { kTraceZ, kTraceZU, kTraceZH2, kTraceH2, kTraceCount };

struct PathResult {
  std::array<double, kScalarCount> scalars{};
  std::vector<double> traces;  // n_rec x kTraceCount
  bool overflow = false;
  bool has_u = false;
};

}  // namespace

double maximal_bound_constant() { return (std::numbers::e + 1.0) / (std::numbers::e - 1.0); }
double maximal_bound_slope() { return std::numbers::e / (2.0 * (std::numbers::e - 1.0)); }

DiagnosticsReport run_diagnostics(const Scenario& scenario, const DiagnosticsOptions& options) {
  if (options.n_paths < 2) throw ConfigError("diagnostics: n_paths must be >= 2");
  if (options.record_stride == 0) throw ConfigError("diagnostics: record_stride must be >= 1");
  const bool transformed = options.measure == SamplingMeasure::transformed;
  const PathSampler& sampler = transformed ? scenario.transformed_sampler : scenario.sampler;
  if (!sampler) {
    throw ConfigError(fmt::format("scenario '{}' has no sampler for the requested measure", scenario.name));
  }
  const TimeGrid& grid = scenario.grid;
  const std::size_t n = grid.n_steps;
  const double dt = grid.dt;

  std::vector<std::size_t> recorded;
  for (std::size_t k = 0; k <= n; k += options.record_stride) recorded.push_back(k);
  if (recorded.back() != n) recorded.push_back(n);
  const std::size_t n_rec = recorded.size();
  const double slope = maximal_bound_slope();

  std::array<RunningStats, kScalarCount> scalar_stats;
  std::vector<std::array<RunningStats, kTraceCount>> trace_stats(n_rec);
  std::size_t overflow = 0;
  bool any_u = false;

  struct Scratch {
    DrivingPath path;
    std::vector<double> log_z, u, h2;  // at recorded times
  };

  const std::size_t block = std::max<std::size_t>(1, options.block);
  std::vector<PathResult> results(std::min(block, options.n_paths));
  for (std::size_t start = 0; start < options.n_paths; start += block) {
    const std::size_t count = std::min(block, options.n_paths - start);
    for_each_index(
        options.exec, count, [&] { return Scratch{{}, std::vector<double>(n_rec), std::vector<double>(n_rec), std::vector<double>(n_rec)}; },
        [&](std::size_t j, Scratch& sc) {
          DrivingPath& dp = sc.path;
          sampler(start + j, dp);
          PathResult& r = results[j];
          r.traces.assign(n_rec * kTraceCount, 0.0);
          r.overflow = false;
          r.has_u = !dp.u.empty();
          double log_z = 0.0, log_z_max = 0.0, energy = 0.0, plain = 0.0;
          std::size_t next_rec = 0;
          for (std::size_t k = 0; k <= n; ++k) {
            const auto kk = static_cast<Eigen::Index>(k);
            const double h2 = dp.h.row(kk).squaredNorm();
            if (next_rec < n_rec && recorded[next_rec] == k) {
              sc.log_z[next_rec] = log_z;
              sc.u[next_rec] = r.has_u ? dp.u[k] : 0.0;
              sc.h2[next_rec] = h2;
              ++next_rec;
            }
            if (k == n) break;
            // Under P the energy integrand carries Z_k; under Z dP the weight is absorbed.
            energy += (transformed ? 1.0 : std::exp(log_z)) * h2 * dt;
            plain += h2 * dt;
            log_z += dp.h.row(kk).dot(dp.dw.row(kk)) - 0.5 * h2 * dt;
            if (!(std::abs(log_z) <= options.log_overflow_guard)) r.overflow = true;
            log_z_max = std::max(log_z_max, log_z);
          }
          auto& s = r.scalars;
          if (transformed) {
            const double inv_z = std::exp(-log_z);
            s[kZ] = 1.0;
            s[kEnergy] = energy;
            s[kZLogZ] = log_z;
            s[kZStar] = std::exp(log_z_max - log_z);
            s[kPlain] = plain * inv_z;
            s[kZPlain] = plain;
            for (std::size_t i = 0; i < n_rec; ++i) {
              double* t = r.traces.data() + i * kTraceCount;
              t[kTraceZ] = std::exp(sc.log_z[i] - log_z);
              t[kTraceZU] = sc.u[i];
              t[kTraceZH2] = sc.h2[i];
              t[kTraceH2] = sc.h2[i] * inv_z;
            }
          } else {
            const double z = std::exp(log_z);
            s[kZ] = z;
            s[kEnergy] = energy;
            s[kZLogZ] = z * log_z;
            s[kZStar] = std::exp(log_z_max);
            s[kPlain] = plain;
            s[kZPlain] = z * plain;
            for (std::size_t i = 0; i < n_rec; ++i) {
              double* t = r.traces.data() + i * kTraceCount;
              const double zi = std::exp(sc.log_z[i]);
              t[kTraceZ] = zi;
              t[kTraceZU] = zi * sc.u[i];
              t[kTraceZH2] = zi * sc.h2[i];
              t[kTraceH2] = sc.h2[i];
            }
          }
          s[kZLogZGap] = s[kZLogZ] - 0.5 * s[kEnergy];
          s[kIdentityGap] = s[kEnergy] - s[kZPlain];
          s[kZStarExcess] = s[kZStar] - slope * s[kEnergy];
          for (double v : s) {
            if (!std::isfinite(v)) r.overflow = true;
          }
        });
    for (std::size_t j = 0; j < count; ++j) {
      const PathResult& r = results[j];
      if (r.overflow) {
        ++overflow;
        continue;
      }
      any_u = any_u || r.has_u;
      for (std::size_t q = 0; q < kScalarCount; ++q) scalar_stats[q].add(r.scalars[q]);
      for (std::size_t i = 0; i < n_rec; ++i) {
        for (std::size_t q = 0; q < kTraceCount; ++q) {
          trace_stats[i][q].add(r.traces[i * kTraceCount + q]);
        }
      }
    }
  }

  DiagnosticsReport rep;
  rep.scenario = scenario.name;
  rep.measure = options.measure;
  rep.seed = scenario.seed;
  rep.horizon = grid.horizon;
  rep.n_paths = options.n_paths;
  rep.overflow_paths = overflow;
  rep.e_z = scalar_stats[kZ].estimate();
  rep.transformed_energy = scalar_stats[kEnergy].estimate();
  rep.z_log_z = scalar_stats[kZLogZ].estimate();
  rep.z_star = scalar_stats[kZStar].estimate();
  rep.plain_energy = scalar_stats[kPlain].estimate();
  rep.z_times_plain = scalar_stats[kZPlain].estimate();
  rep.zlogz_minus_half_energy = scalar_stats[kZLogZGap].estimate();
  rep.energy_identity_gap = scalar_stats[kIdentityGap].estimate();
  rep.zstar_excess = scalar_stats[kZStarExcess].estimate();
  for (std::size_t i = 0; i < n_rec; ++i) {
    rep.times.push_back(grid.time(recorded[i]));
    rep.e_z_path.push_back(trace_stats[i][kTraceZ].estimate());
    if (any_u) rep.zu_path.push_back(trace_stats[i][kTraceZU].estimate());
    rep.zh2_path.push_back(trace_stats[i][kTraceZH2].estimate());
    rep.h2_path.push_back(trace_stats[i][kTraceH2].estimate());
  }
  return rep;
}

ZStarCheck zstar_bound_check(const DiagnosticsReport& report) {
  ZStarCheck out;
  out.lhs = report.z_star;
  out.rhs = maximal_bound_constant() + maximal_bound_slope() * report.transformed_energy.value;
  out.se_combined = report.zstar_excess.se;
  // lhs - slope * energy <= constant + 3 SE, with the SE of the per-path difference.
  out.pass = report.zstar_excess.value <= maximal_bound_constant() + 3.0 * out.se_combined;
  return out;
}

std::vector<MeanCheck> martingale_mean_check(const DiagnosticsReport& report,
                                             const std::vector<double>& times) {
  std::vector<MeanCheck> out;
  for (double t : times) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < report.times.size(); ++i) {
      if (std::abs(report.times[i] - t) < std::abs(report.times[best] - t)) best = i;
    }
    const Estimate e = report.e_z_path.at(best);
    out.push_back({report.times[best], e, std::abs(e.value - 1.0) <= 3.0 * e.se});
  }
  return out;
}

GronwallCheck gronwall_bound_check(const DiagnosticsReport& report, double c, double e_u0,
                                   double rate_multiplier) {
  if (report.zu_path.empty()) throw ConfigError("gronwall check: scenario has no control process");
  GronwallCheck out;
  out.c = c;
  out.rate_multiplier = rate_multiplier;
  out.e_u0 = e_u0;
  out.times = report.times;
  out.zu = report.zu_path;
  out.worst_margin = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < out.times.size(); ++i) {
    const double bound = std::exp(rate_multiplier * c * out.times[i]) * e_u0;
    out.bound.push_back(bound);
    out.worst_margin = std::max(out.worst_margin, out.zu[i].value - 3.0 * out.zu[i].se - bound);
  }
  out.pass = out.worst_margin <= 0.0;
  return out;
}

double derived_gronwall_constant(const SignalModel& model) {
  // With U = 1 + |x|^2: |x|(1 + |x|) <= 3U/2 and (1 + |x|)^2 <= 2U.
  const double k = model.linear_growth_K;
  const double s_bar = model.sigma_bar_bound.value_or(k);
  double b = 0.0, tr_m2 = 0.0;
  if (model.levy) {
    b = model.levy->drift_b().norm();
    tr_m2 = model.levy->second_moment().trace();
  }
  const double drift_part = 3.0 * k * (1.0 + b) + 2.0 * k * k * (2.0 + tr_m2);
  const double covariation_part = 3.0 * k * s_bar;
  return std::max(drift_part + covariation_part, 2.0 * k * k);
}

double change_detection_constant(double b0, double b) { return 4.0 + (b0 + b) * (b0 + b); }

}  // namespace nlfilter
