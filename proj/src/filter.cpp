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


#include "nlfilter/filter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "nlfilter/girsanov.hpp"

namespace nlfilter {

void FilterConfig::validate() const {
  if (n_particles < 2) throw ConfigError("filter.n_particles must be >= 2");
  if (!(resample_threshold >= 0.0 && resample_threshold <= 1.0)) {
    throw ConfigError("filter.resample_threshold must lie in [0, 1]");
  }
  if (!(collapse_floor >= 1.0)) throw ConfigError("filter.collapse_floor must be >= 1");
}

ParticleCloud init_cloud(const SignalModel& model, const FilterConfig& config) {
  config.validate();
  const std::size_t n = config.n_particles;
  ParticleCloud cloud;
  cloud.states = RowMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(model.dim_x));
  cloud.log_weights.assign(n, 0.0);
  cloud.y = Vector::Zero(static_cast<Eigen::Index>(model.dim_y));
  for_each_index(
      config.exec, n, [] { return 0; },
      [&](std::size_t i, int&) {
        auto rng = CounterRng::for_coords(config.seed, StreamDomain::filter_init, {config.run, i});
        const MutSpan row = row_view(cloud.states, static_cast<Eigen::Index>(i));
        sample_initial(model, rng, row);
        if (!all_finite(row)) throw BlowUpError("non-finite initial particle", 0);
      });
  return cloud;
}

namespace {

double max_log_weight(const ParticleCloud& cloud) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double lw : cloud.log_weights) mx = std::max(mx, lw);
  return mx;
}

}  // namespace

double ess(const ParticleCloud& cloud) {
  const double mx = max_log_weight(cloud);
  if (!std::isfinite(mx)) return 0.0;
  double s = 0.0, s2 = 0.0;
  for (double lw : cloud.log_weights) {
    const double w = std::exp(lw - mx);
    s += w;
    s2 += w * w;
  }
  return s * s / s2;
}

std::vector<double> normalized_weights(const ParticleCloud& cloud) {
  const double mx = max_log_weight(cloud);
  std::vector<double> w(cloud.size());
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = std::exp(cloud.log_weights[i] - mx);
    s += w[i];
  }
  for (double& v : w) v /= s;
  return w;
}

void resample_systematic(ParticleCloud& cloud, double u) {
  const std::size_t n = cloud.size();
  const double mx = max_log_weight(cloud);
  std::vector<double> w(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = std::exp(cloud.log_weights[i] - mx);
    total += w[i];
  }
  cloud.log_mass += mx + std::log(total / static_cast<double>(n));

  RowMatrix next(cloud.states.rows(), cloud.states.cols());
  const double nd = static_cast<double>(n);
  double cumulative = w[0] / total;
  std::size_t src = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const double position = (u + static_cast<double>(j)) / nd;
    while (position > cumulative && src + 1 < n) {
      ++src;
      cumulative += w[src] / total;
    }
    next.row(static_cast<Eigen::Index>(j)) = cloud.states.row(static_cast<Eigen::Index>(src));
  }
  cloud.states = std::move(next);
  std::fill(cloud.log_weights.begin(), cloud.log_weights.end(), 0.0);
}

StepInfo step(ParticleCloud& cloud, const SignalModel& model, ConstSpan dy, double dt,
              const FilterConfig& config) {
  if (!(dt > 0.0)) throw ModelError("filter step: dt must be > 0");
  const std::size_t n = cloud.size();
  const std::size_t k = cloud.step;
  const ConstSpan y = as_span(std::as_const(cloud.y));

  struct Scratch {
    CoefficientValues c;
    Vector next;
  };
  for_each_index(
      config.exec, n,
      [&] { return Scratch{CoefficientValues(model), Vector(static_cast<Eigen::Index>(model.dim_x))}; },
      [&](std::size_t i, Scratch& s) {
        const auto ii = static_cast<Eigen::Index>(i);
        const MutSpan x = row_view(cloud.states, ii);
        evaluate_coefficients(model, x, y, s.c);
        if (!s.c.h.allFinite()) throw BlowUpError("non-finite sensor value", k + 1);
        cloud.log_weights[i] += log_weight_increment(as_span(std::as_const(s.c.h)), dy, dt);
        auto rng = CounterRng::for_coords(config.seed, StreamDomain::filter_step, {config.run, k, i});
        try {
          propagate_under_reference(model, s.c, x, dy, dt, rng, as_span(s.next));
        } catch (const BlowUpError&) {
          throw BlowUpError("non-finite particle state", k + 1);
        }
        std::copy(s.next.data(), s.next.data() + s.next.size(), x.begin());
      });

  for (std::size_t j = 0; j < dy.size(); ++j) cloud.y[static_cast<Eigen::Index>(j)] += dy[j];
  cloud.step = k + 1;
  cloud.t = static_cast<double>(k + 1) * dt;

  StepInfo info;
  info.ess = ess(cloud);
  if (!(info.ess >= config.collapse_floor)) {
    throw FilterCollapse(fmt::format("effective sample size {} below floor {}", info.ess,
                                     config.collapse_floor),
                         k + 1);
  }
  if (info.ess < config.resample_threshold * static_cast<double>(n)) {
    auto rng = CounterRng::for_coords(config.seed, StreamDomain::filter_resample, {config.run, k});
    resample_systematic(cloud, rng.uniform_open());
    info.resampled = true;
  }
  return info;
}

double rho_estimate(const ParticleCloud& cloud, const TestFunction& phi) {
  const double mx = max_log_weight(cloud);
  if (!std::isfinite(mx)) throw FilterCollapse("all particle weights vanished", cloud.step);
  const ConstSpan y = as_span(cloud.y);
  double s = 0.0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const double v = phi.value(row_view(cloud.states, static_cast<Eigen::Index>(i)), y);
    if (!std::isfinite(v)) throw ModelError(fmt::format("test function '{}' is not finite", phi.label));
    s += std::exp(cloud.log_weights[i] - mx) * v;
  }
  return std::exp(cloud.log_mass + mx) * (s / static_cast<double>(cloud.size()));
}

double pi_estimate(const ParticleCloud& cloud, const TestFunction& phi) {
  const double mx = max_log_weight(cloud);
  if (!std::isfinite(mx)) throw FilterCollapse("all particle weights vanished", cloud.step);
  const ConstSpan y = as_span(cloud.y);
  double s = 0.0, total = 0.0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const double w = std::exp(cloud.log_weights[i] - mx);
    const double v = phi.value(row_view(cloud.states, static_cast<Eigen::Index>(i)), y);
    if (!std::isfinite(v)) throw ModelError(fmt::format("test function '{}' is not finite", phi.label));
    s += w * v;
    total += w;
  }
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw FilterCollapse("degenerate particle mass", cloud.step);
  }
  return s / total;
}

FilterTrajectory run_filter(const SignalModel& model, const RowMatrix& y, const TimeGrid& grid,
                            const std::vector<TestFunction>& battery, const FilterConfig& config,
                            const StepObserver& observer) {
  const std::size_t n = grid.n_steps;
  if (static_cast<std::size_t>(y.rows()) != n + 1 ||
      static_cast<std::size_t>(y.cols()) != model.dim_y) {
    throw ModelError(fmt::format("run_filter: observation path is {}x{}, expected {}x{}", y.rows(),
                                 y.cols(), n + 1, model.dim_y));
  }
  FilterTrajectory out;
  for (const auto& phi : battery) out.labels.push_back(phi.label);
  out.estimates.resize(static_cast<Eigen::Index>(n + 1), static_cast<Eigen::Index>(battery.size()));

  const TestFunction one = test_functions::constant(1.0);
  ParticleCloud cloud = init_cloud(model, config);
  cloud.y = y.row(0).transpose();
  auto record = [&](std::size_t k, const StepInfo& info) {
    out.t.push_back(grid.time(k));
    for (std::size_t j = 0; j < battery.size(); ++j) {
      out.estimates(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) =
          pi_estimate(cloud, battery[j]);
    }
    out.rho1.push_back(rho_estimate(cloud, one));
    out.ess.push_back(info.ess);
    out.resampled.push_back(info.resampled ? 1 : 0);
  };
  record(0, StepInfo{ess(cloud), false});

  Vector dy(static_cast<Eigen::Index>(model.dim_y));
  for (std::size_t k = 0; k < n; ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    dy = (y.row(kk + 1) - y.row(kk)).transpose();
    if (observer) observer(k, cloud, as_span(std::as_const(dy)));
    const StepInfo info = step(cloud, model, as_span(std::as_const(dy)), grid.dt, config);
    // Keep the cloud's observation exactly on the supplied path.
    cloud.y = y.row(kk + 1).transpose();
    cloud.t = grid.time(k + 1);
    record(k + 1, info);
  }
  return out;
}

}  // namespace nlfilter
