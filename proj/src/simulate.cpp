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


#include "nlfilter/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "small_buffer.hpp"

namespace nlfilter {

TimeGrid TimeGrid::make(double horizon, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError(fmt::format("grid.dt must be > 0 (got {})", dt));
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) {
    throw ConfigError(fmt::format("grid.horizon must be >= 0 (got {})", horizon));
  }
  const double ratio = horizon / dt;
  const double n = std::round(ratio);
  if (std::abs(n * dt - horizon) > 1e-9 * std::max(1.0, horizon)) {
    throw ConfigError(fmt::format("grid.horizon {} is not a multiple of grid.dt {}", horizon, dt));
  }
  return {horizon, dt, static_cast<std::size_t>(n)};
}

std::size_t TimeGrid::index_of(double t) const {
  if (!(t > 0.0)) return 0;
  const auto k = static_cast<std::size_t>(std::llround(t / dt));
  return std::min(k, n_steps);
}

void sample_levy_increment(const LevySpec& levy, double dt, CounterRng& rng, MutSpan increment,
                           std::vector<Vector>* marks) {
  const std::size_t r = levy.dim();
  const Vector b = levy.drift_b();
  const Vector comp = levy.compensator();
  for (std::size_t l = 0; l < r; ++l) {
    const auto li = static_cast<Eigen::Index>(l);
    increment[l] = (b[li] - comp[li]) * dt;
  }
  if (levy.jump_rate == 0.0) return;
  std::poisson_distribution<long> count_law(levy.jump_rate * dt);
  const long count = count_law(rng);
  if (count == 0) return;
  detail::SmallBuffer mark(r);
  for (long e = 0; e < count; ++e) {
    levy.sample_mark(rng, mark.span());
    for (std::size_t l = 0; l < r; ++l) increment[l] += mark[l];
    if (marks) marks->emplace_back(as_vector(mark.cspan()));
  }
}

LevyIncrement sample_levy_increment(const LevySpec& levy, double dt, CounterRng& rng) {
  if (!(dt > 0.0)) throw ModelError("sample_levy_increment: dt must be > 0");
  LevyIncrement out{Vector::Zero(levy.dim()), {}};
  sample_levy_increment(levy, dt, rng, as_span(out.increment), &out.marks);
  return out;
}

void euler_step(const CoefficientValues& c, ConstSpan x, ConstSpan dv, ConstSpan dw, ConstSpan dl,
                double dt, MutSpan x_next) {
  const auto d = static_cast<Eigen::Index>(x.size());
  Eigen::Map<Vector> next(x_next.data(), d);
  next = as_vector(x) + c.f * dt;
  if (c.sigma.cols() > 0) next.noalias() += c.sigma * as_vector(dv);
  if (c.sigma_bar.cols() > 0) next.noalias() += c.sigma_bar * as_vector(dw);
  if (c.sigma_tilde.cols() > 0) next.noalias() += c.sigma_tilde * as_vector(dl);
}

void sample_initial(const SignalModel& model, CounterRng& rng, MutSpan out) {
  if (model.initial_law) {
    model.initial_law(rng, out);
  } else {
    std::fill(out.begin(), out.end(), 0.0);
  }
}

CounterRng path_stream(std::uint64_t seed, std::uint64_t path_index) {
  return CounterRng::for_coords(seed, StreamDomain::path, {path_index});
}

PathBundle simulate_pair(const SignalModel& model, const TimeGrid& grid, CounterRng& rng) {
  const std::size_t n = grid.n_steps;
  const auto d = static_cast<Eigen::Index>(model.dim_x);
  const auto m = static_cast<Eigen::Index>(model.dim_y);
  const auto p = static_cast<Eigen::Index>(model.dim_v);
  const auto r = static_cast<Eigen::Index>(model.dim_l);
  const auto rows = static_cast<Eigen::Index>(n);

  PathBundle out;
  out.grid = grid;
  out.x = RowMatrix::Zero(rows + 1, d);
  out.y = RowMatrix::Zero(rows + 1, m);
  out.w_increments = RowMatrix::Zero(rows, m);
  out.v_increments = RowMatrix::Zero(rows, p);
  out.levy_increments = RowMatrix::Zero(rows, r);

  sample_initial(model, rng, row_view(out.x, 0));
  if (!all_finite(row_view(std::as_const(out.x), 0))) throw BlowUpError("non-finite initial state", 0);

  const bool jumps = model.levy && r > 0;
  const double sqrt_dt = std::sqrt(grid.dt);
  std::normal_distribution<double> normal;
  CoefficientValues c(model);
  std::vector<Vector> marks;
  for (std::size_t k = 0; k < n; ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    const ConstSpan xk = row_view(std::as_const(out.x), kk);
    const ConstSpan yk = row_view(std::as_const(out.y), kk);
    evaluate_coefficients(model, xk, yk, c);

    MutSpan dv = row_view(out.v_increments, kk);
    MutSpan dw = row_view(out.w_increments, kk);
    MutSpan dl = row_view(out.levy_increments, kk);
    for (double& v : dv) v = sqrt_dt * normal(rng);
    for (double& w : dw) w = sqrt_dt * normal(rng);
    if (jumps) {
      marks.clear();
      sample_levy_increment(*model.levy, grid.dt, rng, dl, &marks);
      for (auto& mark : marks) out.jump_log.push_back({k, std::move(mark)});
    }

    euler_step(c, xk, dv, dw, dl, grid.dt, row_view(out.x, kk + 1));
    for (Eigen::Index j = 0; j < m; ++j) {
      out.y(kk + 1, j) = out.y(kk, j) + c.h[j] * grid.dt + out.w_increments(kk, j);
    }
    if (!all_finite(row_view(std::as_const(out.x), kk + 1)) ||
        !all_finite(row_view(std::as_const(out.y), kk + 1))) {
      throw BlowUpError(fmt::format("model '{}': non-finite state", model.name), k + 1);
    }
  }
  return out;
}

PathBundle simulate_pair(const SignalModel& model, const TimeGrid& grid, std::uint64_t seed,
                         std::uint64_t path_index) {
  CounterRng rng = path_stream(seed, path_index);
  PathBundle out = simulate_pair(model, grid, rng);
  out.seed = seed;
  out.path_index = path_index;
  return out;
}

std::vector<PathBundle> simulate_paths(const SignalModel& model, const TimeGrid& grid,
                                       std::uint64_t seed, std::size_t n_paths, Exec exec) {
  std::vector<PathBundle> out(n_paths);
  for_each_index(
      exec, n_paths, [] { return 0; },
      [&](std::size_t i, int&) { out[i] = simulate_pair(model, grid, seed, i); });
  return out;
}

void propagate_under_reference(const SignalModel& model, const CoefficientValues& c, ConstSpan x,
                               ConstSpan dy, double dt, CounterRng& rng, MutSpan x_next) {
  const std::size_t d = x.size();
  const std::size_t p = model.dim_v;
  const std::size_t r = model.dim_l;
  detail::SmallBuffer dv(p), dl(r);
  const double sqrt_dt = std::sqrt(dt);
  std::normal_distribution<double> normal;
  for (std::size_t k = 0; k < p; ++k) dv[k] = sqrt_dt * normal(rng);
  if (model.levy && r > 0) sample_levy_increment(*model.levy, dt, rng, dl.span(), nullptr);

  // The W-increment of the P-dynamics is dy - h dt under the reference measure.
  const std::size_t m = dy.size();
  detail::SmallBuffer dw(m);
  for (std::size_t j = 0; j < m; ++j) dw[j] = dy[j] - c.h[static_cast<Eigen::Index>(j)] * dt;
  euler_step(c, x, dv.cspan(), dw.cspan(), dl.cspan(), dt, x_next);
  for (std::size_t i = 0; i < d; ++i) {
    if (!std::isfinite(x_next[i])) throw BlowUpError("non-finite particle state", 0);
  }
}

Vector propagate_under_reference(const SignalModel& model, ConstSpan x, ConstSpan y, ConstSpan dy,
                                 double dt, CounterRng& rng) {
  if (!(dt > 0.0)) throw ModelError("propagate_under_reference: dt must be > 0");
  CoefficientValues c(model);
  evaluate_coefficients(model, x, y, c);
  Vector out(static_cast<Eigen::Index>(x.size()));
  propagate_under_reference(model, c, x, dy, dt, rng, as_span(out));
  return out;
}

}  // namespace nlfilter
