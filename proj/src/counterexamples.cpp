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


#include "nlfilter/counterexamples.hpp"

#include <bit>
#include <cmath>
#include <random>

#include <fmt/format.h>

namespace nlfilter {

CounterexampleKind parse_counterexample_kind(std::string_view name) {
  if (name == "revuz_yor") return CounterexampleKind::revuz_yor;
  if (name == "dufresne") return CounterexampleKind::dufresne;
  if (name == "hitting") return CounterexampleKind::hitting;
  throw ConfigError(fmt::format("unknown counterexample kind '{}'", name));
}

std::string to_string(CounterexampleKind kind) {
  switch (kind) {
    case CounterexampleKind::revuz_yor:
      return "revuz_yor";
    case CounterexampleKind::dufresne:
      return "dufresne";
    case CounterexampleKind::hitting:
      return "hitting";
  }
  return "unknown";
}

CounterRng counterexample_stream(std::uint64_t seed, CounterexampleKind kind, std::uint64_t tag,
                                 std::uint64_t path) {
  return CounterRng::for_coords(seed, StreamDomain::counterexample,
                                {static_cast<std::uint64_t>(kind), tag, path});
}

RevuzYorPath revuz_yor_path(double alpha, const TimeGrid& grid, CounterRng& rng) {
  if (!(alpha > 0.0)) throw ConfigError("revuz_yor: alpha must be > 0");
  const std::size_t n = grid.n_steps;
  RevuzYorPath out{std::vector<double>(n + 1, 0.0), std::vector<double>(n + 1, 0.0)};
  std::normal_distribution<double> normal;
  const double sqrt_dt = std::sqrt(grid.dt);
  for (std::size_t k = 0; k < n; ++k) {
    const double dw = sqrt_dt * normal(rng);
    const double h = alpha * out.w[k];
    out.log_z[k + 1] = out.log_z[k] + h * dw - 0.5 * h * h * grid.dt;
    out.w[k + 1] = out.w[k] + dw;
  }
  return out;
}

double dufresne_functional(const TimeGrid& grid, CounterRng& rng) {
  std::normal_distribution<double> normal;
  const double sqrt_dt = std::sqrt(grid.dt);
  const double drift = -0.5 * grid.dt;
  double log_e = 0.0;
  double prev = 1.0;
  double integral = 0.0;
  for (std::size_t k = 0; k < grid.n_steps; ++k) {
    log_e += drift + sqrt_dt * normal(rng);
    const double next = std::exp(log_e);
    integral += 0.5 * (prev + next) * grid.dt;
    prev = next;
  }
  return integral;
}

double default_hitting_cap(double upper) { return 50.0 * (upper + 1.0) * (upper + 1.0); }

HittingOutcome hitting_exit(double upper, double dt, double time_cap, CounterRng& rng) {
  if (!(upper > 0.0)) throw ConfigError("hitting: upper level must be > 0");
  if (!(dt > 0.0)) throw ConfigError("hitting: dt must be > 0");
  std::normal_distribution<double> normal;
  const double sqrt_dt = std::sqrt(dt);
  const auto max_steps = static_cast<std::uint64_t>(std::ceil(time_cap / dt));
  double w = 0.0;
  for (std::uint64_t k = 1; k <= max_steps; ++k) {
    w += sqrt_dt * normal(rng);
    if (w <= -1.0) return {true, false, static_cast<double>(k) * dt};
    if (w >= upper) return {false, false, static_cast<double>(k) * dt};
  }
  return {false, true, static_cast<double>(max_steps) * dt};
}

CounterexampleSet simulate_counterexample_paths(CounterexampleKind kind,
                                                const CounterexampleParams& params,
                                                const TimeGrid& grid, std::uint64_t seed,
                                                std::size_t n_paths, Exec exec) {
  CounterexampleSet out{kind, {}, {}};
  switch (kind) {
    case CounterexampleKind::revuz_yor:
      out.columns = {"path", "w_T", "log_z_T", "energy"};
      break;
    case CounterexampleKind::dufresne:
      out.columns = {"path", "x", "below_one"};
      break;
    case CounterexampleKind::hitting:
      out.columns = {"path", "exit_time", "hit_lower", "capped"};
      break;
  }
  out.rows = RowMatrix::Zero(static_cast<Eigen::Index>(n_paths),
                             static_cast<Eigen::Index>(out.columns.size()));
  const double cap = params.time_cap > 0.0 ? params.time_cap : default_hitting_cap(params.upper);
  const auto level_tag = std::bit_cast<std::uint64_t>(params.upper);
  for_each_index(
      exec, n_paths, [] { return 0; },
      [&](std::size_t i, int&) {
        const auto r = static_cast<Eigen::Index>(i);
        out.rows(r, 0) = static_cast<double>(i);
        switch (kind) {
          case CounterexampleKind::revuz_yor: {
            auto rng = counterexample_stream(seed, kind, 0, i);
            const RevuzYorPath path = revuz_yor_path(params.alpha, grid, rng);
            double energy = 0.0;
            for (std::size_t k = 0; k < grid.n_steps; ++k) {
              const double h = params.alpha * path.w[k];
              energy += std::exp(path.log_z[k]) * h * h * grid.dt;
            }
            out.rows(r, 1) = path.w.back();
            out.rows(r, 2) = path.log_z.back();
            out.rows(r, 3) = energy;
            break;
          }
          case CounterexampleKind::dufresne: {
            auto rng = counterexample_stream(seed, kind, 0, i);
            const double x = dufresne_functional(grid, rng);
            out.rows(r, 1) = x;
            out.rows(r, 2) = x < 1.0 ? 1.0 : 0.0;
            break;
          }
          case CounterexampleKind::hitting: {
            auto rng = counterexample_stream(seed, kind, level_tag, i);
            const HittingOutcome o = hitting_exit(params.upper, grid.dt, cap, rng);
            out.rows(r, 1) = o.exit_time;
            out.rows(r, 2) = o.hit_lower ? 1.0 : 0.0;
            out.rows(r, 3) = o.capped ? 1.0 : 0.0;
            break;
          }
        }
      });
  return out;
}

}  // namespace nlfilter
