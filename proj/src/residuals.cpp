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


#include "nlfilter/residuals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "nlfilter/stats.hpp"

namespace nlfilter {

namespace {

struct RunResult {
  std::vector<double> zakai, ks, ks_ablated;  // n_phi x n_rec
  double zakai_one_deviation = 0.0;
  double ks_one_max_abs = 0.0;
};

RowMatrix observation_path(const SignalModel& model, const ResidualOptions& o, std::size_t run) {
  if (o.measure == ObservationMeasure::physical) return simulate_pair(model, o.grid, o.seed, run).y;
  const auto n = static_cast<Eigen::Index>(o.grid.n_steps);
  const auto m = static_cast<Eigen::Index>(model.dim_y);
  RowMatrix y = RowMatrix::Zero(n + 1, m);
  auto rng = CounterRng::for_coords(o.seed, StreamDomain::residual_run, {run});
  std::normal_distribution<double> normal;
  const double sqrt_dt = std::sqrt(o.grid.dt);
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index j = 0; j < m; ++j) y(k + 1, j) = y(k, j) + sqrt_dt * normal(rng);
  }
  return y;
}

}  // namespace

ResidualReport equation_residuals(const SignalModel& model, const std::vector<TestFunction>& battery,
                                  const ResidualOptions& options) {
  if (options.n_runs < 2) throw ConfigError("residuals: n_runs must be >= 2");
  if (options.record_stride == 0) throw ConfigError("residuals: record_stride must be >= 1");
  options.filter.validate();
  const TimeGrid& grid = options.grid;
  const std::size_t n = grid.n_steps;
  const std::size_t n_phi = battery.size();
  const std::size_t m = model.dim_y;
  const double dt = grid.dt;

  std::vector<std::size_t> recorded;
  for (std::size_t k = 0; k <= n; k += options.record_stride) recorded.push_back(k);
  if (recorded.back() != n) recorded.push_back(n);
  const std::size_t n_rec = recorded.size();

  std::size_t one = n_phi;
  for (std::size_t q = 0; q < n_phi; ++q) {
    if (battery[q].label == "one") one = q;
  }

  std::vector<RunResult> runs(options.n_runs);
  for_each_index(
      options.exec, options.n_runs, [] { return 0; },
      [&](std::size_t r, int&) {
        const RowMatrix y = observation_path(model, options, r);
        FilterConfig fc = options.filter;
        fc.seed = options.seed;
        fc.run = r;
        fc.exec = Exec::serial;
        ParticleCloud cloud = init_cloud(model, fc);
        cloud.y = y.row(0).transpose();

        RunResult& out = runs[r];
        out.zakai.assign(n_phi * n_rec, 0.0);
        out.ks.assign(n_phi * n_rec, 0.0);
        out.ks_ablated.assign(n_phi * n_rec, 0.0);

        std::vector<double> rho0(n_phi), pi0(n_phi);
        std::vector<double> acc_zakai(n_phi, 0.0), acc_ks(n_phi, 0.0), acc_ab(n_phi, 0.0);
        double acc_one_direct = 0.0;
        std::vector<double> sv(n_phi), sa(n_phi), sd(n_phi * m), sb(n_phi * m), sh(m);
        CoefficientValues c(model);
        Vector dy(static_cast<Eigen::Index>(m));
        std::size_t next_rec = 0;

        for (std::size_t k = 0; k <= n; ++k) {
          const bool last = k == n;
          const ConstSpan yk = as_span(std::as_const(cloud.y));
          double mx = -std::numeric_limits<double>::infinity();
          for (double lw : cloud.log_weights) mx = std::max(mx, lw);
          if (!std::isfinite(mx)) throw FilterCollapse("all particle weights vanished", k);

          std::fill(sv.begin(), sv.end(), 0.0);
          std::fill(sa.begin(), sa.end(), 0.0);
          std::fill(sd.begin(), sd.end(), 0.0);
          std::fill(sb.begin(), sb.end(), 0.0);
          std::fill(sh.begin(), sh.end(), 0.0);
          double s = 0.0;
          for (std::size_t i = 0; i < cloud.size(); ++i) {
            const ConstSpan x = row_view(std::as_const(cloud.states), static_cast<Eigen::Index>(i));
            const double w = std::exp(cloud.log_weights[i] - mx);
            s += w;
            if (!last) {
              evaluate_coefficients(model, x, yk, c);
              for (std::size_t j = 0; j < m; ++j) sh[j] += w * c.h[static_cast<Eigen::Index>(j)];
            }
            for (std::size_t q = 0; q < n_phi; ++q) {
              const TestFunction& phi = battery[q];
              sv[q] += w * phi.value(x, yk);
              if (last) continue;
              sa[q] += w * apply_generator(model, c, phi, x, yk, options.quad).value;
              for (std::size_t j = 0; j < m; ++j) {
                sd[q * m + j] += w * apply_D(c, phi, x, yk, j);
                sb[q * m + j] += w * apply_correlation(c, phi, x, yk, j);
              }
            }
          }
          const double nd = static_cast<double>(cloud.size());
          const double e = std::exp(cloud.log_mass + mx);

          if (k == 0) {
            for (std::size_t q = 0; q < n_phi; ++q) {
              rho0[q] = e * (sv[q] / nd);
              pi0[q] = sv[q] / s;
            }
          }
          if (next_rec < n_rec && recorded[next_rec] == k) {
            for (std::size_t q = 0; q < n_phi; ++q) {
              const std::size_t idx = q * n_rec + next_rec;
              out.zakai[idx] = e * (sv[q] / nd) - rho0[q] - acc_zakai[q];
              out.ks[idx] = sv[q] / s - pi0[q] - acc_ks[q];
              out.ks_ablated[idx] = sv[q] / s - pi0[q] - acc_ab[q];
            }
            if (one < n_phi) {
              out.ks_one_max_abs =
                  std::max(out.ks_one_max_abs, std::abs(out.ks[one * n_rec + next_rec]));
            }
            ++next_rec;
          }
          if (last) {
            if (one < n_phi) {
              const double direct = e * (sv[one] / nd) - rho0[one] - acc_one_direct;
              out.zakai_one_deviation = std::abs(out.zakai[one * n_rec + n_rec - 1] - direct);
            }
            break;
          }

          const auto kk = static_cast<Eigen::Index>(k);
          dy = (y.row(kk + 1) - y.row(kk)).transpose();
          double one_inc = 0.0;
          for (std::size_t j = 0; j < m; ++j) one_inc += (sh[j] / nd) * dy[static_cast<Eigen::Index>(j)];
          acc_one_direct += e * one_inc;
          for (std::size_t q = 0; q < n_phi; ++q) {
            double zakai_inc = (sa[q] / nd) * dt;
            const double pi_phi = sv[q] / s;
            double ks_inc = (sa[q] / s) * dt;
            double ab_inc = ks_inc;
            for (std::size_t j = 0; j < m; ++j) {
              const double dyj = dy[static_cast<Eigen::Index>(j)];
              zakai_inc += (sd[q * m + j] / nd) * dyj;
              const double pi_h = sh[j] / s;
              const double innovation = dyj - pi_h * dt;
              ks_inc += (sd[q * m + j] / s - pi_h * pi_phi) * innovation;
              ab_inc += ((sd[q * m + j] - sb[q * m + j]) / s - pi_h * pi_phi) * innovation;
            }
            acc_zakai[q] += e * zakai_inc;
            acc_ks[q] += ks_inc;
            acc_ab[q] += ab_inc;
          }

          step(cloud, model, as_span(std::as_const(dy)), dt, fc);
          cloud.y = y.row(kk + 1).transpose();
        }
      });

  ResidualReport report;
  report.has_one = one < n_phi;
  auto reduce = [&](auto member) {
    std::vector<ResidualStats> out(n_phi);
    for (std::size_t q = 0; q < n_phi; ++q) {
      std::vector<RunningStats> stats(n_rec);
      for (const RunResult& run : runs) {
        const std::vector<double>& v = run.*member;
        for (std::size_t i = 0; i < n_rec; ++i) stats[i].add(v[q * n_rec + i]);
      }
      ResidualStats& rs = out[q];
      rs.phi_label = battery[q].label;
      rs.n_runs = options.n_runs;
      for (std::size_t i = 0; i < n_rec; ++i) {
        rs.times.push_back(grid.time(recorded[i]));
        rs.trajectory.push_back(stats[i].estimate());
      }
      rs.terminal = rs.trajectory.back();
    }
    return out;
  };
  report.zakai = reduce(&RunResult::zakai);
  report.ks = reduce(&RunResult::ks);
  report.ks_ablated = reduce(&RunResult::ks_ablated);
  for (const RunResult& run : runs) {
    report.zakai_one_deviation = std::max(report.zakai_one_deviation, run.zakai_one_deviation);
    report.ks_one_max_abs = std::max(report.ks_one_max_abs, run.ks_one_max_abs);
  }
  return report;
}

}  // namespace nlfilter
