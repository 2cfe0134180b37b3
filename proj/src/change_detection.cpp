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


#include "nlfilter/change_detection.hpp"

#include <cmath>
#include <limits>

namespace nlfilter {

namespace {

RowMatrix normalize_mass(const RowMatrix& log_post) {
  const double mx = log_post.maxCoeff();
  if (!std::isfinite(mx)) throw ModelError("change detection oracle: degenerate normalizer");
  RowMatrix mass = (log_post.array() - mx).exp().matrix();
  const double total = mass.sum();
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw ModelError("change detection oracle: degenerate normalizer");
  }
  mass /= total;
  return mass;
}

}  // namespace

std::vector<double> GridPosterior::b_marginal() const {
  std::vector<double> out(b_grid.size(), 0.0);
  for (std::size_t i = 0; i < b_grid.size(); ++i) out[i] = mass.row(static_cast<Eigen::Index>(i)).sum();
  return out;
}

double GridPosterior::prob_change_by(double s) const {
  double p = 0.0;
  for (std::size_t j = 0; j < tau_grid.size(); ++j) {
    if (s - tau_grid[j] >= -models::kClockTolerance) p += mass.col(static_cast<Eigen::Index>(j)).sum();
  }
  return p;
}

ChangeDetectionOracle::ChangeDetectionOracle(const models::ChangeDetectionParams& params)
    : params_(params),
      b_prior_(params.b_prior()),
      tau_prior_(params.tau_prior()),
      log_lik_(RowMatrix::Zero(static_cast<Eigen::Index>(params.b_grid.size()),
                               static_cast<Eigen::Index>(params.tau_grid.size()))) {}

void ChangeDetectionOracle::update(double t_k, double y_k, double dy, double dt) {
  for (std::size_t i = 0; i < params_.b_grid.size(); ++i) {
    for (std::size_t j = 0; j < params_.tau_grid.size(); ++j) {
      const bool changed = t_k - params_.tau_grid[j] >= -models::kClockTolerance;
      const double h = (params_.b0 + (changed ? params_.b_grid[i] : 0.0)) * y_k;
      log_lik_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += h * dy - 0.5 * h * h * dt;
    }
  }
  t_ = t_k + dt;
}

GridPosterior ChangeDetectionOracle::posterior() const {
  GridPosterior out;
  out.b_grid = params_.b_grid;
  out.tau_grid = params_.tau_grid;
  out.log_likelihood = log_lik_;
  RowMatrix log_post = log_lik_;
  for (Eigen::Index i = 0; i < log_post.rows(); ++i) {
    for (Eigen::Index j = 0; j < log_post.cols(); ++j) {
      const double prior = b_prior_[static_cast<std::size_t>(i)] * tau_prior_[static_cast<std::size_t>(j)];
      log_post(i, j) = prior > 0.0 ? log_post(i, j) + std::log(prior)
                                   : -std::numeric_limits<double>::infinity();
    }
  }
  out.mass = normalize_mass(log_post);
  out.t = t_;
  return out;
}

double ChangeDetectionOracle::prob_change_by(double s) const { return posterior().prob_change_by(s); }

GridPosterior change_detection_oracle(const models::ChangeDetectionParams& params,
                                      const RowMatrix& y, const TimeGrid& grid) {
  ChangeDetectionOracle oracle(params);
  for (std::size_t k = 0; k < grid.n_steps; ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    oracle.update(grid.time(k), y(kk, 0), y(kk + 1, 0) - y(kk, 0), grid.dt);
  }
  GridPosterior out = oracle.posterior();
  out.t = grid.time(grid.n_steps);
  return out;
}

std::vector<double> change_probability_trajectory(const models::ChangeDetectionParams& params,
                                                  const RowMatrix& y, const TimeGrid& grid) {
  ChangeDetectionOracle oracle(params);
  std::vector<double> out;
  out.reserve(grid.n_steps + 1);
  out.push_back(oracle.prob_change_by(0.0));
  for (std::size_t k = 0; k < grid.n_steps; ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    oracle.update(grid.time(k), y(kk, 0), y(kk + 1, 0) - y(kk, 0), grid.dt);
    out.push_back(oracle.prob_change_by(grid.time(k + 1)));
  }
  return out;
}

}  // namespace nlfilter
