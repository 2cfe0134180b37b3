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


#ifndef NLFILTER_CHANGE_DETECTION_HPP
#define NLFILTER_CHANGE_DETECTION_HPP

#include <vector>

#include "nlfilter/models.hpp"
#include "nlfilter/simulate.hpp"

namespace nlfilter {

/// Posterior over the (b, tau) grid after observing y on [0, t].
struct GridPosterior {
  std::vector<double> b_grid;
  std::vector<double> tau_grid;
  RowMatrix log_likelihood;  // nb x ntau
  RowMatrix mass;            // nb x ntau, sums to 1
  double t = 0.0;

  std::vector<double> b_marginal() const;
  /// Posterior P(T <= s | Y_[0,t]).
  double prob_change_by(double s) const;
};

/**
 * Exact discrete likelihood on the grid, updated step by step with the same left-point
 * increments as the particle filter: h_{b,tau}(y_k) dy_k - h_{b,tau}(y_k)^2 dt / 2 with
 * h_{b,tau}(y) = (b0 + b 1{t_k >= tau}) y.
 */
class ChangeDetectionOracle {
 public:
  explicit ChangeDetectionOracle(const models::ChangeDetectionParams& params);

  /// Consumes one observation increment starting at grid time t_k.
  void update(double t_k, double y_k, double dy, double dt);
  GridPosterior posterior() const;
  double prob_change_by(double s) const;
  double t() const { return t_; }

 private:
  models::ChangeDetectionParams params_;
  std::vector<double> b_prior_, tau_prior_;
  RowMatrix log_lik_;
  double t_ = 0.0;
};

GridPosterior change_detection_oracle(const models::ChangeDetectionParams& params,
                                      const RowMatrix& y, const TimeGrid& grid);

/// P(T <= t_k | Y_[0, t_k]) for k = 0..n.
std::vector<double> change_probability_trajectory(const models::ChangeDetectionParams& params,
                                                  const RowMatrix& y, const TimeGrid& grid);

}  // namespace nlfilter

#endif  // NLFILTER_CHANGE_DETECTION_HPP
