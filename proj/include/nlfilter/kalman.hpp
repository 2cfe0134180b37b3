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


#ifndef NLFILTER_KALMAN_HPP
#define NLFILTER_KALMAN_HPP

#include <vector>

#include "nlfilter/model.hpp"
#include "nlfilter/simulate.hpp"

namespace nlfilter {

struct KalmanTrajectory {
  std::vector<double> t;
  std::vector<Vector> mean;
  std::vector<Matrix> cov;
};

/// Right-hand side A P + P A^T + S_v S_v^T + S_bar S_bar^T - (P H^T + S_bar)(P H^T + S_bar)^T.
Matrix riccati_rhs(const LinearGaussianSpec& spec, const Matrix& p);

/**
 * Kalman-Bucy filter with correlated gain K = P H^T + S_bar: RK4 for the Riccati equation,
 * Euler for dm = (A m + c) dt + K (dy - (H m + h0) dt). Throws ModelError if P loses
 * positive semidefiniteness.
 */
KalmanTrajectory kalman_bucy_oracle(const LinearGaussianSpec& spec, const RowMatrix& y,
                                    const TimeGrid& grid);

/// Covariance only (independent of the data), on the same grid.
std::vector<Matrix> riccati_trajectory(const LinearGaussianSpec& spec, const TimeGrid& grid);

}  // namespace nlfilter

#endif  // NLFILTER_KALMAN_HPP
