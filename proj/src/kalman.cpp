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


#include "nlfilter/kalman.hpp"

#include <fmt/format.h>

namespace nlfilter {

Matrix riccati_rhs(const LinearGaussianSpec& spec, const Matrix& p) {
  const Matrix gain = p * spec.sensor.transpose() + spec.sigma_bar;
  return spec.drift * p + p * spec.drift.transpose() + spec.sigma * spec.sigma.transpose() +
         spec.sigma_bar * spec.sigma_bar.transpose() - gain * gain.transpose();
}

std::vector<Matrix> riccati_trajectory(const LinearGaussianSpec& spec, const TimeGrid& grid) {
  spec.validate();
  std::vector<Matrix> out;
  out.reserve(grid.n_steps + 1);
  Matrix p = spec.prior_cov;
  out.push_back(p);
  const double dt = grid.dt;
  for (std::size_t k = 0; k < grid.n_steps; ++k) {
    const Matrix k1 = riccati_rhs(spec, p);
    const Matrix k2 = riccati_rhs(spec, p + 0.5 * dt * k1);
    const Matrix k3 = riccati_rhs(spec, p + 0.5 * dt * k2);
    const Matrix k4 = riccati_rhs(spec, p + dt * k3);
    p += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    p = 0.5 * (p + p.transpose()).eval();
    const double min_eig = Eigen::SelfAdjointEigenSolver<Matrix>(p).eigenvalues().minCoeff();
    if (!p.allFinite() || min_eig < -1e-10) {
      throw ModelError(fmt::format("Riccati covariance lost PSD at step {} (min eigenvalue {})",
                                   k + 1, min_eig));
    }
    out.push_back(p);
  }
  return out;
}

KalmanTrajectory kalman_bucy_oracle(const LinearGaussianSpec& spec, const RowMatrix& y,
                                    const TimeGrid& grid) {
  if (static_cast<std::size_t>(y.rows()) != grid.n_steps + 1 ||
      y.cols() != spec.sensor.rows()) {
    throw ModelError("kalman_bucy_oracle: observation path does not match grid/sensor");
  }
  KalmanTrajectory out;
  out.cov = riccati_trajectory(spec, grid);
  const auto d = spec.drift.rows();
  const auto m = spec.sensor.rows();
  const Vector c = spec.drift_offset.size() ? spec.drift_offset : Vector::Zero(d);
  const Vector h0 = spec.sensor_offset.size() ? spec.sensor_offset : Vector::Zero(m);
  Vector mean = spec.prior_mean;
  out.mean.push_back(mean);
  out.t.push_back(0.0);
  const double dt = grid.dt;
  for (std::size_t k = 0; k < grid.n_steps; ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    const Matrix gain = out.cov[k] * spec.sensor.transpose() + spec.sigma_bar;
    const Vector dy = (y.row(kk + 1) - y.row(kk)).transpose();
    const Vector innovation = dy - (spec.sensor * mean + h0) * dt;
    mean = mean + (spec.drift * mean + c) * dt + gain * innovation;
    out.mean.push_back(mean);
    out.t.push_back(grid.time(k + 1));
  }
  return out;
}

}  // namespace nlfilter
