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


#include <gtest/gtest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "nlfilter/checks.hpp"
#include "nlfilter/kalman.hpp"
#include "nlfilter/models.hpp"

namespace nlfilter {
namespace {

double stationary(const SignalModel& m) {
  return riccati_trajectory(*m.linear, TimeGrid::make(20.0, 1e-3)).back()(0, 0);
}

TEST(Riccati, StationaryAnchors) {
  // P^2 + 2P - 1 = 0
  EXPECT_NEAR(stationary(models::linear_gaussian()), std::sqrt(2.0) - 1.0, 1e-9);
  // -2P + 1.25 - (P + 0.5)^2 = 0, i.e. P^2 + 3P - 1 = 0
  EXPECT_NEAR(stationary(models::correlated_linear()), (-3.0 + std::sqrt(13.0)) / 2.0, 1e-9);
  // Decorrelated noise: -2P + 1.25 - P^2 = 0
  EXPECT_NEAR(stationary(models::decorrelated(models::correlated_linear())), 0.5, 1e-9);
}

TEST(Riccati, RhsVanishesAtStationaryPoint) {
  const Matrix p = Matrix::Constant(1, 1, std::sqrt(2.0) - 1.0);
  EXPECT_NEAR(riccati_rhs(*models::linear_gaussian().linear, p)(0, 0), 0.0, 1e-15);
}

TEST(Riccati, StaysSymmetricPsdInTwoDimensions) {
  LinearGaussianSpec s;
  s.drift = (Matrix(2, 2) << -1.0, 0.5, 0.0, -2.0).finished();
  s.sigma = (Matrix(2, 2) << 1.0, 0.0, 0.0, 0.5).finished();
  s.sigma_bar = (Matrix(2, 1) << 0.2, 0.0).finished();
  s.sensor = (Matrix(1, 2) << 1.0, 1.0).finished();
  s.prior_mean = Vector::Zero(2);
  s.prior_cov = Matrix::Identity(2, 2);
  for (const Matrix& p : riccati_trajectory(s, TimeGrid::make(3.0, 1e-3))) {
    EXPECT_NEAR((p - p.transpose()).norm(), 0.0, 1e-14);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(p);
    EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-10);
  }
}

TEST(KalmanBucy, MeanFollowsCorrelatedGain) {
  // Scalar oracle recomputed by hand with the same Euler mean / RK4 variance split.
  const SignalModel m = models::correlated_linear();
  const TimeGrid g = TimeGrid::make(0.2, 1e-3);
  const PathBundle p = simulate_pair(m, g, 4, 0);
  const KalmanTrajectory kb = kalman_bucy_oracle(*m.linear, p.y, g);
  const auto cov = riccati_trajectory(*m.linear, g);
  double mean = 1.0;
  for (Eigen::Index k = 0; k < 200; ++k) {
    const double pk = cov[static_cast<std::size_t>(k)](0, 0);
    const double dy = p.y(k + 1, 0) - p.y(k, 0);
    mean += -mean * g.dt + (pk + 0.5) * (dy - mean * g.dt);
  }
  EXPECT_NEAR(kb.mean.back()[0], mean, 1e-12);
  EXPECT_NEAR(kb.cov.back()(0, 0), cov.back()(0, 0), 1e-15);
}

TEST(KalmanBucy, AffineOffsetsShiftTheMean) {
  LinearGaussianSpec s = models::scalar_linear_spec({});
  s.drift_offset = Vector::Constant(1, 2.0);
  const TimeGrid g = TimeGrid::make(1.0, 1e-3);
  const RowMatrix y = RowMatrix::Zero(1001, 1);
  LinearGaussianSpec plain = models::scalar_linear_spec({});
  const auto a = kalman_bucy_oracle(s, y, g);
  const auto b = kalman_bucy_oracle(plain, y, g);
  EXPECT_GT(a.mean.back()[0], b.mean.back()[0]);
}

TEST(KalmanBucy, ParticleFilterAgreesOnFewSeeds) {
  KalmanAgreementOptions o;
  o.n_seeds = 2;
  o.n_particles = 4000;
  o.dt = 2e-3;
  const auto r = kalman_agreement(models::linear_gaussian(), models::linear_gaussian(), o);
  EXPECT_LT(r.mean_abs_mean_error, 0.05);
  EXPECT_LT(r.mean_abs_var_error, 0.05);
}

}  // namespace
}  // namespace nlfilter
