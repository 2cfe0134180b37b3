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

#include "nlfilter/change_detection.hpp"
#include "nlfilter/checks.hpp"

namespace nlfilter {
namespace {

TEST(GridOracle, MassSumsToOneAfterEveryUpdate) {
  const auto params = models::ChangeDetectionParams::defaults();
  const TimeGrid g = TimeGrid::make(1.0, 1e-2);
  const PathBundle p = simulate_pair(models::change_detection(params), g, 3, 0);
  ChangeDetectionOracle oracle(params);
  for (Eigen::Index k = 0; k < 100; ++k) {
    oracle.update(g.time(static_cast<std::size_t>(k)), p.y(k, 0), p.y(k + 1, 0) - p.y(k, 0), g.dt);
    EXPECT_NEAR(oracle.posterior().mass.sum(), 1.0, 1e-12);
  }
}

TEST(GridOracle, SingleCellEqualsDirectLikelihood) {
  const auto params = models::ChangeDetectionParams::fixed(0.5, 1.3, 0.4);
  const TimeGrid g = TimeGrid::make(1.0, 1e-3);
  const PathBundle p = simulate_pair(models::change_detection(params), g, 8, 0);
  const GridPosterior post = change_detection_oracle(params, p.y, g);
  double ll = 0.0;
  for (std::size_t k = 0; k < g.n_steps; ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    const double t = g.time(k);
    const double h = (0.5 + (t >= 0.4 - 1e-9 ? 1.3 : 0.0)) * p.y(kk, 0);
    ll += h * (p.y(kk + 1, 0) - p.y(kk, 0)) - 0.5 * h * h * g.dt;
  }
  EXPECT_NEAR(post.log_likelihood(0, 0), ll, 1e-12 * std::abs(ll));
  EXPECT_DOUBLE_EQ(post.mass(0, 0), 1.0);
}

TEST(GridOracle, ChangeProbabilityStartsAtPrior) {
  const auto params = models::ChangeDetectionParams::defaults();
  const TimeGrid g = TimeGrid::make(1.0, 1e-2);
  const PathBundle p = simulate_pair(models::change_detection(params), g, 5, 0);
  const auto traj = change_probability_trajectory(params, p.y, g);
  ASSERT_EQ(traj.size(), 101u);
  EXPECT_NEAR(traj.front(), 1.0 / 21.0, 1e-12);
  const GridPosterior post = change_detection_oracle(params, p.y, g);
  EXPECT_NEAR(post.prob_change_by(2.0), 1.0, 1e-12);
  EXPECT_LE(post.prob_change_by(0.5), post.prob_change_by(0.8));
  double bsum = 0.0;
  for (double b : post.b_marginal()) bsum += b;
  EXPECT_NEAR(bsum, 1.0, 1e-12);
}

TEST(GridOracle, RejectsBadPriors) {
  models::ChangeDetectionParams p = models::ChangeDetectionParams::defaults();
  p.b_weights = {1.0, 2.0};
  EXPECT_THROW(ChangeDetectionOracle{p}, ModelError);
  p = models::ChangeDetectionParams::defaults();
  p.tau_grid.clear();
  EXPECT_THROW(ChangeDetectionOracle{p}, ModelError);
}

TEST(ChangeDetection, ParticleFilterTracksOracle) {
  ChangeDetectionAgreementOptions o;
  o.n_seeds = 2;
  o.n_particles = 3000;
  o.dt = 2e-3;
  const auto r = change_detection_agreement(models::ChangeDetectionParams::defaults(), o);
  EXPECT_EQ(r.sup_gaps.size(), 2u);
  EXPECT_LT(r.mean_sup_gap, 0.08);
}

}  // namespace
}  // namespace nlfilter
