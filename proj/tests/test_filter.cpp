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

#include "nlfilter/filter.hpp"
#include "nlfilter/models.hpp"

namespace nlfilter {
namespace {

FilterConfig config(std::size_t n, std::uint64_t seed = 1) {
  FilterConfig c;
  c.n_particles = n;
  c.seed = seed;
  return c;
}

TEST(FilterConfig, Validation) {
  EXPECT_THROW(config(1).validate(), ConfigError);
  FilterConfig c = config(10);
  c.resample_threshold = 1.5;
  EXPECT_THROW(c.validate(), ConfigError);
  c.resample_threshold = 0.5;
  c.collapse_floor = 0.5;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Filter, InitialCloudSamplesPrior) {
  const SignalModel m = models::linear_gaussian();
  const ParticleCloud c = init_cloud(m, config(20000));
  EXPECT_DOUBLE_EQ(ess(c), 20000.0);
  const double mean = c.states.col(0).mean();
  const double var = (c.states.col(0).array() - mean).square().mean();
  EXPECT_NEAR(mean, 1.0, 4.0 / std::sqrt(20000.0));
  EXPECT_NEAR(var, 1.0, 0.05);
}

TEST(Filter, PiIsScaleInvariantInTheWeights) {
  const SignalModel m = models::linear_gaussian();
  ParticleCloud c = init_cloud(m, config(500));
  for (std::size_t i = 0; i < c.size(); ++i) c.log_weights[i] = 0.01 * static_cast<double>(i % 37);
  const auto phi = test_functions::product(0, 0);
  const double pi = pi_estimate(c, phi), rho = rho_estimate(c, phi);
  for (double& lw : c.log_weights) lw += 300.0;
  EXPECT_NEAR(pi_estimate(c, phi), pi, 1e-12 * std::abs(pi));
  EXPECT_NEAR(rho_estimate(c, phi) / std::exp(300.0), rho, 1e-12 * std::abs(rho));
  EXPECT_DOUBLE_EQ(pi_estimate(c, test_functions::constant(1.0)), 1.0);
}

TEST(Filter, ResamplingKeepsMassAndRestoresEss) {
  const SignalModel m = models::linear_gaussian();
  ParticleCloud c = init_cloud(m, config(1000));
  for (std::size_t i = 0; i < c.size(); ++i) c.log_weights[i] = -0.5 * c.states(static_cast<Eigen::Index>(i), 0);
  const double rho1 = rho_estimate(c, test_functions::constant(1.0));
  resample_systematic(c, 0.37);
  EXPECT_NEAR(rho_estimate(c, test_functions::constant(1.0)), rho1, 1e-12 * rho1);
  EXPECT_DOUBLE_EQ(ess(c), 1000.0);
}

TEST(Filter, SystematicResamplingCounts) {
  ParticleCloud c;
  c.states = RowMatrix(4, 1);
  c.states << 0.0, 1.0, 2.0, 3.0;
  c.log_weights = {std::log(0.1), std::log(0.2), std::log(0.3), std::log(0.4)};
  c.y = Vector::Zero(1);
  // 10 offspring expected at n w = {0.4, 0.8, 1.2, 1.6}: systematic gives floor or ceil.
  resample_systematic(c, 0.5);
  std::array<int, 4> counts{};
  for (Eigen::Index i = 0; i < 4; ++i) ++counts[static_cast<std::size_t>(c.states(i, 0))];
  const std::array<double, 4> expected = {0.4, 0.8, 1.2, 1.6};
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_GE(counts[i], static_cast<int>(std::floor(expected[i])));
    EXPECT_LE(counts[i], static_cast<int>(std::ceil(expected[i])));
  }
}

TEST(Filter, OneColumnIsExactlyOne) {
  const SignalModel m = models::jump_ou();
  const TimeGrid g = TimeGrid::make(0.5, 1e-3);
  const PathBundle p = simulate_pair(m, g, 2, 0);
  const auto traj = run_filter(m, p.y, g, test_functions::battery(1), config(300));
  ASSERT_EQ(traj.labels.front(), "one");
  for (Eigen::Index k = 0; k < traj.estimates.rows(); ++k) EXPECT_EQ(traj.estimates(k, 0), 1.0);
  EXPECT_EQ(traj.t.size(), 501u);
  EXPECT_EQ(traj.rho1.front(), 1.0);
}

TEST(Filter, SerialAndParallelAgreeBitwise) {
  const SignalModel m = models::correlated_linear();
  const TimeGrid g = TimeGrid::make(0.3, 1e-3);
  const PathBundle p = simulate_pair(m, g, 3, 0);
  FilterConfig a = config(400, 9), b = config(400, 9);
  a.exec = Exec::serial;
  b.exec = Exec::parallel;
  const auto ta = run_filter(m, p.y, g, test_functions::battery(1), a);
  const auto tb = run_filter(m, p.y, g, test_functions::battery(1), b);
  EXPECT_EQ(ta.estimates, tb.estimates);
  EXPECT_EQ(ta.resampled, tb.resampled);
}

TEST(Filter, DegenerateCloudCollapses) {
  models::ScalarLinearParams sharp;
  sharp.sensor = 100.0;
  const SignalModel m = models::linear_gaussian(sharp);
  const TimeGrid g = TimeGrid::make(1.0, 1e-3);
  const PathBundle p = simulate_pair(m, g, 1, 0);
  EXPECT_THROW(run_filter(m, p.y, g, test_functions::battery(1), config(2)), FilterCollapse);
}

TEST(Filter, StepWeightIncrementUsesPreStepSensor) {
  const SignalModel m = models::linear_gaussian();
  FilterConfig c = config(5);
  c.resample_threshold = 0.0;
  ParticleCloud cloud = init_cloud(m, c);
  const RowMatrix before = cloud.states;
  const Vector dy = Vector::Constant(1, 0.05);
  step(cloud, m, as_span(dy), 1e-2, c);
  for (std::size_t i = 0; i < 5; ++i) {
    const double h = before(static_cast<Eigen::Index>(i), 0);
    EXPECT_NEAR(cloud.log_weights[i], h * 0.05 - 0.5 * h * h * 1e-2, 1e-15);
  }
  EXPECT_EQ(cloud.step, 1u);
  EXPECT_DOUBLE_EQ(cloud.y[0], 0.05);
}

}  // namespace
}  // namespace nlfilter
