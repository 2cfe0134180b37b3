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

#include "nlfilter/model.hpp"
#include "nlfilter/models.hpp"

namespace nlfilter {
namespace {

Vector v1(double a) { return Vector::Constant(1, a); }

TEST(Generator, LinearGaussianPolynomials) {
  const SignalModel m = models::linear_gaussian();
  const Vector x = v1(0.7), y = v1(0.0);
  const auto gx = apply_generator(m, test_functions::coordinate(0), as_span(x), as_span(y));
  const auto gx2 = apply_generator(m, test_functions::product(0, 0), as_span(x), as_span(y));
  EXPECT_TRUE(gx.exact);
  EXPECT_NEAR(gx.value, -0.7, 1e-14);
  // 2 x (a x) + sigma^2
  EXPECT_NEAR(gx2.value, 2.0 * 0.7 * -0.7 + 1.0, 1e-14);
  EXPECT_NEAR(apply_generator(m, test_functions::constant(1.0), as_span(x), as_span(y)).value, 0.0, 0.0);
}

TEST(Generator, CorrelatedAddsSigmaBarToDiffusion) {
  const SignalModel m = models::correlated_linear();
  const Vector x = v1(0.7), y = v1(0.0);
  const auto g = apply_generator(m, test_functions::product(0, 0), as_span(x), as_span(y));
  EXPECT_NEAR(g.value, -0.98 + 1.0 + 0.25, 1e-14);
  EXPECT_NEAR(apply_correlation(m, test_functions::coordinate(0), as_span(x), as_span(y), 0), 0.5, 1e-15);
  EXPECT_NEAR(apply_correlation(m, test_functions::product(0, 0), as_span(x), as_span(y), 0), 0.7, 1e-15);
  // D phi = h phi + B phi + d phi / dy
  EXPECT_NEAR(apply_D(m, test_functions::coordinate(0), as_span(x), as_span(y), 0), 0.49 + 0.5, 1e-14);
}

TEST(Generator, ObservationDirectionTerms) {
  // phi = cos(x) sin(y) on the correlated model; the pair (X, Y) has d<X, Y> = sigma_bar dt.
  const SignalModel m = models::correlated_linear();
  const double x0 = 0.7, y0 = 0.3;
  const Vector x = v1(x0), y = v1(y0);
  const double fx = -std::sin(x0) * std::sin(y0);
  const double fxx = -std::cos(x0) * std::sin(y0);
  const double fy = std::cos(x0) * std::cos(y0);
  const double fyy = -std::cos(x0) * std::sin(y0);
  const double fxy = -std::sin(x0) * std::cos(y0);
  const double expected = -x0 * fx + 0.5 * 1.25 * fxx + x0 * fy + 0.5 * fyy + 0.5 * fxy;
  const auto phi = test_functions::cos_sin(0, 0);
  EXPECT_NEAR(apply_generator(m, phi, as_span(x), as_span(y)).value, expected, 1e-13);
  const double d_expected = x0 * std::cos(x0) * std::sin(y0) + 0.5 * fx + fy;
  EXPECT_NEAR(apply_D(m, phi, as_span(x), as_span(y), 0), d_expected, 1e-13);
}

TEST(Generator, JumpOuExactAtoms) {
  const SignalModel m = models::jump_ou();
  const Vector x = v1(0.7), y = v1(0.0);
  // Marks {0.5: 1/2, 1.5: 1/4, -1: 1/4}: E[rho 1{|rho| >= 1}] = 0.125, E[rho^2] = 0.9375.
  const double b = 0.125;
  const auto gx = apply_generator(m, test_functions::coordinate(0), as_span(x), as_span(y));
  const auto gx2 = apply_generator(m, test_functions::product(0, 0), as_span(x), as_span(y));
  EXPECT_TRUE(gx2.exact);
  EXPECT_NEAR(gx.value, -0.7 + b, 1e-14);
  EXPECT_NEAR(gx2.value, 2.0 * 0.7 * (-0.7 + b) + 0.25 + 0.09 + 0.9375, 1e-13);
  EXPECT_NEAR(apply_D(m, test_functions::coordinate(0), as_span(x), as_span(y), 0), 0.49 + 0.3, 1e-14);
}

TEST(Generator, GaussianMarksMonteCarlo) {
  SignalModel m = models::jump_ou();
  const double mu = 0.2, sd = 0.8, rate = 2.0;
  m.levy = LevySpec::gaussian_marks(rate, mu, sd, 0.0);
  // E[rho 1{|rho| >= 1}] by Simpson quadrature of the density.
  const int n = 20000;
  const double lo = mu - 12.0 * sd, hi = mu + 12.0 * sd, step = (hi - lo) / n;
  double large = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double r = lo + i * step;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    const double dens = std::exp(-0.5 * (r - mu) * (r - mu) / (sd * sd)) / (sd * std::sqrt(2.0 * M_PI));
    large += w * (std::abs(r) >= 1.0 ? r : 0.0) * dens;
  }
  large *= step / 3.0;
  const Vector x = v1(0.7), y = v1(0.0);
  const double expected = 2.0 * 0.7 * (-0.7 + rate * large) + 0.25 + 0.09 + rate * (mu * mu + sd * sd);
  const auto g = apply_generator(m, test_functions::product(0, 0), as_span(x), as_span(y), {1 << 16, 3});
  EXPECT_FALSE(g.exact);
  EXPECT_GT(g.se, 0.0);
  EXPECT_NEAR(g.value, expected, 4.0 * g.se + 2e-3);
}

TEST(TestFunctions, AnalyticDerivativesMatchDifferences) {
  const Vector x = (Vector(2) << 0.3, -0.8).finished();
  const Vector y = v1(0.4);
  auto battery = test_functions::battery(2);
  battery.push_back(test_functions::cos_sin(1, 0));
  battery.push_back(test_functions::coordinate_times_obs(0, 0));
  for (const TestFunction& phi : battery) {
    const DerivativeCheck c = check_derivatives(phi, as_span(x), as_span(y));
    EXPECT_LT(c.grad_rel_error, 1e-6) << phi.label;
    EXPECT_LT(c.hess_rel_error, 1e-5) << phi.label;
  }
  EXPECT_EQ(battery.front().label, "one");
  EXPECT_EQ(test_functions::battery(1).size(), 4u);
  EXPECT_EQ(test_functions::battery(2).size(), 1u + 2u + 3u + 2u);
}

TEST(Validation, BuiltinsPassLinearGrowth) {
  for (const SignalModel& m : {models::linear_gaussian(), models::correlated_linear(), models::jump_ou()}) {
    const ValidationReport r = validate_model(m, probe_grid(m.dim_x, 10.0, 11));
    EXPECT_TRUE(r.pass()) << m.name;
  }
}

TEST(Validation, RejectsBadLevyLaws) {
  EXPECT_THROW(LevySpec::discrete(1.0, {{v1(0.0), 1.0}}, v1(0.0)), ModelError);
  EXPECT_THROW(LevySpec::discrete(-1.0, {{v1(1.0), 1.0}}, v1(0.0)), ModelError);
  EXPECT_THROW(LevySpec::discrete(1.0, {{v1(1.0), 0.4}}, v1(0.0)), ModelError);
}

TEST(LinearSpec, ShapeErrors) {
  LinearGaussianSpec s = models::scalar_linear_spec({});
  EXPECT_NO_THROW(s.validate());
  s.prior_cov = Matrix::Constant(1, 1, -1.0);
  EXPECT_THROW(s.validate(), ModelError);
  s = models::scalar_linear_spec({});
  s.sensor = Matrix::Zero(1, 2);
  EXPECT_THROW(s.validate(), ModelError);
}

TEST(ChangeDetectionModel, SensorSwitchesAtChangeTime) {
  const SignalModel m = models::change_detection(models::ChangeDetectionParams::fixed(0.5, 1.5, 0.3));
  ASSERT_EQ(m.dim_x, 2u);
  Vector h(1);
  const Vector y = v1(2.0);
  const Vector before = (Vector(2) << 1.5, -0.1).finished();
  const Vector after = (Vector(2) << 1.5, 0.0).finished();
  m.sensor(as_span(before), as_span(y), as_span(h));
  EXPECT_DOUBLE_EQ(h[0], 0.5 * 2.0);
  m.sensor(as_span(after), as_span(y), as_span(h));
  EXPECT_DOUBLE_EQ(h[0], 2.0 * 2.0);
  const TestFunction ind = models::change_indicator();
  EXPECT_EQ(ind.value(as_span(before), as_span(y)), 0.0);
  EXPECT_EQ(ind.value(as_span(after), as_span(y)), 1.0);
}

}  // namespace
}  // namespace nlfilter
