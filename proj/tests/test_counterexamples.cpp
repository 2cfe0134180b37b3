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

#include "nlfilter/checks.hpp"
#include "nlfilter/counterexamples.hpp"

namespace nlfilter {
namespace {

TEST(Counterexamples, KindNames) {
  for (auto k : {CounterexampleKind::revuz_yor, CounterexampleKind::dufresne, CounterexampleKind::hitting}) {
    EXPECT_EQ(parse_counterexample_kind(to_string(k)), k);
  }
  EXPECT_THROW(parse_counterexample_kind("nope"), ConfigError);
}

TEST(Counterexamples, RevuzYorLogZ) {
  const TimeGrid g = TimeGrid::make(0.1, 1e-3);
  auto rng = counterexample_stream(1, CounterexampleKind::revuz_yor, 0, 0);
  const RevuzYorPath p = revuz_yor_path(2.0, g, rng);
  double lz = 0.0;
  for (std::size_t k = 0; k < 100; ++k) {
    const double h = 2.0 * p.w[k], dw = p.w[k + 1] - p.w[k];
    lz += h * dw - 0.5 * h * h * g.dt;
  }
  EXPECT_NEAR(p.log_z.back(), lz, 1e-13);
}

TEST(Counterexamples, DufresneFunctionalOnZeroHorizon) {
  auto rng = counterexample_stream(1, CounterexampleKind::dufresne, 0, 0);
  EXPECT_EQ(dufresne_functional(TimeGrid::make(0.0, 0.1), rng), 0.0);
  const auto r = dufresne_check(10, TimeGrid::make(0.0, 0.1), 1);
  EXPECT_FALSE(r.valid);
  EXPECT_FALSE(r.pass);
}

TEST(Counterexamples, DufresneMeanOfFunctional) {
  // E int_0^T exp(B_s - s/2) ds = T.
  const TimeGrid g = TimeGrid::make(2.0, 1e-2);
  double sum = 0.0, sum2 = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    auto rng = counterexample_stream(3, CounterexampleKind::dufresne, 0, static_cast<std::uint64_t>(i));
    const double x = dufresne_functional(g, rng);
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / n, se = std::sqrt((sum2 / n - mean * mean) / n);
  EXPECT_NEAR(mean, 2.0, 4.0 * se);
}

TEST(Counterexamples, HittingGamblersRuin) {
  const auto r = kazamaki_gap_check({1.0, 2.0}, 2000, 1e-3, 4);
  ASSERT_EQ(r.rows.size(), 2u);
  EXPECT_DOUBLE_EQ(r.rows[0].target, 0.5);
  EXPECT_DOUBLE_EQ(r.rows[1].target, 2.0 / 3.0);
  for (const auto& row : r.rows) {
    EXPECT_EQ(row.capped, 0u);
    EXPECT_TRUE(row.pass);
  }
}

TEST(Counterexamples, PartialSumsGrowLogarithmically) {
  EXPECT_DOUBLE_EQ(partial_sum(1), 0.25);
  EXPECT_NEAR(partial_sum(2), 0.25 + 2.0 / 9.0, 1e-15);
  const double d = partial_sum(200000) - partial_sum(20000);
  EXPECT_NEAR(d / std::log(10.0), 1.0, 1e-3);
}

TEST(Counterexamples, HittingCapIsReported) {
  auto rng = counterexample_stream(1, CounterexampleKind::hitting, 0, 0);
  const HittingOutcome o = hitting_exit(50.0, 1e-2, 1e-2, rng);
  EXPECT_TRUE(o.capped);
  EXPECT_THROW(hitting_exit(0.0, 1e-2, 1.0, rng), ConfigError);
}

TEST(Counterexamples, PathSetsAreWorkerIndependent) {
  const TimeGrid g = TimeGrid::make(1.0, 1e-3);
  for (auto k : {CounterexampleKind::revuz_yor, CounterexampleKind::dufresne, CounterexampleKind::hitting}) {
    const auto a = simulate_counterexample_paths(k, {}, g, 7, 64, Exec::serial);
    const auto b = simulate_counterexample_paths(k, {}, g, 7, 64, Exec::parallel);
    EXPECT_EQ(a.rows, b.rows);
    EXPECT_EQ(a.columns.size(), static_cast<std::size_t>(a.rows.cols()));
  }
}

}  // namespace
}  // namespace nlfilter
