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

#include <random>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "nlfilter/models.hpp"
#include "nlfilter/path_io.hpp"
#include "nlfilter/report.hpp"

namespace nlfilter {
namespace {

TEST(Report, NumberFormatRoundTrips) {
  auto rng = CounterRng::for_coords(1, StreamDomain::diagnostics, {1});
  std::normal_distribution<double> normal;
  for (int i = 0; i < 1000; ++i) {
    const double v = normal(rng) * std::pow(10.0, i % 30 - 15);
    EXPECT_EQ(std::stod(format_number(v)), v);
  }
}

TEST(Report, Fnv1aKnownValues) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cull);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ull);
}

TEST(Report, VerdictCsvSummary) {
  std::vector<Verdict> v = {{"a", "s", 1.0, 1.0, 0.1, true, false}, {"b", "s", 2.0, 1.0, 0.1, false, true}};
  std::ostringstream out;
  write_verdicts_csv(v, out);
  const std::string text = out.str();
  EXPECT_NE(text.find("check,scenario,estimate,reference,tolerance,pass,expected_fail\n"), std::string::npos);
  EXPECT_NE(text.find("b,s,2,1,0.10000000000000001,0,1\n"), std::string::npos);
  EXPECT_EQ(text.substr(text.size() - 11), "passed 1/2\n");
}

TEST(PathIo, CsvRoundTripIsExact) {
  const PathBundle p = simulate_pair(models::jump_ou(), TimeGrid::make(0.5, 1e-3), 4, 2);
  std::stringstream buf;
  write_path_csv(p, buf);
  const PathBundle q = read_path_csv(buf);
  EXPECT_EQ(q.x, p.x);
  EXPECT_EQ(q.y, p.y);
  EXPECT_EQ(q.grid.n_steps, p.grid.n_steps);
  EXPECT_EQ(q.grid.dt, p.grid.dt);
}

TEST(PathIo, JsonRoundTripIsExact) {
  const PathBundle p = simulate_pair(models::jump_ou(), TimeGrid::make(0.5, 1e-3), 4, 2);
  const PathBundle q = path_from_json(path_to_json(p));
  EXPECT_EQ(q.x, p.x);
  EXPECT_EQ(q.y, p.y);
  EXPECT_EQ(q.w_increments, p.w_increments);
  EXPECT_EQ(q.levy_increments, p.levy_increments);
  ASSERT_EQ(q.jump_log.size(), p.jump_log.size());
  for (std::size_t i = 0; i < p.jump_log.size(); ++i) {
    EXPECT_EQ(q.jump_log[i].step, p.jump_log[i].step);
    EXPECT_EQ(q.jump_log[i].mark, p.jump_log[i].mark);
  }
  EXPECT_EQ(q.seed, 4u);
  EXPECT_EQ(q.path_index, 2u);
}

TEST(PathIo, JumpLogSidecar) {
  const PathBundle p = simulate_pair(models::jump_ou(), TimeGrid::make(3.0, 1e-3), 4, 0);
  ASSERT_FALSE(p.jump_log.empty());
  std::ostringstream out;
  write_jump_log_csv(p, out);
  const std::string text = out.str();
  const auto lines = static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
  EXPECT_EQ(lines, p.jump_log.size() + 1);
}

TEST(PathIo, MalformedInputThrows) {
  std::istringstream bad("t,x1\n0,abc\n");
  EXPECT_ANY_THROW(read_path_csv(bad));
  EXPECT_ANY_THROW(path_from_json("{\"format\": \"other\"}"));
}

}  // namespace
}  // namespace nlfilter
