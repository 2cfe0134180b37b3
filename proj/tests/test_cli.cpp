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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "nlfilter/cli.hpp"

namespace nlfilter::cli {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("nlfilter_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  int run_cmd(Command c, const fs::path& config, const fs::path& out, std::size_t workers = 0,
              std::optional<std::uint64_t> seed = {}) {
    RunOptions o;
    o.config = config;
    o.out = out;
    o.workers = workers;
    o.seed = seed;
    std::ostringstream log;
    err_.str("");
    return run(c, o, log, err_);
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

  fs::path dir_;
  std::ostringstream err_;
};

TEST(Config, ErrorsNameTheField) {
  auto message = [](const std::string& text) {
    try {
      (void)parse_config(text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(message(R"({"seed":1,"model":{"builtin":"jump_ou"},"grid":{"dt":0}})").find("grid.dt"), std::string::npos);
  EXPECT_NE(message(R"({"seed":1,"model":{"builtin":"jump_ou"},"grid":{"horizon":0}})").find("grid.horizon"),
            std::string::npos);
  EXPECT_NE(message(R"({"model":{"builtin":"jump_ou"}})").find("seed"), std::string::npos);
  EXPECT_NE(message(R"({"seed":1,"model":{"builtin":"nope"}})").find("model.builtin"), std::string::npos);
  EXPECT_NE(message(R"({"seed":1,"model":{"builtin":"jump_ou"},"gird":{}})").find("gird"), std::string::npos);
  EXPECT_NE(message(R"({"seed":1,"model":{"builtin":"jump_ou"},"diagnostics":{"checks":["x"]}})").find("diagnostics.checks"),
            std::string::npos);
  EXPECT_NE(message(R"({"seed":1,"model":{"builtin":"jump_ou"},"filter":{"n_particles":1}})").find("filter"),
            std::string::npos);
  EXPECT_NE(message("not json").find("JSON"), std::string::npos);
}

TEST(Config, InlineLinearModel) {
  const auto c = parse_config(R"({"seed":2,"model":{"linear":{"drift":-1,"sigma":1,"sensor":1,
      "prior_mean":0.5,"prior_cov":1,"sensor_offset":0.2}}})");
  const SignalModel m = build_model(c.model);
  ASSERT_TRUE(m.linear.has_value());
  EXPECT_EQ(m.dim_x, 1u);
  EXPECT_DOUBLE_EQ(m.linear->sensor_offset[0], 0.2);
  EXPECT_THROW(parse_config(R"({"seed":2,"model":{"linear":{"drift":[[1,0]],"sigma":1,"sensor":1,
      "prior_mean":0,"prior_cov":1}}})"), ConfigError);
}

TEST(Config, SeedOverrideChangesCanonicalForm) {
  const std::string text = R"({"seed":1,"model":{"builtin":"linear_gaussian"}})";
  const auto a = parse_config(text);
  const auto b = parse_config(text, 9);
  EXPECT_EQ(b.seed, 9u);
  EXPECT_NE(a.canonical, b.canonical);
  EXPECT_EQ(a.canonical, parse_config(R"({ "model": {"builtin": "linear_gaussian"}, "seed": 1 })").canonical);
}

TEST_F(CliTest, SimulateIsByteIdenticalAcrossRunsAndWorkers) {
  const auto cfg = write("c.json", R"({"seed":4,"model":{"builtin":"jump_ou"},"grid":{"horizon":0.5,"dt":0.001},
      "simulate":{"n_paths":3}})");
  ASSERT_EQ(run_cmd(Command::simulate, cfg, dir_ / "a", 1), kOk);
  ASSERT_EQ(run_cmd(Command::simulate, cfg, dir_ / "b", 4), kOk);
  for (const char* f : {"manifest.json", "path_0000.csv", "path_0002.csv", "jumps_0001.csv"}) {
    ASSERT_TRUE(fs::exists(dir_ / "a" / f)) << f;
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
  }
  ASSERT_EQ(run_cmd(Command::simulate, cfg, dir_ / "c", 1, 5), kOk);
  EXPECT_NE(slurp(dir_ / "a" / "path_0000.csv"), slurp(dir_ / "c" / "path_0000.csv"));
}

TEST_F(CliTest, ExitCodes) {
  const auto bad = write("bad.json", R"({"seed":1,"model":{"builtin":"jump_ou"},"grid":{"dt":0}})");
  EXPECT_EQ(run_cmd(Command::simulate, bad, dir_ / "o"), kConfig);
  EXPECT_NE(err_.str().find("grid.dt"), std::string::npos);
  EXPECT_EQ(run_cmd(Command::simulate, dir_ / "missing.json", dir_ / "o"), kConfig);

  const auto blow = write("blow.json", R"({"seed":1,"model":{"linear":{"drift":1e5,"sigma":1,"sensor":1,
      "prior_mean":1,"prior_cov":1}},"grid":{"horizon":1,"dt":0.001}})");
  EXPECT_EQ(run_cmd(Command::simulate, blow, dir_ / "o"), kBlowUp);

  const auto collapse = write("collapse.json", R"({"seed":1,"model":{"builtin":"linear_gaussian",
      "params":{"sensor":100}},"filter":{"n_particles":2}})");
  EXPECT_EQ(run_cmd(Command::filter, collapse, dir_ / "o"), kCollapse);

  const auto ablation = write("abl.json", R"({"seed":5,"model":{"builtin":"correlated_linear"},
      "grid":{"horizon":1,"dt":0.002},"diagnostics":{"checks":["ks_residual_ablation"],"n_runs":40,
      "residual_particles":64}})");
  EXPECT_EQ(run_cmd(Command::verify, ablation, dir_ / "v"), kCheckFailure);
  const std::string verdicts = slurp(dir_ / "v" / "verdicts.csv");
  EXPECT_NE(verdicts.find("ks_residual_ablation"), std::string::npos);
  EXPECT_NE(verdicts.find(",1\n"), std::string::npos);  // expected_fail column

  const auto ok = write("ok.json", R"({"seed":5,"model":{"builtin":"jump_ou"},
      "diagnostics":{"checks":["revuz_yor_energy","martingale_mean"],"n_paths":2000}})");
  EXPECT_EQ(run_cmd(Command::verify, ok, dir_ / "w"), kOk);
  const std::string text = slurp(dir_ / "w" / "verdicts.csv");
  EXPECT_NE(text.find("passed 7/7"), std::string::npos);
}

TEST_F(CliTest, FilterOutputs) {
  const auto cfg = write("f.json", R"({"seed":7,"model":{"builtin":"change_detection"},
      "grid":{"horizon":0.5,"dt":0.001},"filter":{"n_particles":500}})");
  ASSERT_EQ(run_cmd(Command::filter, cfg, dir_ / "f"), kOk);
  std::ifstream in(dir_ / "f" / "filter.csv");
  std::string header, row;
  std::getline(in, header);
  EXPECT_NE(header.find(",prob_change,"), std::string::npos);
  EXPECT_NE(header.find(",oracle_prob_change,"), std::string::npos);
  EXPECT_EQ(header.rfind("t,one,", 0), 0u);
  while (std::getline(in, row)) EXPECT_EQ(row.substr(row.find(',') + 1, 2), "1,");
  // Re-filtering the written observations reproduces the trajectory.
  const auto again = write("g.json", R"({"seed":7,"model":{"builtin":"change_detection"},
      "grid":{"horizon":0.5,"dt":0.001},"filter":{"n_particles":500},"observations":")" +
                                         (dir_ / "f" / "observations.csv").string() + "\"}");
  ASSERT_EQ(run_cmd(Command::filter, again, dir_ / "g"), kOk);
  EXPECT_EQ(slurp(dir_ / "f" / "filter.csv"), slurp(dir_ / "g" / "filter.csv"));
}

TEST_F(CliTest, CounterexampleOutputs) {
  const auto cfg = write("x.json", R"({"seed":3,"model":{"builtin":"linear_gaussian"},
      "counterexample":{"kind":"dufresne","n_paths":50}})");
  ASSERT_EQ(run_cmd(Command::counterexample, cfg, dir_ / "x", 1), kOk);
  ASSERT_EQ(run_cmd(Command::counterexample, cfg, dir_ / "y", 4), kOk);
  EXPECT_EQ(slurp(dir_ / "x" / "dufresne.csv"), slurp(dir_ / "y" / "dufresne.csv"));
  EXPECT_NE(slurp(dir_ / "x" / "manifest.json").find("\"config_hash\""), std::string::npos);
}

}  // namespace
}  // namespace nlfilter::cli
