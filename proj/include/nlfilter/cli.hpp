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


#ifndef NLFILTER_CLI_HPP
#define NLFILTER_CLI_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "nlfilter/checks.hpp"
#include "nlfilter/counterexamples.hpp"
#include "nlfilter/filter.hpp"
#include "nlfilter/girsanov.hpp"
#include "nlfilter/model.hpp"
#include "nlfilter/models.hpp"
#include "nlfilter/simulate.hpp"

namespace nlfilter::cli {

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kConfig = 2,
  kBlowUp = 3,
  kCollapse = 4,
  kCheckFailure = 5,
};

enum class Command { simulate, filter, verify, counterexample };
Command parse_command(std::string_view name);  // throws ConfigError
std::string to_string(Command c);

/// Either a built-in name with its parameter block, or an inline linear/affine spec.
struct ModelBlock {
  std::string builtin;  // empty for inline
  models::ScalarLinearParams linear;
  models::JumpOuParams jump_ou;
  models::ChangeDetectionParams change_detection = models::ChangeDetectionParams::defaults();
  std::optional<LinearGaussianSpec> inline_spec;
};

struct DiagnosticsBlock {
  std::vector<std::string> checks;
  std::size_t n_paths = 10000;
  std::size_t n_runs = 200;      // residual runs
  std::size_t n_seeds = 20;      // agreement checks
  std::size_t n_particles = 10000;
  std::size_t residual_particles = 100;
  std::size_t record_stride = 250;
  double alpha = 1.0;
  std::vector<double> mean_times = {0.25, 0.5, 1.0};
  std::vector<double> levels = {1.0, 3.0, 9.0};
  double hitting_dt = 1e-4;
  double dufresne_horizon = 20.0;
  double tolerance = 0.05;
  double fixed_b = 1.0;    // Gronwall check on change_detection
  double fixed_tau = 0.5;
};

struct CounterexampleBlock {
  CounterexampleKind kind = CounterexampleKind::revuz_yor;
  CounterexampleParams params;
  std::size_t n_paths = 1000;
};

struct ScenarioConfig {
  std::string scenario;
  std::uint64_t seed = 0;
  ModelBlock model;
  double horizon = 1.0;
  double dt = 1e-3;
  FilterConfig filter;
  DiagnosticsBlock diagnostics;
  CounterexampleBlock counterexample;
  std::size_t simulate_paths = 1;
  std::string observations;  // optional path CSV for the filter command
  std::filesystem::path output_dir = "out";
  /// Canonical JSON of the effective config; hashed into every manifest.
  std::string canonical;

  TimeGrid grid() const { return TimeGrid::make(horizon, dt); }
};

/// Throws ConfigError with a message naming the offending field.
ScenarioConfig parse_config(std::string_view text, std::optional<std::uint64_t> seed_override = {});
ScenarioConfig load_config(const std::filesystem::path& path,
                           std::optional<std::uint64_t> seed_override = {});

SignalModel build_model(const ModelBlock& block);

/// Names accepted in diagnostics.checks.
const std::vector<std::string>& check_names();

/// Runs one named check and returns its verdict rows.
std::vector<Verdict> run_check(const std::string& name, const ScenarioConfig& config,
                               Exec exec = Exec::parallel);

/// Each command writes into config.output_dir and returns an exit code; library exceptions
/// propagate.
int cmd_simulate(const ScenarioConfig& config, std::ostream& log);
int cmd_filter(const ScenarioConfig& config, std::ostream& log);
int cmd_verify(const ScenarioConfig& config, std::ostream& log);
int cmd_counterexample(const ScenarioConfig& config, std::ostream& log);

struct RunOptions {
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  std::size_t workers = 0;  // 0 keeps the default
};

/// Loads the config, applies overrides, dispatches, and maps exceptions to exit codes.
int run(Command command, const RunOptions& options, std::ostream& log, std::ostream& err);

}  // namespace nlfilter::cli

#endif  // NLFILTER_CLI_HPP
