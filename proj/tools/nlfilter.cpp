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


#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "nlfilter/cli.hpp"

int main(int argc, char** argv) {
  namespace cli = nlfilter::cli;
  CLI::App app{"Nonlinear filtering simulator, particle filter and diagnostics"};
  app.require_subcommand(1);

  cli::RunOptions options;
  std::string config, out;
  std::uint64_t seed = 0;
  std::size_t workers = 0;
  for (const char* name : {"simulate", "filter", "verify", "counterexample"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "scenario config (JSON)")->required();
    sub->add_option("--out", out, "output directory (overrides output_dir)");
    sub->add_option("--seed", seed, "seed (overrides the config seed)");
    sub->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kConfig;
  }
  CLI::App* sub = app.get_subcommands().front();
  options.config = config;
  if (!out.empty()) options.out = out;
  if (sub->count("--seed")) options.seed = seed;
  options.workers = workers;
  return cli::run(cli::parse_command(sub->get_name()), options, std::cout, std::cerr);
}
