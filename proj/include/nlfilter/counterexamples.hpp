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


#ifndef NLFILTER_COUNTEREXAMPLES_HPP
#define NLFILTER_COUNTEREXAMPLES_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "nlfilter/parallel.hpp"
#include "nlfilter/rng.hpp"
#include "nlfilter/simulate.hpp"

namespace nlfilter {

enum class CounterexampleKind : std::uint64_t { revuz_yor = 1, dufresne = 2, hitting = 3 };

/// Throws ConfigError on an unknown name.
CounterexampleKind parse_counterexample_kind(std::string_view name);
std::string to_string(CounterexampleKind kind);

/// Substream for path `path` of a scenario; `tag` separates parameter sets (e.g. the level n).
CounterRng counterexample_stream(std::uint64_t seed, CounterexampleKind kind, std::uint64_t tag,
                                 std::uint64_t path);

/// W on the grid (W_0 = 0) and log Z for H = alpha W, Z = exp(int H dW - 1/2 int H^2 ds).
struct RevuzYorPath {
  std::vector<double> w;
  std::vector<double> log_z;
};
RevuzYorPath revuz_yor_path(double alpha, const TimeGrid& grid, CounterRng& rng);

/// Trapezoid approximation of int_0^horizon exp(B_s - s/2) ds on the grid.
double dufresne_functional(const TimeGrid& grid, CounterRng& rng);

/// First exit of a grid-sampled Brownian motion from (-1, upper).
struct HittingOutcome {
  bool hit_lower = false;
  bool capped = false;  // no exit before time_cap
  double exit_time = 0.0;
};
HittingOutcome hitting_exit(double upper, double dt, double time_cap, CounterRng& rng);

/// Default cap 50 (n + 1)^2, far beyond the mean exit time n.
double default_hitting_cap(double upper);

struct CounterexampleParams {
  double alpha = 1.0;      // revuz_yor
  double upper = 3.0;      // hitting level n
  double time_cap = 0.0;   // hitting; 0 selects default_hitting_cap
};

/// One row per path, with named columns.
struct CounterexampleSet {
  CounterexampleKind kind;
  std::vector<std::string> columns;
  RowMatrix rows;
};

/**
 * revuz_yor: (path, w_T, log_z_T, energy); dufresne: (path, x, below_one);
 * hitting: (path, exit_time, hit_lower, capped).
 */
CounterexampleSet simulate_counterexample_paths(CounterexampleKind kind,
                                                const CounterexampleParams& params,
                                                const TimeGrid& grid, std::uint64_t seed,
                                                std::size_t n_paths, Exec exec = Exec::parallel);

}  // namespace nlfilter

#endif  // NLFILTER_COUNTEREXAMPLES_HPP
