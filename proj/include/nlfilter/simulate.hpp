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


#ifndef NLFILTER_SIMULATE_HPP
#define NLFILTER_SIMULATE_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

#include "nlfilter/model.hpp"
#include "nlfilter/parallel.hpp"
#include "nlfilter/rng.hpp"
#include "nlfilter/types.hpp"

namespace nlfilter {

/// Uniform grid t_k = k dt, k = 0..n_steps. A zero horizon gives a single grid point.
struct TimeGrid {
  double horizon = 0.0;
  double dt = 0.0;
  std::size_t n_steps = 0;

  /// Throws ConfigError unless dt > 0, horizon >= 0 and horizon / dt is an integer.
  static TimeGrid make(double horizon, double dt);

  double time(std::size_t k) const { return static_cast<double>(k) * dt; }
  /// Nearest grid index to t, clamped to [0, n_steps].
  std::size_t index_of(double t) const;
};

struct JumpEvent {
  std::size_t step = 0;
  Vector mark;
};

/// Aligned trajectories of one simulated (signal, observation) pair.
struct PathBundle {
  TimeGrid grid;
  std::uint64_t seed = 0;
  std::uint64_t path_index = 0;
  RowMatrix x;               // (n+1) x d
  RowMatrix y;               // (n+1) x m, y(0) = 0
  RowMatrix w_increments;    // n x m
  RowMatrix v_increments;    // n x p
  RowMatrix levy_increments; // n x r, compensated increments of L
  std::vector<JumpEvent> jump_log;
};

/**
 * One increment of L over dt in the compensated form: b dt + (sum of marks) - dt * int rho F.
 * Writes the increment and appends raw marks to `marks` when non-null.
 */
void sample_levy_increment(const LevySpec& levy, double dt, CounterRng& rng, MutSpan increment,
                           std::vector<Vector>* marks);

struct LevyIncrement {
  Vector increment;
  std::vector<Vector> marks;
};
LevyIncrement sample_levy_increment(const LevySpec& levy, double dt, CounterRng& rng);

/// x_next = x + f dt + sigma dv + sigma_bar dw + sigma_tilde dl, coefficients at x.
void euler_step(const CoefficientValues& c, ConstSpan x, ConstSpan dv, ConstSpan dw, ConstSpan dl,
                double dt, MutSpan x_next);

/// Draws X_0 from the model's initial law (zero when the law is absent).
void sample_initial(const SignalModel& model, CounterRng& rng, MutSpan out);

/// Substream of path `path_index` under `seed`.
CounterRng path_stream(std::uint64_t seed, std::uint64_t path_index);

/// Euler-Maruyama simulation under P. Throws BlowUpError on a non-finite state.
PathBundle simulate_pair(const SignalModel& model, const TimeGrid& grid, CounterRng& rng);
PathBundle simulate_pair(const SignalModel& model, const TimeGrid& grid, std::uint64_t seed,
                         std::uint64_t path_index);

std::vector<PathBundle> simulate_paths(const SignalModel& model, const TimeGrid& grid,
                                       std::uint64_t seed, std::size_t n_paths,
                                       Exec exec = Exec::parallel);

/**
 * One Euler step of the signal under the reference measure, driven by the observed dy:
 * x + (f - sigma_bar h) dt + sigma dV + sigma_bar dy + sigma_tilde dL.
 * `c` must hold the coefficients at (x, y). Fresh V/L noise comes from rng.
 */
void propagate_under_reference(const SignalModel& model, const CoefficientValues& c, ConstSpan x,
                               ConstSpan dy, double dt, CounterRng& rng, MutSpan x_next);
Vector propagate_under_reference(const SignalModel& model, ConstSpan x, ConstSpan y, ConstSpan dy,
                                 double dt, CounterRng& rng);

}  // namespace nlfilter

#endif  // NLFILTER_SIMULATE_HPP
