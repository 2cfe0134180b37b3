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


#ifndef NLFILTER_GIRSANOV_HPP
#define NLFILTER_GIRSANOV_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "nlfilter/model.hpp"
#include "nlfilter/parallel.hpp"
#include "nlfilter/simulate.hpp"

namespace nlfilter {

/// h^T dy - |h|^2 dt / 2. Throws ModelError on non-finite input or dt <= 0.
double log_weight_increment(ConstSpan h, ConstSpan dy, double dt);

/// log Z~ along an observed path, with the samples Z~_k |h(X_k, Y_k)|^2 of its energy.
struct WeightTrajectory {
  TimeGrid grid;
  std::vector<double> log_z;             // n + 1, log_z[0] = 0
  std::vector<double> energy_integrand;  // n
};
WeightTrajectory weight_trajectory(const SignalModel& model, const PathBundle& path);

/**
 * One path of an integrand H and its driving Brownian increments, for
 * Z = exp(int H^T dW - 1/2 int |H|^2 ds) evaluated with left-point sums.
 */
struct DrivingPath {
  RowMatrix h;            // (n + 1) x m; the last row only feeds time-t diagnostics
  RowMatrix dw;           // n x m
  std::vector<double> u;  // n + 1 values of a control process U, or empty
};
using PathSampler = std::function<void(std::size_t path, DrivingPath& out)>;
using ControlFn = std::function<double(ConstSpan x, ConstSpan y)>;

/// Law the paths are drawn from.
enum class SamplingMeasure {
  physical,     // W a Brownian motion; expectations are plain path averages
  transformed,  // W = B + int H ds (the measure Z dP); P-expectations reweighted by 1 / Z_t
};

struct Scenario {
  std::string name;
  TimeGrid grid;
  std::uint64_t seed = 0;
  PathSampler sampler;              // under P
  PathSampler transformed_sampler;  // under Z dP
};

/// H = alpha W. Under Z dP, W is the explosive OU process dW = alpha W dt + dB.
Scenario revuz_yor_scenario(double alpha, const TimeGrid& grid, std::uint64_t seed);
/// H = 0, so Z = 1.
Scenario zero_scenario(const TimeGrid& grid, std::uint64_t seed);
/// H = |B'| for a Brownian motion B' independent of W.
Scenario independent_scenario(const TimeGrid& grid, std::uint64_t seed);
/**
 * H = -h(X, Y) with W the observation noise of simulated (X, Y) pairs, so Z is the density
 * of the reference measure. U defaults to 1 + |X|^2. Under Z dP the pair follows the
 * reference dynamics (Y a Brownian motion, X driven by the observed dY).
 */
Scenario model_scenario(const SignalModel& model, const TimeGrid& grid, std::uint64_t seed,
                        ControlFn u = {});

struct DiagnosticsOptions {
  std::size_t n_paths = 1000;
  SamplingMeasure measure = SamplingMeasure::physical;
  std::size_t record_stride = 1;  // trajectories are kept every stride steps (and at the end)
  double log_overflow_guard = 700.0;
  std::size_t block = 256;
  Exec exec = Exec::parallel;
};

struct DiagnosticsReport {
  std::string scenario;
  SamplingMeasure measure = SamplingMeasure::physical;
  std::uint64_t seed = 0;
  double horizon = 0.0;
  std::size_t n_paths = 0;
  std::size_t overflow_paths = 0;  // paths with log Z above the guard, excluded from estimates

  Estimate e_z;                 // E[Z_t]
  Estimate transformed_energy;  // E[int Z |H|^2 ds]
  Estimate z_log_z;             // E[Z_t log Z_t]
  Estimate z_star;              // E[sup Z_s]
  Estimate plain_energy;        // E[int |H|^2 ds]
  Estimate z_times_plain;       // E[Z_t int |H|^2 ds]

  // Per-path differences, for joint standard errors.
  Estimate zlogz_minus_half_energy;
  Estimate energy_identity_gap;  // int Z |H|^2 - Z_t int |H|^2
  Estimate zstar_excess;         // Z* - slope * int Z |H|^2, slope = e / (2 (e - 1))

  std::vector<double> times;
  std::vector<Estimate> e_z_path;  // E[Z_s]
  std::vector<Estimate> zu_path;   // E[Z_s U_s] (empty without U)
  std::vector<Estimate> zh2_path;  // E[Z_s |H_s|^2]
  std::vector<Estimate> h2_path;   // E[|H_s|^2]
};

/**
 * Monte Carlo diagnostics, reduced in path order (deterministic for any worker count).
 *
 * Under SamplingMeasure::transformed every estimate still targets the P-expectation: the
 * discrete density of P with respect to Z dP is exactly 1 / Z_t, and conditional
 * expectations are taken where they remove a weight (E[int Z |H|^2] = E~[int |H|^2],
 * E[Z_t log Z_t] = E~[log Z_t], E[Z_s U_s] = E~[U_s]).
 */
DiagnosticsReport run_diagnostics(const Scenario& scenario, const DiagnosticsOptions& options);

// ---------------------------------------------------------------------------------------

/// (e + 1) / (e - 1) and e / (2 (e - 1)).
double maximal_bound_constant();
double maximal_bound_slope();

struct ZStarCheck {
  Estimate lhs;
  double rhs = 0.0;
  double se_combined = 0.0;
  bool pass = false;
};
/// E[Z*] <= (e+1)/(e-1) + e/(2(e-1)) E[int Z |H|^2] + 3 SE of the per-path difference.
ZStarCheck zstar_bound_check(const DiagnosticsReport& report);

struct MeanCheck {
  double time = 0.0;
  Estimate e_z;
  bool pass = false;
};
/// E[Z_s] = 1 within 3 SE at the requested times (nearest recorded time).
std::vector<MeanCheck> martingale_mean_check(const DiagnosticsReport& report,
                                             const std::vector<double>& times);

struct GronwallCheck {
  double c = 0.0;
  double rate_multiplier = 2.0;
  double e_u0 = 0.0;
  std::vector<double> times;
  std::vector<Estimate> zu;
  std::vector<double> bound;   // e^{rate_multiplier c t} E[U_0]
  double worst_margin = 0.0;   // max over t of (estimate - 3 SE - bound); <= 0 on pass
  bool pass = false;
};
GronwallCheck gronwall_bound_check(const DiagnosticsReport& report, double c, double e_u0,
                                   double rate_multiplier = 2.0);

/**
 * Constant c with a <= c U, |H^T N| <= c U and |H|^2 <= c U for U = 1 + |X|^2, derived
 * from the declared growth constant K, the sigma_bar bound and the jump moments.
 */
double derived_gronwall_constant(const SignalModel& model);

/// c(b) = 4 + (b0 + b)^2 for the change-detection scenario with U = 1 + Y^2.
double change_detection_constant(double b0, double b);

}  // namespace nlfilter

#endif  // NLFILTER_GIRSANOV_HPP
