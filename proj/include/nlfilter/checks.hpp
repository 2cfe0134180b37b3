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


#ifndef NLFILTER_CHECKS_HPP
#define NLFILTER_CHECKS_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "nlfilter/girsanov.hpp"
#include "nlfilter/models.hpp"
#include "nlfilter/parallel.hpp"
#include "nlfilter/residuals.hpp"

namespace nlfilter {

/// One machine-readable check outcome.
struct Verdict {
  std::string check;
  std::string scenario;
  double estimate = 0.0;
  double reference = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  bool expected_fail = false;  // negative control: a failing row is the desired outcome
};

// --------------------------------------------------------------------------- martingale diagnostics

/// 1/4 (e^{2 alpha t} - 2 alpha t - 1).
double revuz_yor_closed_form(double alpha, double t);

/// Energy vs closed form, Z log Z identity, E[Z_s] = 1, maximal bound and energy identity.
std::vector<Verdict> revuz_yor_verdicts(const DiagnosticsReport& report, double alpha,
                                        const std::vector<double>& mean_times);

/// Z log Z identity, E[Z_s] = 1, maximal bound and energy identity for any scenario.
std::vector<Verdict> martingale_verdicts(const DiagnosticsReport& report,
                                         const std::vector<double>& mean_times);

/// Transformed energy equals the plain energy t^2 / 2 for H = |B'| independent of W.
std::vector<Verdict> independent_energy_verdicts(const DiagnosticsReport& report);

// --------------------------------------------------------------------------- Dufresne

struct DufresneResult {
  Estimate estimate;             // P(X < 1)
  double target = 0.0;           // e^{-2}
  double truncation_allowance = 0.0;  // e^{-horizon / 2}
  bool valid = true;             // false for a zero horizon
  bool truncation_warning = false;    // allowance exceeds 3 SE
  bool pass = false;
};

DufresneResult dufresne_check(std::size_t n_paths, const TimeGrid& grid, std::uint64_t seed,
                              Exec exec = Exec::parallel);

// --------------------------------------------------------------------------- hitting

struct HittingRow {
  double level = 0.0;
  Estimate p_lower;
  double target = 0.0;  // n / (n + 1)
  std::size_t capped = 0;
  bool pass = false;
};

struct PartialSumRow {
  std::size_t n_terms = 0;
  double sum = 0.0;  // sum_{k <= N} k / (k + 1)^2
};

struct KazamakiResult {
  std::vector<HittingRow> rows;
  std::vector<PartialSumRow> partial_sums;
  double log_growth_slope = 0.0;  // least-squares slope of the partial sum against ln N
};

KazamakiResult kazamaki_gap_check(const std::vector<double>& levels, std::size_t n_paths,
                                  double dt, std::uint64_t seed, double se_band = 5.0,
                                  Exec exec = Exec::parallel);

double partial_sum(std::size_t n_terms);

// --------------------------------------------------------------------------- Kalman agreement

struct KalmanAgreementOptions {
  std::size_t n_seeds = 20;
  std::size_t n_particles = 10000;
  double horizon = 1.0;
  double dt = 1e-3;
  std::uint64_t seed = 0;
  double resample_threshold = 0.5;
  double tolerance = 0.05;
  Exec exec = Exec::parallel;
};

struct KalmanAgreement {
  double mean_abs_mean_error = 0.0;
  double mean_abs_var_error = 0.0;
  std::vector<double> mean_errors;  // per seed, signed
  std::vector<double> var_errors;
  double oracle_var = 0.0;          // Riccati variance at the horizon (first coordinate)
  bool pass = false;
};

/**
 * Data simulated from `data_model`, filtered with `filter_model`, compared with the
 * Kalman-Bucy oracle of `data_model` at the horizon (first coordinate).
 */
KalmanAgreement kalman_agreement(const SignalModel& data_model, const SignalModel& filter_model,
                                 const KalmanAgreementOptions& options);

// --------------------------------------------------------------------------- change detection

struct ChangeDetectionAgreementOptions {
  std::size_t n_seeds = 20;
  std::size_t n_particles = 10000;
  double horizon = 1.0;
  double dt = 1e-3;
  std::uint64_t seed = 0;
  double resample_threshold = 0.5;
  double tolerance = 0.05;
  Exec exec = Exec::parallel;
};

struct ChangeDetectionAgreement {
  std::vector<double> sup_gaps;  // per seed
  double mean_sup_gap = 0.0;
  bool pass = false;
};

ChangeDetectionAgreement change_detection_agreement(const models::ChangeDetectionParams& params,
                                                    const ChangeDetectionAgreementOptions& options);

// --------------------------------------------------------------------------- Gronwall

/// U = 1 + |X|^2, c from derived_gronwall_constant, bound e^{2ct} E[U_0].
GronwallCheck gronwall_model_check(const SignalModel& model, const TimeGrid& grid,
                                   std::size_t n_paths, std::uint64_t seed,
                                   Exec exec = Exec::parallel);

/// Fixed (b, tau), U = 1 + Y^2, bound e^{c(b) t} with c(b) = 4 + (b0 + b)^2 and U_0 = 1.
GronwallCheck gronwall_change_detection_check(double b0, double b, double tau, const TimeGrid& grid,
                                              std::size_t n_paths, std::uint64_t seed,
                                              Exec exec = Exec::parallel);

// --------------------------------------------------------------------------- residuals

/**
 * Zakai and KS verdicts: |mean terminal residual| < 3 SE for every non-constant phi, exact
 * reductions for phi = 1. With `ablation`, adds expected-fail rows for the KS residual
 * without the correlation term.
 */
std::vector<Verdict> residual_verdicts(const ResidualReport& report, const std::string& scenario,
                                       bool ablation);

}  // namespace nlfilter

#endif  // NLFILTER_CHECKS_HPP
