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


#ifndef NLFILTER_FILTER_HPP
#define NLFILTER_FILTER_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "nlfilter/model.hpp"
#include "nlfilter/parallel.hpp"
#include "nlfilter/simulate.hpp"

namespace nlfilter {

struct FilterConfig {
  std::size_t n_particles = 1000;
  double resample_threshold = 0.5;  // resample when ESS < threshold * n
  double collapse_floor = 1.0 + 1e-6;
  std::uint64_t seed = 0;
  std::uint64_t run = 0;  // separates independent runs under one seed
  Exec exec = Exec::parallel;

  /// Throws ConfigError on n < 2 or a threshold outside [0, 1].
  void validate() const;
};

/**
 * Weighted particle approximation of rho_t. The unnormalized mass is
 * exp(log_mass) * mean_i exp(log_weights[i]); resampling folds the mean into log_mass.
 */
struct ParticleCloud {
  RowMatrix states;  // n x d
  std::vector<double> log_weights;
  double log_mass = 0.0;
  double t = 0.0;
  std::size_t step = 0;
  Vector y;  // observation at time t

  std::size_t size() const { return log_weights.size(); }
};

ParticleCloud init_cloud(const SignalModel& model, const FilterConfig& config);

/// (sum w)^2 / sum w^2 of the unnormalized weights.
double ess(const ParticleCloud& cloud);

/// Normalized weights w_i / sum w.
std::vector<double> normalized_weights(const ParticleCloud& cloud);

struct StepInfo {
  double ess = 0.0;  // before any resampling
  bool resampled = false;
};

/**
 * Propagates every particle under the reference dynamics with the observed dy, adds the
 * left-point log-weight increment, then resamples (systematic) when ESS < threshold n.
 * Throws FilterCollapse when ESS < collapse_floor and BlowUpError on non-finite states.
 */
StepInfo step(ParticleCloud& cloud, const SignalModel& model, ConstSpan dy, double dt,
              const FilterConfig& config);

/// Systematic resampling with one uniform; log_mass absorbs the mean weight.
void resample_systematic(ParticleCloud& cloud, double u);

double rho_estimate(const ParticleCloud& cloud, const TestFunction& phi);
/// rho(phi) / rho(1). Throws FilterCollapse when the mass is degenerate.
double pi_estimate(const ParticleCloud& cloud, const TestFunction& phi);

struct FilterTrajectory {
  std::vector<std::string> labels;
  std::vector<double> t;
  RowMatrix estimates;  // (n + 1) x labels, pi estimates
  std::vector<double> rho1;
  std::vector<double> ess;
  std::vector<int> resampled;
};

/// Called before each step with the cloud at t_k and the increment dy_k.
using StepObserver = std::function<void(std::size_t k, const ParticleCloud& cloud, ConstSpan dy)>;

/// Runs the filter along an observation path y ((n + 1) x m rows on `grid`).
FilterTrajectory run_filter(const SignalModel& model, const RowMatrix& y, const TimeGrid& grid,
                            const std::vector<TestFunction>& battery, const FilterConfig& config,
                            const StepObserver& observer = {});

}  // namespace nlfilter

#endif  // NLFILTER_FILTER_HPP
