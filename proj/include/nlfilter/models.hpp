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


#ifndef NLFILTER_MODELS_HPP
#define NLFILTER_MODELS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "nlfilter/model.hpp"

namespace nlfilter::models {

/// Scalar linear-Gaussian parameters: dX = a X dt + sigma dV + sigma_bar dW, h(x) = H x.
struct ScalarLinearParams {
  double a = -1.0;
  double sigma = 1.0;
  double sigma_bar = 0.0;
  double sensor = 1.0;
  double prior_mean = 1.0;
  double prior_var = 1.0;
};

LinearGaussianSpec scalar_linear_spec(const ScalarLinearParams& p);

/// SignalModel for an arbitrary linear-Gaussian spec; the spec is kept in model.linear.
SignalModel from_linear(const LinearGaussianSpec& spec, std::string name);

SignalModel linear_gaussian(ScalarLinearParams p = {});
/// linear_gaussian with sigma_bar = 0.5 unless overridden.
SignalModel correlated_linear(ScalarLinearParams p = {.sigma_bar = 0.5});

/**
 * Same signal law with the correlation dropped: sigma' = (sigma sigma^T +
 * sigma_bar sigma_bar^T)^{1/2}, sigma_bar' = 0. Running a filter built on this model
 * against correlated data is the "uncorrelated filter" ablation.
 */
SignalModel decorrelated(const SignalModel& model);

struct JumpOuParams {
  double mean_reversion = 1.0;
  double sigma = 0.5;
  double sigma_bar = 0.3;
  double jump_scale = 1.0;
  double jump_rate = 1.0;
  std::vector<JumpAtom> atoms;  // empty selects {0.5: 1/2, 1.5: 1/4, -1: 1/4}
  double levy_drift_a = 0.0;
  double prior_var = 0.25;
};

/// 1-d Ornstein-Uhlenbeck signal with correlated noise and compound-Poisson jumps, h(x) = x.
SignalModel jump_ou(JumpOuParams p = {});

/**
 * Change detection. The state is x = (B, clock) with clock_0 = -T and d clock = dt, so
 * 1{clock >= 0} = 1{t >= T}. The sensor is h(x, y) = (b0 + B 1{t >= T}) y.
 * B and T are independent with discrete priors on the given grids.
 */
struct ChangeDetectionParams {
  double b0 = 0.5;
  std::vector<double> b_grid;
  std::vector<double> b_weights;    // empty means uniform
  std::vector<double> tau_grid;
  std::vector<double> tau_weights;  // empty means uniform

  /// b0 = 0.5, B and T uniform on linspace(0, 2, 21).
  static ChangeDetectionParams defaults();
  /// Point masses B = b, T = tau.
  static ChangeDetectionParams fixed(double b0, double b, double tau);

  /// Normalized prior weights; throws ModelError on empty grids or bad weights.
  std::vector<double> b_prior() const;
  std::vector<double> tau_prior() const;
};

/// Tolerance on the clock coordinate, shared by the sensor, the indicator and the oracle.
inline constexpr double kClockTolerance = 1e-9;

SignalModel change_detection(const ChangeDetectionParams& p = ChangeDetectionParams::defaults());

/// 1{T <= t}, i.e. the clock coordinate is nonnegative.
TestFunction change_indicator();

std::vector<double> linspace(double lo, double hi, std::size_t n);

/// Names accepted by the config loader.
const std::vector<std::string>& builtin_names();

}  // namespace nlfilter::models

#endif  // NLFILTER_MODELS_HPP
