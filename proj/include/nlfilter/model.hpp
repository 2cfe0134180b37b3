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

#ifndef NLFILTER_MODEL_HPP
#define NLFILTER_MODEL_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nlfilter/rng.hpp"
#include "nlfilter/types.hpp"

namespace nlfilter {

/// x -> out. Matrix-valued coefficients write row-major d x k blocks.
using CoefficientFn = std::function<void(ConstSpan x, MutSpan out)>;
/// (x, y) -> out; the sensor may depend on the observation path (change detection).
using SensorFn = std::function<void(ConstSpan x, ConstSpan y, MutSpan out)>;
using SamplerFn = std::function<void(CounterRng& rng, MutSpan out)>;

struct JumpAtom {
  Vector mark;
  double probability = 0.0;  // under the normalized jump law F / jump_rate
};

/**
 * Finite-activity Levy driver: a drift plus compensated compound-Poisson jumps.
 *
 * Moments are stored for the normalized mark law F / jump_rate. Use the factories; they
 * compute the moments that the generator and the simulator rely on.
 */
struct LevySpec {
  double jump_rate = 0.0;
  std::vector<JumpAtom> atoms;   // non-empty for a discrete mark law
  SamplerFn mark_sampler;        // used when atoms is empty
  Vector drift_a;                // drift of the Levy-Ito form (small jumps compensated)
  Vector mark_mean;              // E[rho]
  Vector large_mark_mean;        // E[rho 1{|rho| >= 1}]
  Matrix mark_second_moment;     // E[rho rho^T]

  static LevySpec discrete(double rate, std::vector<JumpAtom> atoms, Vector drift_a);
  /// Scalar N(mean, stddev^2) marks. The law has no atom at the origin.
  static LevySpec gaussian_marks(double rate, double mean, double stddev, double drift_a);

  std::size_t dim() const { return static_cast<std::size_t>(drift_a.size()); }
  bool is_discrete() const { return !atoms.empty(); }

  /// Drift of the fully compensated form L_t = b t + compensated jumps.
  Vector drift_b() const { return drift_a + jump_rate * large_mark_mean; }
  /// Integral of rho rho^T against the Levy measure.
  Matrix second_moment() const { return jump_rate * mark_second_moment; }
  /// Integral of rho against the Levy measure (compensator rate).
  Vector compensator() const { return jump_rate * mark_mean; }

  void sample_mark(CounterRng& rng, MutSpan out) const;

  /// Throws ModelError if an invariant fails (atom at 0, negative rate, non-PSD moment).
  void validate() const;
};

/**
 * Closed-form linear-Gaussian structure, carried alongside a SignalModel built from it so
 * the Kalman-Bucy oracle can be run on the same model.
 */
struct LinearGaussianSpec {
  Matrix drift;        // A_x, d x d
  Matrix sigma;        // d x p
  Matrix sigma_bar;    // d x m
  Matrix sensor;       // H, m x d
  Vector prior_mean;   // d
  Matrix prior_cov;    // d x d
  Vector drift_offset;   // c in f(x) = A_x x + c; empty means zero
  Vector sensor_offset;  // h0 in h(x) = H x + h0; empty means zero

  std::size_t dim_x() const { return static_cast<std::size_t>(drift.rows()); }
  std::size_t dim_v() const { return static_cast<std::size_t>(sigma.cols()); }
  std::size_t dim_y() const { return static_cast<std::size_t>(sensor.rows()); }
  /// Throws ModelError on inconsistent shapes or a prior covariance that is not PSD.
  void validate() const;
};

/**
 * Signal/observation model
 *   dX = f(X-) dt + sigma(X-) dV + sigma_bar(X-) dW + sigma_tilde(X-) dL,
 *   dY = h(X, Y) dt + dW,  Y_0 = 0.
 * Empty coefficient functions are treated as identically zero.
 */
struct SignalModel {
  std::string name;
  std::size_t dim_x = 1;
  std::size_t dim_v = 0;
  std::size_t dim_y = 1;
  std::size_t dim_l = 0;

  CoefficientFn drift;
  CoefficientFn sigma;
  CoefficientFn sigma_bar;
  CoefficientFn sigma_tilde;
  SensorFn sensor;

  std::optional<LevySpec> levy;
  double linear_growth_K = 1.0;
  std::optional<double> sigma_bar_bound;
  SamplerFn initial_law;

  std::optional<LinearGaussianSpec> linear;

  /// Second moment E|X_0|^2 when known in closed form (used by the Gronwall envelope).
  std::optional<double> initial_second_moment;
};

/// Coefficients evaluated at one point; reused across test functions.
struct CoefficientValues {
  Vector f;            // d
  Vector drift_tilde;  // f + sigma_tilde b
  RowMatrix sigma;     // d x p
  RowMatrix sigma_bar; // d x m
  RowMatrix sigma_tilde;  // d x r
  Vector h;            // m

  explicit CoefficientValues(const SignalModel& model);
};

void evaluate_coefficients(const SignalModel& model, ConstSpan x, ConstSpan y,
                           CoefficientValues& out);

// ---------------------------------------------------------------------------------------

/**
 * Scalar test function on (x, y) with analytic derivatives. Missing second-order y
 * derivatives are taken to be zero; a missing grad_x/hess_x is an error wherever the
 * operator needs it.
 */
struct TestFunction {
  using Value = std::function<double(ConstSpan x, ConstSpan y)>;
  using Derivative = std::function<void(ConstSpan x, ConstSpan y, MutSpan out)>;

  std::string label;
  Value value;
  Derivative grad_x;   // d
  Derivative hess_x;   // d x d, row-major
  Derivative grad_y;   // m; empty means y-independent
  Derivative hess_y;   // m x m
  Derivative hess_xy;  // d x m

  bool y_independent() const { return !grad_y; }
};

namespace test_functions {

TestFunction constant(double c);
/// x_i
TestFunction coordinate(std::size_t i);
/// x_i x_j (x_i^2 when i == j)
TestFunction product(std::size_t i, std::size_t j);
/// tanh(x_i)
TestFunction tanh_of(std::size_t i);
/// 1{x_i >= 0}; value only.
TestFunction indicator_nonnegative(std::size_t i);
/// x_i y_k, for exercising the observation-direction terms.
TestFunction coordinate_times_obs(std::size_t i, std::size_t k);
/// cos(x_i) sin(y_k)
TestFunction cos_sin(std::size_t i, std::size_t k);

/// {1, x_i, x_i x_j, tanh(x_i)} over all coordinates of R^d.
std::vector<TestFunction> battery(std::size_t dim_x);

}  // namespace test_functions

/// Max relative disagreement of grad_x / hess_x with central differences at one point.
struct DerivativeCheck {
  double grad_rel_error = 0.0;
  double hess_rel_error = 0.0;
  double grad_y_abs = 0.0;  // max |grad_y| (zero for y-independent functions)
};

DerivativeCheck check_derivatives(const TestFunction& phi, ConstSpan x, ConstSpan y,
                                  double step = 1e-4);

// ---------------------------------------------------------------------------------------

struct ValidationEntry {
  std::string coefficient;
  double max_ratio = 0.0;  // max over probes of |g(x)| / (1 + |x|)
  double bound = 0.0;
  bool pass = true;
};

struct ValidationReport {
  std::vector<ValidationEntry> entries;
  bool levy_second_moment_finite = true;
  bool pass() const;
};

/// Probe-based linear-growth check of every coefficient (and the sigma_bar bound).
/// Throws ModelError on non-finite values or an empty probe list.
ValidationReport validate_model(const SignalModel& model, const std::vector<Vector>& probes);

/// Cartesian probe grid over [-radius, radius]^d with `per_axis` points per axis.
std::vector<Vector> probe_grid(std::size_t dim, double radius, std::size_t per_axis);

struct JumpQuadrature {
  std::size_t samples = 4096;
  std::uint64_t seed = 0;
};

struct GeneratorEstimate {
  double value = 0.0;
  double se = 0.0;     // zero when the jump integral is exact
  bool exact = true;
};

/// A phi(x, y): drift, diffusion, observation and jump parts of the generator.
GeneratorEstimate apply_generator(const SignalModel& model, const TestFunction& phi, ConstSpan x,
                                  ConstSpan y, const JumpQuadrature& quad = {});
GeneratorEstimate apply_generator(const SignalModel& model, const CoefficientValues& coeffs,
                                  const TestFunction& phi, ConstSpan x, ConstSpan y,
                                  const JumpQuadrature& quad = {});

/// (sigma_bar(x)^T grad_x phi)_i, the correlation operator B^i. Zero-based index.
double apply_correlation(const SignalModel& model, const TestFunction& phi, ConstSpan x,
                         ConstSpan y, std::size_t i);
double apply_correlation(const CoefficientValues& coeffs, const TestFunction& phi, ConstSpan x,
                         ConstSpan y, std::size_t i);

/// D_j phi = h^j phi + B^j phi + d phi / d y_j. Zero-based index.
double apply_D(const SignalModel& model, const TestFunction& phi, ConstSpan x, ConstSpan y,
               std::size_t j);
double apply_D(const CoefficientValues& coeffs, const TestFunction& phi, ConstSpan x, ConstSpan y,
               std::size_t j);

}  // namespace nlfilter

#endif  // NLFILTER_MODEL_HPP
