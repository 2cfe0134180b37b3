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


#include "nlfilter/models.hpp"

#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>

namespace nlfilter {

void LinearGaussianSpec::validate() const {
  const auto d = drift.rows();
  const auto m = sensor.rows();
  if (d == 0 || drift.cols() != d) throw ModelError("linear spec: drift must be square and non-empty");
  if (sigma.rows() != d) throw ModelError("linear spec: sigma must have d rows");
  if (sigma_bar.rows() != d || sigma_bar.cols() != m) {
    throw ModelError("linear spec: sigma_bar must be d x m");
  }
  if (m == 0 || sensor.cols() != d) throw ModelError("linear spec: sensor must be m x d");
  if (prior_mean.size() != d) throw ModelError("linear spec: prior_mean must have length d");
  if (prior_cov.rows() != d || prior_cov.cols() != d) {
    throw ModelError("linear spec: prior_cov must be d x d");
  }
  if (drift_offset.size() != 0 && drift_offset.size() != d) {
    throw ModelError("linear spec: drift_offset must have length d");
  }
  if (sensor_offset.size() != 0 && sensor_offset.size() != m) {
    throw ModelError("linear spec: sensor_offset must have length m");
  }
  if (!drift.allFinite() || !sigma.allFinite() || !sigma_bar.allFinite() || !sensor.allFinite() ||
      !prior_mean.allFinite() || !prior_cov.allFinite()) {
    throw ModelError("linear spec: non-finite entry");
  }
  if ((prior_cov - prior_cov.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw ModelError("linear spec: prior_cov is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(prior_cov);
  if (eig.eigenvalues().minCoeff() < -1e-12) throw ModelError("linear spec: prior_cov is not PSD");
}

namespace models {

namespace {

// Row-major copy of a (column-major) Eigen matrix into a coefficient output span.
void write_row_major(const Matrix& m, MutSpan out) {
  const auto rows = m.rows(), cols = m.cols();
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) out[static_cast<std::size_t>(i * cols + j)] = m(i, j);
  }
}

Matrix psd_sqrt(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(a);
  return eig.operatorSqrt();
}

std::vector<double> normalized(const std::vector<double>& grid, const std::vector<double>& w,
                               const char* what) {
  if (grid.empty()) throw ModelError(fmt::format("change detection: empty {} grid", what));
  if (w.empty()) return std::vector<double>(grid.size(), 1.0 / static_cast<double>(grid.size()));
  if (w.size() != grid.size()) {
    throw ModelError(fmt::format("change detection: {} weights do not match the grid", what));
  }
  double total = 0.0;
  for (double v : w) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ModelError(fmt::format("change detection: invalid {} weight", what));
    }
    total += v;
  }
  if (!(total > 0.0)) throw ModelError(fmt::format("change detection: {} weights sum to 0", what));
  std::vector<double> out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = w[i] / total;
  return out;
}

std::size_t draw_index(const std::vector<double>& probs, double u) {
  double cumulative = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    cumulative += probs[i];
    if (u < cumulative) return i;
  }
  return probs.size() - 1;
}

}  // namespace

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return out;
}

LinearGaussianSpec scalar_linear_spec(const ScalarLinearParams& p) {
  LinearGaussianSpec spec;
  spec.drift = Matrix::Constant(1, 1, p.a);
  spec.sigma = Matrix::Constant(1, 1, p.sigma);
  spec.sigma_bar = Matrix::Constant(1, 1, p.sigma_bar);
  spec.sensor = Matrix::Constant(1, 1, p.sensor);
  spec.prior_mean = Vector::Constant(1, p.prior_mean);
  spec.prior_cov = Matrix::Constant(1, 1, p.prior_var);
  return spec;
}

SignalModel from_linear(const LinearGaussianSpec& spec, std::string name) {
  spec.validate();
  SignalModel model;
  model.name = std::move(name);
  model.dim_x = spec.dim_x();
  model.dim_v = spec.dim_v();
  model.dim_y = spec.dim_y();
  model.dim_l = 0;

  const Matrix a = spec.drift;
  const Vector c = spec.drift_offset.size() ? spec.drift_offset : Vector::Zero(spec.drift.rows());
  model.drift = [a, c](ConstSpan x, MutSpan out) {
    Eigen::Map<Vector> o(out.data(), static_cast<Eigen::Index>(out.size()));
    o.noalias() = a * as_vector(x) + c;
  };
  const Matrix s = spec.sigma;
  model.sigma = [s](ConstSpan, MutSpan out) { write_row_major(s, out); };
  const Matrix sb = spec.sigma_bar;
  model.sigma_bar = [sb](ConstSpan, MutSpan out) { write_row_major(sb, out); };
  const Matrix hm = spec.sensor;
  const Vector h0 = spec.sensor_offset.size() ? spec.sensor_offset : Vector::Zero(spec.sensor.rows());
  model.sensor = [hm, h0](ConstSpan x, ConstSpan, MutSpan out) {
    Eigen::Map<Vector> o(out.data(), static_cast<Eigen::Index>(out.size()));
    o.noalias() = hm * as_vector(x) + h0;
  };

  // Smallest K with |g(x)| <= K (1 + |x|) for every affine coefficient.
  auto op_norm = [](const Matrix& m) {
    return m.size() == 0 ? 0.0 : Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
  };
  model.linear_growth_K = std::max({op_norm(a), c.norm(), s.norm(), sb.norm(), op_norm(hm),
                                    h0.norm(), 1e-12}) *
                          (1.0 + 1e-9);
  model.sigma_bar_bound = sb.norm() * (1.0 + 1e-12);

  const Vector mean = spec.prior_mean;
  const Matrix chol = psd_sqrt(spec.prior_cov);
  model.initial_law = [mean, chol](CounterRng& rng, MutSpan out) {
    std::normal_distribution<double> normal;
    Vector z(mean.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
    Eigen::Map<Vector>(out.data(), mean.size()) = mean + chol * z;
  };
  model.initial_second_moment = spec.prior_mean.squaredNorm() + spec.prior_cov.trace();
  model.linear = spec;
  return model;
}

SignalModel linear_gaussian(ScalarLinearParams p) {
  return from_linear(scalar_linear_spec(p), "linear_gaussian");
}

SignalModel correlated_linear(ScalarLinearParams p) {
  return from_linear(scalar_linear_spec(p), "correlated_linear");
}

SignalModel decorrelated(const SignalModel& model) {
  if (!model.linear) throw ModelError("decorrelated: model has no linear-Gaussian structure");
  LinearGaussianSpec spec = *model.linear;
  const Matrix q = spec.sigma * spec.sigma.transpose() + spec.sigma_bar * spec.sigma_bar.transpose();
  spec.sigma = psd_sqrt(q);
  spec.sigma_bar.setZero();
  return from_linear(spec, model.name + "_decorrelated");
}

SignalModel jump_ou(JumpOuParams p) {
  if (p.atoms.empty()) {
    p.atoms = {{Vector::Constant(1, 0.5), 0.5},
               {Vector::Constant(1, 1.5), 0.25},
               {Vector::Constant(1, -1.0), 0.25}};
  }
  SignalModel model;
  model.name = "jump_ou";
  model.dim_x = 1;
  model.dim_v = 1;
  model.dim_y = 1;
  model.dim_l = 1;
  const double k = p.mean_reversion;
  model.drift = [k](ConstSpan x, MutSpan out) { out[0] = -k * x[0]; };
  const double s = p.sigma, sb = p.sigma_bar, st = p.jump_scale;
  model.sigma = [s](ConstSpan, MutSpan out) { out[0] = s; };
  model.sigma_bar = [sb](ConstSpan, MutSpan out) { out[0] = sb; };
  model.sigma_tilde = [st](ConstSpan, MutSpan out) { out[0] = st; };
  model.sensor = [](ConstSpan x, ConstSpan, MutSpan out) { out[0] = x[0]; };
  model.levy = LevySpec::discrete(p.jump_rate, p.atoms, Vector::Constant(1, p.levy_drift_a));
  model.linear_growth_K = std::max({std::abs(k), std::abs(s), std::abs(sb), std::abs(st), 1.0});
  model.sigma_bar_bound = std::abs(sb);
  const double sd = std::sqrt(p.prior_var);
  model.initial_law = [sd](CounterRng& rng, MutSpan out) {
    std::normal_distribution<double> normal(0.0, sd);
    out[0] = normal(rng);
  };
  model.initial_second_moment = p.prior_var;
  return model;
}

ChangeDetectionParams ChangeDetectionParams::defaults() {
  ChangeDetectionParams p;
  p.b0 = 0.5;
  p.b_grid = linspace(0.0, 2.0, 21);
  p.tau_grid = linspace(0.0, 2.0, 21);
  return p;
}

ChangeDetectionParams ChangeDetectionParams::fixed(double b0, double b, double tau) {
  ChangeDetectionParams p;
  p.b0 = b0;
  p.b_grid = {b};
  p.tau_grid = {tau};
  return p;
}

std::vector<double> ChangeDetectionParams::b_prior() const { return normalized(b_grid, b_weights, "b"); }

std::vector<double> ChangeDetectionParams::tau_prior() const {
  for (double tau : tau_grid) {
    if (!(tau >= 0.0)) throw ModelError("change detection: change times must be nonnegative");
  }
  return normalized(tau_grid, tau_weights, "tau");
}

SignalModel change_detection(const ChangeDetectionParams& p) {
  const std::vector<double> b_prior = p.b_prior();
  const std::vector<double> tau_prior = p.tau_prior();
  SignalModel model;
  model.name = "change_detection";
  model.dim_x = 2;
  model.dim_v = 0;
  model.dim_y = 1;
  model.dim_l = 0;
  model.drift = [](ConstSpan, MutSpan out) {
    out[0] = 0.0;
    out[1] = 1.0;
  };
  const double b0 = p.b0;
  model.sensor = [b0](ConstSpan x, ConstSpan y, MutSpan out) {
    const double rate = x[1] >= -kClockTolerance ? b0 + x[0] : b0;
    out[0] = rate * y[0];
  };
  // The sensor grows with y, not x; the probe check evaluates it at y = 0.
  model.linear_growth_K = 1.0;
  model.sigma_bar_bound = 0.0;
  const std::vector<double> b_grid = p.b_grid, tau_grid = p.tau_grid;
  model.initial_law = [b_grid, tau_grid, b_prior, tau_prior](CounterRng& rng, MutSpan out) {
    out[0] = b_grid[draw_index(b_prior, rng.uniform_open())];
    out[1] = -tau_grid[draw_index(tau_prior, rng.uniform_open())];
  };
  double m2 = 0.0;
  for (std::size_t i = 0; i < b_grid.size(); ++i) m2 += b_prior[i] * b_grid[i] * b_grid[i];
  for (std::size_t i = 0; i < tau_grid.size(); ++i) m2 += tau_prior[i] * tau_grid[i] * tau_grid[i];
  model.initial_second_moment = m2;
  return model;
}

TestFunction change_indicator() {
  TestFunction f;
  f.label = "prob_change";
  f.value = [](ConstSpan x, ConstSpan) { return x[1] >= -kClockTolerance ? 1.0 : 0.0; };
  return f;
}

const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names = {"linear_gaussian", "correlated_linear", "jump_ou",
                                                 "change_detection"};
  return names;
}

}  // namespace models
}  // namespace nlfilter
