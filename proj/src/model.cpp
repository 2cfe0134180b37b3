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

#include "nlfilter/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "small_buffer.hpp"

namespace nlfilter {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }
double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

void require_derivatives(const TestFunction& phi, bool need_hessian) {
  if (!phi.grad_x) {
    throw ModelError(fmt::format("test function '{}' has no x-gradient", phi.label));
  }
  if (need_hessian && !phi.hess_x) {
    throw ModelError(fmt::format("test function '{}' has no second derivatives", phi.label));
  }
}

void check_index(std::size_t i, std::size_t m, const char* op) {
  if (i >= m) {
    throw std::out_of_range(fmt::format("{}: observation index {} out of range (m = {})", op, i, m));
  }
}

}  // namespace

// --------------------------------------------------------------------------- LevySpec

LevySpec LevySpec::discrete(double rate, std::vector<JumpAtom> atoms, Vector drift_a) {
  if (atoms.empty()) throw ModelError("discrete jump law needs at least one atom");
  const auto r = drift_a.size();
  LevySpec spec;
  spec.jump_rate = rate;
  spec.drift_a = std::move(drift_a);
  spec.mark_mean = Vector::Zero(r);
  spec.large_mark_mean = Vector::Zero(r);
  spec.mark_second_moment = Matrix::Zero(r, r);
  double total = 0.0;
  for (const auto& atom : atoms) {
    if (atom.mark.size() != r) throw ModelError("jump atom dimension mismatch");
    total += atom.probability;
  }
  if (!(std::abs(total - 1.0) < 1e-12)) {
    throw ModelError(fmt::format("jump atom probabilities sum to {}, expected 1", total));
  }
  for (const auto& atom : atoms) {
    spec.mark_mean += atom.probability * atom.mark;
    if (atom.mark.norm() >= 1.0) spec.large_mark_mean += atom.probability * atom.mark;
    spec.mark_second_moment += atom.probability * atom.mark * atom.mark.transpose();
  }
  spec.atoms = std::move(atoms);
  spec.validate();
  return spec;
}

LevySpec LevySpec::gaussian_marks(double rate, double mean, double stddev, double drift_a) {
  if (!(stddev > 0.0)) throw ModelError("gaussian mark law needs stddev > 0");
  LevySpec spec;
  spec.jump_rate = rate;
  spec.drift_a = Vector::Constant(1, drift_a);
  spec.mark_mean = Vector::Constant(1, mean);
  const double hi = (1.0 - mean) / stddev;
  const double lo = (-1.0 - mean) / stddev;
  const double upper = mean * (1.0 - normal_cdf(hi)) + stddev * normal_pdf(hi);
  const double lower = mean * normal_cdf(lo) - stddev * normal_pdf(lo);
  spec.large_mark_mean = Vector::Constant(1, upper + lower);
  spec.mark_second_moment = Matrix::Constant(1, 1, mean * mean + stddev * stddev);
  spec.mark_sampler = [mean, stddev](CounterRng& rng, MutSpan out) {
    std::normal_distribution<double> normal(mean, stddev);
    out[0] = normal(rng);
  };
  spec.validate();
  return spec;
}

void LevySpec::sample_mark(CounterRng& rng, MutSpan out) const {
  if (atoms.empty()) {
    mark_sampler(rng, out);
    return;
  }
  const double u = rng.uniform_open();
  double cumulative = 0.0;
  std::size_t pick = atoms.size() - 1;
  for (std::size_t a = 0; a < atoms.size(); ++a) {
    cumulative += atoms[a].probability;
    if (u < cumulative) {
      pick = a;
      break;
    }
  }
  const Vector& mark = atoms[pick].mark;
  std::copy(mark.data(), mark.data() + mark.size(), out.begin());
}

void LevySpec::validate() const {
  if (!(jump_rate >= 0.0) || !std::isfinite(jump_rate)) {
    throw ModelError("jump rate must be finite and nonnegative");
  }
  if (atoms.empty() && !mark_sampler && jump_rate > 0.0) {
    throw ModelError("jump law needs atoms or a sampler");
  }
  for (const auto& atom : atoms) {
    if (atom.mark.norm() == 0.0) throw ModelError("jump law must not charge the origin");
    if (atom.probability < 0.0) throw ModelError("negative atom probability");
  }
  const Matrix m2 = second_moment();
  if (!m2.allFinite()) throw ModelError("jump second moment is not finite");
  if ((m2 - m2.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + m2.cwiseAbs().maxCoeff())) {
    throw ModelError("jump second moment is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m2);
  if (eig.eigenvalues().minCoeff() < -1e-12) throw ModelError("jump second moment is not PSD");
  if (!drift_b().allFinite()) throw ModelError("compensated drift is not finite");
}

// --------------------------------------------------------------------------- coefficients

CoefficientValues::CoefficientValues(const SignalModel& model)
    : f(Vector::Zero(model.dim_x)),
      drift_tilde(Vector::Zero(model.dim_x)),
      sigma(RowMatrix::Zero(model.dim_x, model.dim_v)),
      sigma_bar(RowMatrix::Zero(model.dim_x, model.dim_y)),
      sigma_tilde(RowMatrix::Zero(model.dim_x, model.dim_l)),
      h(Vector::Zero(model.dim_y)) {}

void evaluate_coefficients(const SignalModel& model, ConstSpan x, ConstSpan y,
                           CoefficientValues& out) {
  auto span_of = [](auto& m) { return MutSpan(m.data(), static_cast<std::size_t>(m.size())); };
  if (model.drift) model.drift(x, span_of(out.f));
  if (model.sigma && model.dim_v > 0) model.sigma(x, span_of(out.sigma));
  if (model.sigma_bar) model.sigma_bar(x, span_of(out.sigma_bar));
  if (model.sigma_tilde && model.dim_l > 0) model.sigma_tilde(x, span_of(out.sigma_tilde));
  if (model.sensor) model.sensor(x, y, span_of(out.h));
  out.drift_tilde = out.f;
  if (model.levy && model.dim_l > 0) out.drift_tilde.noalias() += out.sigma_tilde * model.levy->drift_b();
}

// --------------------------------------------------------------------------- validation

bool ValidationReport::pass() const {
  return levy_second_moment_finite &&
         std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.pass; });
}

std::vector<Vector> probe_grid(std::size_t dim, double radius, std::size_t per_axis) {
  std::vector<Vector> probes;
  if (per_axis == 0 || dim == 0) return probes;
  std::size_t total = 1;
  for (std::size_t i = 0; i < dim; ++i) total *= per_axis;
  probes.reserve(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    Vector p(dim);
    std::size_t rem = idx;
    for (std::size_t i = 0; i < dim; ++i) {
      const std::size_t k = rem % per_axis;
      rem /= per_axis;
      p[static_cast<Eigen::Index>(i)] =
          per_axis == 1 ? 0.0 : -radius + 2.0 * radius * static_cast<double>(k) / (per_axis - 1);
    }
    probes.push_back(std::move(p));
  }
  return probes;
}

ValidationReport validate_model(const SignalModel& model, const std::vector<Vector>& probes) {
  if (probes.empty()) throw ModelError("validate_model: probe list is empty");
  CoefficientValues c(model);
  const Vector y0 = Vector::Zero(model.dim_y);

  ValidationEntry f{"f", 0.0, model.linear_growth_K, true};
  ValidationEntry s{"sigma", 0.0, model.linear_growth_K, true};
  ValidationEntry sb{"sigma_bar", 0.0, model.linear_growth_K, true};
  ValidationEntry st{"sigma_tilde", 0.0, model.linear_growth_K, true};
  ValidationEntry h{"h", 0.0, model.linear_growth_K, true};
  ValidationEntry sb_bound{"sigma_bar_bound", 0.0, model.sigma_bar_bound.value_or(0.0), true};

  for (const Vector& x : probes) {
    if (static_cast<std::size_t>(x.size()) != model.dim_x) {
      throw ModelError("validate_model: probe dimension mismatch");
    }
    evaluate_coefficients(model, as_span(x), as_span(y0), c);
    if (!c.f.allFinite() || !c.sigma.allFinite() || !c.sigma_bar.allFinite() ||
        !c.sigma_tilde.allFinite() || !c.h.allFinite()) {
      throw ModelError(fmt::format("model '{}' has non-finite coefficients at a probe point",
                                   model.name));
    }
    const double scale = 1.0 + x.norm();
    f.max_ratio = std::max(f.max_ratio, c.f.norm() / scale);
    s.max_ratio = std::max(s.max_ratio, c.sigma.norm() / scale);
    sb.max_ratio = std::max(sb.max_ratio, c.sigma_bar.norm() / scale);
    st.max_ratio = std::max(st.max_ratio, c.sigma_tilde.norm() / scale);
    h.max_ratio = std::max(h.max_ratio, c.h.norm() / scale);
    sb_bound.max_ratio = std::max(sb_bound.max_ratio, c.sigma_bar.norm());
  }

  ValidationReport report;
  for (auto* e : {&f, &s, &sb, &st, &h}) {
    e->pass = e->max_ratio <= e->bound;
    report.entries.push_back(*e);
  }
  if (model.sigma_bar_bound) {
    sb_bound.pass = sb_bound.max_ratio <= sb_bound.bound;
    report.entries.push_back(sb_bound);
  }
  if (model.levy) {
    const Matrix m2 = model.levy->second_moment();
    report.levy_second_moment_finite = m2.allFinite();
  }
  return report;
}

// --------------------------------------------------------------------------- operators

GeneratorEstimate apply_generator(const SignalModel& model, const TestFunction& phi, ConstSpan x,
                                  ConstSpan y, const JumpQuadrature& quad) {
  CoefficientValues c(model);
  evaluate_coefficients(model, x, y, c);
  return apply_generator(model, c, phi, x, y, quad);
}

GeneratorEstimate apply_generator(const SignalModel& model, const CoefficientValues& c,
                                  const TestFunction& phi, ConstSpan x, ConstSpan y,
                                  const JumpQuadrature& quad) {
  require_derivatives(phi, true);
  const std::size_t d = model.dim_x;
  const std::size_t m = model.dim_y;
  const std::size_t p = model.dim_v;

  detail::SmallBuffer grad(d), hess(d * d);
  phi.grad_x(x, y, grad.span());
  phi.hess_x(x, y, hess.span());

  double value = 0.0;
  for (std::size_t i = 0; i < d; ++i) value += c.drift_tilde[static_cast<Eigen::Index>(i)] * grad[i];

  // 1/2 (sigma sigma^T + sigma_bar sigma_bar^T) : hess
  double diffusion = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const double hij = hess[i * d + j];
      if (hij == 0.0) continue;
      double a = 0.0;
      const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
      for (std::size_t k = 0; k < p; ++k) {
        a += c.sigma(ii, static_cast<Eigen::Index>(k)) * c.sigma(jj, static_cast<Eigen::Index>(k));
      }
      for (std::size_t k = 0; k < m; ++k) {
        a += c.sigma_bar(ii, static_cast<Eigen::Index>(k)) *
             c.sigma_bar(jj, static_cast<Eigen::Index>(k));
      }
      diffusion += a * hij;
    }
  }
  value += 0.5 * diffusion;

  if (!phi.y_independent()) {
    detail::SmallBuffer gy(m);
    phi.grad_y(x, y, gy.span());
    for (std::size_t k = 0; k < m; ++k) value += c.h[static_cast<Eigen::Index>(k)] * gy[k];
    if (phi.hess_y) {
      detail::SmallBuffer hy(m * m);
      phi.hess_y(x, y, hy.span());
      for (std::size_t k = 0; k < m; ++k) value += 0.5 * hy[k * m + k];
    }
    if (phi.hess_xy) {
      // d<X^i, Y^k> = sigma_bar^{ik} dt
      detail::SmallBuffer hxy(d * m);
      phi.hess_xy(x, y, hxy.span());
      for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t k = 0; k < m; ++k) {
          value += c.sigma_bar(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) *
                   hxy[i * m + k];
        }
      }
    }
  }

  GeneratorEstimate out{value, 0.0, true};
  if (!model.levy || model.dim_l == 0 || model.levy->jump_rate == 0.0) {
    if (!std::isfinite(out.value)) throw ModelError("apply_generator: non-finite result");
    return out;
  }

  const LevySpec& levy = *model.levy;
  const std::size_t r = model.dim_l;
  const double phi0 = phi.value(x, y);
  detail::SmallBuffer shifted(d), eta(r);
  auto integrand = [&](ConstSpan mark) {
    double directional = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      double jump_i = 0.0;
      for (std::size_t l = 0; l < r; ++l) {
        jump_i += c.sigma_tilde(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l)) * mark[l];
      }
      shifted[i] = x[i] + jump_i;
      directional += grad[i] * jump_i;
    }
    return phi.value(shifted.cspan(), y) - phi0 - directional;
  };

  if (levy.is_discrete()) {
    double jump = 0.0;
    for (const auto& atom : levy.atoms) {
      jump += atom.probability * integrand(as_span(atom.mark));
    }
    out.value += levy.jump_rate * jump;
  } else {
    if (quad.samples < 2) throw ModelError("apply_generator: need >= 2 quadrature samples");
    auto rng = CounterRng::for_coords(quad.seed, StreamDomain::quadrature, {});
    double mean = 0.0, m2 = 0.0;
    for (std::size_t n = 0; n < quad.samples; ++n) {
      levy.sample_mark(rng, eta.span());
      const double v = integrand(eta.cspan());
      const double delta = v - mean;
      mean += delta / static_cast<double>(n + 1);
      m2 += delta * (v - mean);
    }
    const double var = m2 / static_cast<double>(quad.samples - 1);
    out.value += levy.jump_rate * mean;
    out.se = levy.jump_rate * std::sqrt(var / static_cast<double>(quad.samples));
    out.exact = false;
  }
  if (!std::isfinite(out.value)) throw ModelError("apply_generator: non-finite result");
  return out;
}

double apply_correlation(const SignalModel& model, const TestFunction& phi, ConstSpan x,
                         ConstSpan y, std::size_t i) {
  check_index(i, model.dim_y, "apply_correlation");
  CoefficientValues c(model);
  evaluate_coefficients(model, x, y, c);
  return apply_correlation(c, phi, x, y, i);
}

double apply_correlation(const CoefficientValues& c, const TestFunction& phi, ConstSpan x,
                         ConstSpan y, std::size_t i) {
  const auto m = static_cast<std::size_t>(c.sigma_bar.cols());
  check_index(i, m, "apply_correlation");
  require_derivatives(phi, false);
  const auto d = static_cast<std::size_t>(c.sigma_bar.rows());
  detail::SmallBuffer grad(d);
  phi.grad_x(x, y, grad.span());
  double out = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    out += c.sigma_bar(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) * grad[k];
  }
  return out;
}

double apply_D(const SignalModel& model, const TestFunction& phi, ConstSpan x, ConstSpan y,
               std::size_t j) {
  check_index(j, model.dim_y, "apply_D");
  CoefficientValues c(model);
  evaluate_coefficients(model, x, y, c);
  return apply_D(c, phi, x, y, j);
}

double apply_D(const CoefficientValues& c, const TestFunction& phi, ConstSpan x, ConstSpan y,
               std::size_t j) {
  const auto m = static_cast<std::size_t>(c.h.size());
  check_index(j, m, "apply_D");
  double out = c.h[static_cast<Eigen::Index>(j)] * phi.value(x, y) + apply_correlation(c, phi, x, y, j);
  if (!phi.y_independent()) {
    detail::SmallBuffer gy(m);
    phi.grad_y(x, y, gy.span());
    out += gy[j];
  }
  return out;
}

// --------------------------------------------------------------------------- test functions

namespace test_functions {

namespace {

void zero(ConstSpan, ConstSpan, MutSpan out) { std::fill(out.begin(), out.end(), 0.0); }

}  // namespace

TestFunction constant(double c) {
  TestFunction f;
  f.label = c == 1.0 ? "one" : fmt::format("const_{}", c);
  f.value = [c](ConstSpan, ConstSpan) { return c; };
  f.grad_x = zero;
  f.hess_x = zero;
  return f;
}

TestFunction coordinate(std::size_t i) {
  TestFunction f;
  f.label = fmt::format("x{}", i + 1);
  f.value = [i](ConstSpan x, ConstSpan) { return x[i]; };
  f.grad_x = [i](ConstSpan, ConstSpan, MutSpan out) {
    std::fill(out.begin(), out.end(), 0.0);
    out[i] = 1.0;
  };
  f.hess_x = zero;
  return f;
}

TestFunction product(std::size_t i, std::size_t j) {
  TestFunction f;
  f.label = i == j ? fmt::format("x{}^2", i + 1) : fmt::format("x{}x{}", i + 1, j + 1);
  f.value = [i, j](ConstSpan x, ConstSpan) { return x[i] * x[j]; };
  f.grad_x = [i, j](ConstSpan x, ConstSpan, MutSpan out) {
    std::fill(out.begin(), out.end(), 0.0);
    out[i] += x[j];
    out[j] += x[i];
  };
  f.hess_x = [i, j](ConstSpan x, ConstSpan, MutSpan out) {
    std::fill(out.begin(), out.end(), 0.0);
    const std::size_t d = x.size();
    out[i * d + j] += 1.0;
    out[j * d + i] += 1.0;
  };
  return f;
}

TestFunction tanh_of(std::size_t i) {
  TestFunction f;
  f.label = fmt::format("tanh_x{}", i + 1);
  f.value = [i](ConstSpan x, ConstSpan) { return std::tanh(x[i]); };
  f.grad_x = [i](ConstSpan x, ConstSpan, MutSpan out) {
    std::fill(out.begin(), out.end(), 0.0);
    const double t = std::tanh(x[i]);
    out[i] = 1.0 - t * t;
  };
  f.hess_x = [i](ConstSpan x, ConstSpan, MutSpan out) {
    std::fill(out.begin(), out.end(), 0.0);
    const double t = std::tanh(x[i]);
    out[i * x.size() + i] = -2.0 * t * (1.0 - t * t);
  };
  return f;
}

TestFunction indicator_nonnegative(std::size_t i) {
  TestFunction f;
  f.label = fmt::format("ind_x{}", i + 1);
  f.value = [i](ConstSpan x, ConstSpan) { return x[i] >= 0.0 ? 1.0 : 0.0; };
  return f;
}

TestFunction coordinate_times_obs(std::size_t i, std::size_t k) {
  TestFunction f;
  f.label = fmt::format("x{}y{}", i + 1, k + 1);
  f.value = [i, k](ConstSpan x, ConstSpan y) { return x[i] * y[k]; };
  f.grad_x = [i, k](ConstSpan, ConstSpan y, MutSpan out) {
    std::fill(out.begin(), out.end(), 0.0);
    out[i] = y[k];
  };
  f.hess_x = zero;
  f.grad_y = [i, k](ConstSpan x, ConstSpan, MutSpan out) {
    std::fill(out.begin(), out.end(), 0.0);
    out[k] = x[i];
  };
  f.hess_y = zero;
  f.hess_xy = [i, k](ConstSpan, ConstSpan y, MutSpan out) {
    std::fill(out.begin(), out.end(), 0.0);
    out[i * y.size() + k] = 1.0;
  };
  return f;
}

TestFunction cos_sin(std::size_t i, std::size_t k) {
  TestFunction f;
  f.label = fmt::format("cos_x{}_sin_y{}", i + 1, k + 1);
  f.value = [i, k](ConstSpan x, ConstSpan y) { return std::cos(x[i]) * std::sin(y[k]); };
  f.grad_x = [i, k](ConstSpan x, ConstSpan y, MutSpan out) {
    std::fill(out.begin(), out.end(), 0.0);
    out[i] = -std::sin(x[i]) * std::sin(y[k]);
  };
  f.hess_x = [i, k](ConstSpan x, ConstSpan y, MutSpan out) {
    std::fill(out.begin(), out.end(), 0.0);
    out[i * x.size() + i] = -std::cos(x[i]) * std::sin(y[k]);
  };
  f.grad_y = [i, k](ConstSpan x, ConstSpan y, MutSpan out) {
    std::fill(out.begin(), out.end(), 0.0);
    out[k] = std::cos(x[i]) * std::cos(y[k]);
  };
  f.hess_y = [i, k](ConstSpan x, ConstSpan y, MutSpan out) {
    std::fill(out.begin(), out.end(), 0.0);
    out[k * y.size() + k] = -std::cos(x[i]) * std::sin(y[k]);
  };
  f.hess_xy = [i, k](ConstSpan x, ConstSpan y, MutSpan out) {
    std::fill(out.begin(), out.end(), 0.0);
    out[i * y.size() + k] = -std::sin(x[i]) * std::cos(y[k]);
  };
  return f;
}

std::vector<TestFunction> battery(std::size_t dim_x) {
  std::vector<TestFunction> out;
  out.push_back(constant(1.0));
  for (std::size_t i = 0; i < dim_x; ++i) out.push_back(coordinate(i));
  for (std::size_t i = 0; i < dim_x; ++i) {
    for (std::size_t j = i; j < dim_x; ++j) out.push_back(product(i, j));
  }
  for (std::size_t i = 0; i < dim_x; ++i) out.push_back(tanh_of(i));
  return out;
}

}  // namespace test_functions

DerivativeCheck check_derivatives(const TestFunction& phi, ConstSpan x, ConstSpan y, double step) {
  require_derivatives(phi, true);
  const std::size_t d = x.size();
  std::vector<double> xp(x.begin(), x.end());
  std::vector<double> grad(d), hess(d * d), gp(d), gm(d);
  phi.grad_x(x, y, grad);
  phi.hess_x(x, y, hess);

  DerivativeCheck out;
  double grad_scale = 0.0, hess_scale = 0.0, grad_err = 0.0, hess_err = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double h = step * std::max(1.0, std::abs(x[i]));
    xp[i] = x[i] + h;
    const double fp = phi.value(xp, y);
    phi.grad_x(xp, y, gp);
    xp[i] = x[i] - h;
    const double fm = phi.value(xp, y);
    phi.grad_x(xp, y, gm);
    xp[i] = x[i];
    grad_err = std::max(grad_err, std::abs((fp - fm) / (2.0 * h) - grad[i]));
    grad_scale = std::max(grad_scale, std::abs(grad[i]));
    for (std::size_t j = 0; j < d; ++j) {
      const double fd = (gp[j] - gm[j]) / (2.0 * h);
      hess_err = std::max(hess_err, std::abs(fd - hess[j * d + i]));
      hess_scale = std::max(hess_scale, std::abs(hess[j * d + i]));
    }
  }
  out.grad_rel_error = grad_err / std::max(1.0, grad_scale);
  out.hess_rel_error = hess_err / std::max(1.0, hess_scale);
  if (!phi.y_independent()) {
    std::vector<double> gy(y.size());
    phi.grad_y(x, y, gy);
    for (double v : gy) out.grad_y_abs = std::max(out.grad_y_abs, std::abs(v));
  }
  return out;
}

}  // namespace nlfilter
