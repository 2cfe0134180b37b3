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

#ifndef NLFILTER_TYPES_HPP
#define NLFILTER_TYPES_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace nlfilter {

/// Row-major dense matrix; row k of a trajectory is contiguous and can be viewed as a span.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

using ConstSpan = std::span<const double>;
using MutSpan = std::span<double>;

inline ConstSpan row_view(const RowMatrix& m, Eigen::Index r) {
  return {m.data() + r * m.cols(), static_cast<std::size_t>(m.cols())};
}

inline MutSpan row_view(RowMatrix& m, Eigen::Index r) {
  return {m.data() + r * m.cols(), static_cast<std::size_t>(m.cols())};
}

inline ConstSpan as_span(const Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }
inline MutSpan as_span(Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

inline Eigen::Map<const Vector> as_vector(ConstSpan s) {
  return {s.data(), static_cast<Eigen::Index>(s.size())};
}

inline bool all_finite(ConstSpan s) {
  for (double v : s) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

/// A Monte Carlo estimate with its standard error.
struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

// Error hierarchy. Each maps onto one CLI exit code.

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite state during path simulation or particle propagation.
class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(const std::string& what, std::size_t step)
      : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// Particle weights degenerated below the collapse floor.
class FilterCollapse : public std::runtime_error {
 public:
  FilterCollapse(const std::string& what, std::size_t step)
      : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

}  // namespace nlfilter

#endif  // NLFILTER_TYPES_HPP
