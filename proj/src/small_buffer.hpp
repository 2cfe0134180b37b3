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

#ifndef NLFILTER_SRC_SMALL_BUFFER_HPP
#define NLFILTER_SRC_SMALL_BUFFER_HPP

#include <array>
#include <cstddef>
#include <vector>

#include "nlfilter/types.hpp"

namespace nlfilter::detail {

/// Zero-initialized scratch array; stays on the stack for the small dimensions used here.
class SmallBuffer {
 public:
  static constexpr std::size_t kInline = 32;

  explicit SmallBuffer(std::size_t n) : n_(n) {
    if (n > kInline) heap_.assign(n, 0.0);
  }
  SmallBuffer(const SmallBuffer&) = delete;
  SmallBuffer& operator=(const SmallBuffer&) = delete;

  double* data() { return n_ > kInline ? heap_.data() : inline_.data(); }
  const double* data() const { return n_ > kInline ? heap_.data() : inline_.data(); }
  std::size_t size() const { return n_; }
  double& operator[](std::size_t i) { return data()[i]; }
  double operator[](std::size_t i) const { return data()[i]; }
  MutSpan span() { return {data(), n_}; }
  ConstSpan cspan() const { return {data(), n_}; }

 private:
  std::size_t n_;
  std::array<double, kInline> inline_{};
  std::vector<double> heap_;
};

}  // namespace nlfilter::detail

#endif  // NLFILTER_SRC_SMALL_BUFFER_HPP
