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

#ifndef NLFILTER_PARALLEL_HPP
#define NLFILTER_PARALLEL_HPP

#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace nlfilter {

/// Every data-parallel kernel has a serial reference path; both must produce identical bits.
enum class Exec { serial, parallel };

inline void set_workers(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

inline int max_workers() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

/**
 * Runs body(i, scratch) for i in [0, n). Each worker builds its own scratch via make().
 *
 * Iterations must only write to slots owned by i. If iterations throw, the exception of
 * the lowest index is rethrown after the loop, so failure reporting does not depend on
 * the schedule.
 */
template <class MakeScratch, class Body>
void for_each_index(Exec exec, std::size_t n, MakeScratch&& make, Body&& body) {
  if (exec == Exec::serial) {
    auto scratch = make();
    for (std::size_t i = 0; i < n; ++i) body(i, scratch);
    return;
  }
  std::exception_ptr first_error;
  std::size_t first_index = std::numeric_limits<std::size_t>::max();
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel
  {
    auto scratch = make();
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < count; ++i) {
      try {
        body(static_cast<std::size_t>(i), scratch);
      } catch (...) {
#pragma omp critical(nlfilter_for_each_error)
        {
          if (static_cast<std::size_t>(i) < first_index) {
            first_index = static_cast<std::size_t>(i);
            first_error = std::current_exception();
          }
        }
      }
    }
  }
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace nlfilter

#endif  // NLFILTER_PARALLEL_HPP
