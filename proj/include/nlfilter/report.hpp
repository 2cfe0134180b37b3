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


#ifndef NLFILTER_REPORT_HPP
#define NLFILTER_REPORT_HPP

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "nlfilter/checks.hpp"
#include "nlfilter/filter.hpp"
#include "nlfilter/girsanov.hpp"

namespace nlfilter {

/// Decimal with 17 significant digits (round-trips every double).
std::string format_number(double v);

/// FNV-1a, 64 bit.
std::uint64_t fnv1a64(std::string_view bytes);

/// key=value lines, one per estimate (value and se as separate keys).
std::string to_key_value(const DiagnosticsReport& report);

/// CSV rows (scenario, quantity, estimate, se, n_paths, seed); `header` prepends the column row.
void write_diagnostics_csv(const DiagnosticsReport& report, std::ostream& out, bool header = true);

/// t, one column per test function, rho1, ess, resampled.
void write_filter_csv(const FilterTrajectory& traj, std::ostream& out);

/// check, scenario, estimate, reference, tolerance, pass, expected_fail; then "passed k/n".
void write_verdicts_csv(const std::vector<Verdict>& verdicts, std::ostream& out);

std::size_t count_passed(const std::vector<Verdict>& verdicts);

}  // namespace nlfilter

#endif  // NLFILTER_REPORT_HPP
