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


#ifndef NLFILTER_PATH_IO_HPP
#define NLFILTER_PATH_IO_HPP

#include <istream>
#include <ostream>
#include <string>

#include "nlfilter/simulate.hpp"

namespace nlfilter {

/// step, t, x_1..x_d, y_1..y_m with 17 significant digits.
void write_path_csv(const PathBundle& path, std::ostream& out);

/**
 * Reads the CSV written by write_path_csv. Recovers the grid, x and y; the noise
 * increments are not part of the CSV and come back empty. Throws ConfigError on bad input.
 */
PathBundle read_path_csv(std::istream& in);

/// step, t, mark_1..mark_r, one row per jump.
void write_jump_log_csv(const PathBundle& path, std::ostream& out);

/// Self-describing text dump: a header (format, version, seed, grid, dimensions) and all arrays.
std::string path_to_json(const PathBundle& path);
PathBundle path_from_json(const std::string& text);

}  // namespace nlfilter

#endif  // NLFILTER_PATH_IO_HPP
