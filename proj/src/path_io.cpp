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


#include "nlfilter/path_io.hpp"

#include <sstream>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "nlfilter/report.hpp"

namespace nlfilter {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "nlfilter.path_bundle";
constexpr int kVersion = 1;

json matrix_to_json(const RowMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

RowMatrix matrix_from_json(const json& rows, Eigen::Index n_rows, Eigen::Index n_cols,
                           const char* name) {
  if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != n_rows) {
    throw ConfigError(fmt::format("path dump: '{}' has the wrong number of rows", name));
  }
  RowMatrix m(n_rows, n_cols);
  for (Eigen::Index i = 0; i < n_rows; ++i) {
    const json& row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n_cols) {
      throw ConfigError(fmt::format("path dump: '{}' row {} has the wrong width", name, i));
    }
    for (Eigen::Index j = 0; j < n_cols; ++j) m(i, j) = row[static_cast<std::size_t>(j)].get<double>();
  }
  return m;
}

}  // namespace

void write_path_csv(const PathBundle& path, std::ostream& out) {
  out << "step,t";
  for (Eigen::Index i = 0; i < path.x.cols(); ++i) out << ",x_" << i + 1;
  for (Eigen::Index j = 0; j < path.y.cols(); ++j) out << ",y_" << j + 1;
  out << '\n';
  for (Eigen::Index k = 0; k < path.x.rows(); ++k) {
    out << k << ',' << format_number(path.grid.time(static_cast<std::size_t>(k)));
    for (Eigen::Index i = 0; i < path.x.cols(); ++i) out << ',' << format_number(path.x(k, i));
    for (Eigen::Index j = 0; j < path.y.cols(); ++j) out << ',' << format_number(path.y(k, j));
    out << '\n';
  }
}

PathBundle read_path_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("path csv: empty input");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 3 || header[0] != "step" || header[1] != "t") {
    throw ConfigError("path csv: header must start with step,t");
  }
  std::size_t d = 0, m = 0;
  for (std::size_t c = 2; c < header.size(); ++c) {
    if (header[c].rfind("x_", 0) == 0) {
      if (m != 0) throw ConfigError("path csv: x columns must precede y columns");
      ++d;
    } else if (header[c].rfind("y_", 0) == 0) {
      ++m;
    } else {
      throw ConfigError(fmt::format("path csv: unexpected column '{}'", header[c]));
    }
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> values;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        values.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ConfigError(fmt::format("path csv: bad number '{}'", cell));
      }
    }
    if (values.size() != header.size()) throw ConfigError("path csv: ragged row");
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw ConfigError("path csv: no data rows");
  const std::size_t n = rows.size() - 1;
  const double horizon = rows.back()[1];
  PathBundle out;
  out.grid = n == 0 ? TimeGrid{0.0, 1.0, 0} : TimeGrid::make(horizon, horizon / static_cast<double>(n));
  out.x.resize(static_cast<Eigen::Index>(n + 1), static_cast<Eigen::Index>(d));
  out.y.resize(static_cast<Eigen::Index>(n + 1), static_cast<Eigen::Index>(m));
  for (std::size_t k = 0; k <= n; ++k) {
    for (std::size_t i = 0; i < d; ++i) out.x(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = rows[k][2 + i];
    for (std::size_t j = 0; j < m; ++j) out.y(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = rows[k][2 + d + j];
  }
  return out;
}

void write_jump_log_csv(const PathBundle& path, std::ostream& out) {
  const auto r = path.levy_increments.cols();
  out << "step,t";
  for (Eigen::Index l = 0; l < r; ++l) out << ",mark_" << l + 1;
  out << '\n';
  for (const JumpEvent& e : path.jump_log) {
    out << e.step << ',' << format_number(path.grid.time(e.step));
    for (Eigen::Index l = 0; l < e.mark.size(); ++l) out << ',' << format_number(e.mark[l]);
    out << '\n';
  }
}

std::string path_to_json(const PathBundle& path) {
  json doc;
  doc["format"] = kFormat;
  doc["version"] = kVersion;
  doc["seed"] = path.seed;
  doc["path_index"] = path.path_index;
  doc["grid"] = {{"horizon", path.grid.horizon}, {"dt", path.grid.dt}, {"n_steps", path.grid.n_steps}};
  doc["dims"] = {{"x", path.x.cols()},
                 {"y", path.y.cols()},
                 {"v", path.v_increments.cols()},
                 {"l", path.levy_increments.cols()}};
  doc["x"] = matrix_to_json(path.x);
  doc["y"] = matrix_to_json(path.y);
  doc["w_increments"] = matrix_to_json(path.w_increments);
  doc["v_increments"] = matrix_to_json(path.v_increments);
  doc["levy_increments"] = matrix_to_json(path.levy_increments);
  json jumps = json::array();
  for (const JumpEvent& e : path.jump_log) {
    jumps.push_back({{"step", e.step}, {"mark", std::vector<double>(e.mark.data(), e.mark.data() + e.mark.size())}});
  }
  doc["jumps"] = std::move(jumps);
  return doc.dump() + "\n";
}

PathBundle path_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("path dump: {}", e.what()));
  }
  try {
    if (doc.at("format") != kFormat) throw ConfigError("path dump: unknown format");
    if (doc.at("version").get<int>() != kVersion) throw ConfigError("path dump: unsupported version");
    PathBundle out;
    out.seed = doc.at("seed").get<std::uint64_t>();
    out.path_index = doc.at("path_index").get<std::uint64_t>();
    const json& g = doc.at("grid");
    out.grid = {g.at("horizon").get<double>(), g.at("dt").get<double>(), g.at("n_steps").get<std::size_t>()};
    const json& dims = doc.at("dims");
    const auto n = static_cast<Eigen::Index>(out.grid.n_steps);
    const auto d = dims.at("x").get<Eigen::Index>(), m = dims.at("y").get<Eigen::Index>();
    const auto p = dims.at("v").get<Eigen::Index>(), r = dims.at("l").get<Eigen::Index>();
    out.x = matrix_from_json(doc.at("x"), n + 1, d, "x");
    out.y = matrix_from_json(doc.at("y"), n + 1, m, "y");
    out.w_increments = matrix_from_json(doc.at("w_increments"), n, m, "w_increments");
    out.v_increments = matrix_from_json(doc.at("v_increments"), n, p, "v_increments");
    out.levy_increments = matrix_from_json(doc.at("levy_increments"), n, r, "levy_increments");
    for (const json& e : doc.at("jumps")) {
      const auto mark = e.at("mark").get<std::vector<double>>();
      out.jump_log.push_back({e.at("step").get<std::size_t>(),
                              Eigen::Map<const Vector>(mark.data(), static_cast<Eigen::Index>(mark.size()))});
    }
    return out;
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("path dump: {}", e.what()));
  }
}

}  // namespace nlfilter
