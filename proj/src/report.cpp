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


#include "nlfilter/report.hpp"

#include <algorithm>
#include <utility>

#include <fmt/format.h>

namespace nlfilter {

std::string format_number(double v) { return fmt::format("{:.17g}", v); }

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

namespace {

std::vector<std::pair<std::string, Estimate>> scalar_rows(const DiagnosticsReport& r) {
  return {{"e_z", r.e_z},
          {"transformed_energy", r.transformed_energy},
          {"z_log_z", r.z_log_z},
          {"z_star", r.z_star},
          {"plain_energy", r.plain_energy},
          {"z_times_plain_energy", r.z_times_plain},
          {"zlogz_minus_half_energy", r.zlogz_minus_half_energy},
          {"energy_identity_gap", r.energy_identity_gap},
          {"zstar_excess", r.zstar_excess}};
}

}  // namespace

std::string to_key_value(const DiagnosticsReport& report) {
  std::string out;
  out += fmt::format("scenario={}\nseed={}\nhorizon={}\nn_paths={}\noverflow_paths={}\n",
                     report.scenario, report.seed, format_number(report.horizon), report.n_paths,
                     report.overflow_paths);
  for (const auto& [key, e] : scalar_rows(report)) {
    out += fmt::format("{}={}\n{}_se={}\n", key, format_number(e.value), key, format_number(e.se));
  }
  return out;
}

void write_diagnostics_csv(const DiagnosticsReport& report, std::ostream& out, bool header) {
  if (header) out << "scenario,quantity,estimate,se,n_paths,seed\n";
  auto row = [&](const std::string& quantity, const Estimate& e) {
    out << fmt::format("{},{},{},{},{},{}\n", report.scenario, quantity, format_number(e.value),
                       format_number(e.se), report.n_paths, report.seed);
  };
  for (const auto& [key, e] : scalar_rows(report)) row(key, e);
  for (std::size_t i = 0; i < report.times.size(); ++i) {
    const std::string t = format_number(report.times[i]);
    row("e_z@t=" + t, report.e_z_path[i]);
    if (!report.zu_path.empty()) row("e_zu@t=" + t, report.zu_path[i]);
    row("e_zh2@t=" + t, report.zh2_path[i]);
    row("e_h2@t=" + t, report.h2_path[i]);
  }
}

void write_filter_csv(const FilterTrajectory& traj, std::ostream& out) {
  out << "t";
  for (const auto& label : traj.labels) out << ',' << label;
  out << ",rho1,ess,resampled\n";
  for (std::size_t k = 0; k < traj.t.size(); ++k) {
    out << format_number(traj.t[k]);
    for (Eigen::Index j = 0; j < traj.estimates.cols(); ++j) {
      out << ',' << format_number(traj.estimates(static_cast<Eigen::Index>(k), j));
    }
    out << ',' << format_number(traj.rho1[k]) << ',' << format_number(traj.ess[k]) << ','
        << traj.resampled[k] << '\n';
  }
}

std::size_t count_passed(const std::vector<Verdict>& verdicts) {
  return static_cast<std::size_t>(
      std::count_if(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; }));
}

void write_verdicts_csv(const std::vector<Verdict>& verdicts, std::ostream& out) {
  out << "check,scenario,estimate,reference,tolerance,pass,expected_fail\n";
  for (const Verdict& v : verdicts) {
    out << fmt::format("{},{},{},{},{},{},{}\n", v.check, v.scenario, format_number(v.estimate),
                       format_number(v.reference), format_number(v.tolerance), v.pass ? 1 : 0,
                       v.expected_fail ? 1 : 0);
  }
  out << fmt::format("passed {}/{}\n", count_passed(verdicts), verdicts.size());
}

}  // namespace nlfilter
