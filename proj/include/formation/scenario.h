// Copyright 2026 The Formation Maneuvering Authors
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

#ifndef FORMATION_SCENARIO_H_
#define FORMATION_SCENARIO_H_

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "formation/scenario_config.h"
#include "formation/simulation.h"

namespace formation {

// Parses a JSON scenario document. Throws ParseError (malformed JSON, with
// line and column), SchemaError (missing or mistyped fields, with the field
// path) or ValidationError (bad tree, non-positive gains, bad dimensions).
ScenarioConfig parse_scenario(std::string_view text);
ScenarioConfig load_scenario(const std::string& path);
std::string serialize_scenario(const ScenarioConfig& config);

// Throws ValidationError on any inconsistency.
void validate_scenario(const ScenarioConfig& config);

std::vector<std::string> preset_names();
// Throws std::out_of_range for unknown names.
ScenarioConfig preset(std::string_view name);

// Trace CSV: one header row, one row per sample, 17 significant digits.
std::vector<std::string> trace_columns(const Trace& trace);
void write_trace_csv(const Trace& trace, std::ostream& out);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};
CsvTable read_csv(std::istream& in);

struct MetricsReport {
  double threshold = 0;
  // First sample time after which the error norm stays at or below the
  // threshold; empty when the run never settles.
  std::vector<std::optional<double>> robot_convergence;
  std::vector<std::pair<int, int>> edges;  // 1-based, trace edge order
  std::vector<std::optional<double>> edge_convergence;
  std::optional<double> formation_convergence;
  std::vector<double> final_norm_e;
  std::vector<double> final_norm_eps;
  std::optional<double> decay_rate;  // fitted rate of ||z(t)|| ~ exp(-rate t)
  std::vector<double> peak_v;
  std::vector<double> peak_omega;
  std::vector<double> peak_control;  // max ||u_i||, dynamic mode
  double residual_max = 0;
  double residual_mean = 0;
  double residual_final = 0;
};

// Default threshold: 2% of the largest initial tracking or coordination
// error norm. Throws EmptyTrace.
MetricsReport compute_metrics(const Trace& trace,
                              std::optional<double> threshold = std::nullopt);
std::string metrics_to_json(const MetricsReport& report);

// Least-squares slope fit of log(values) against times over the last run of
// non-increasing samples above 1e-10 of the peak. Empty with < 2 points.
std::optional<double> fit_decay_rate(std::span<const double> times,
                                     std::span<const double> values);

// Process exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitConfigError = 2,
  kExitRuntimeError = 3,
  kExitIoError = 4,
};

// Simulates and writes the trace and metrics files. Diagnostics go to err.
int run_scenario(const ScenarioConfig& config, const std::string& trace_path,
                 const std::string& metrics_path, std::ostream& err);

}  // namespace formation

#endif  // FORMATION_SCENARIO_H_
