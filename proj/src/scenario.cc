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

#include "formation/scenario.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace formation {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Schema reading

const json& field(const json& obj, const std::string& key,
                  const std::string& path) {
  if (!obj.is_object()) throw SchemaError(path + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw SchemaError(path + "." + key + ": missing required field");
  }
  return *it;
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) throw SchemaError(path + ": expected a number");
  return v.get<double>();
}

int integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw SchemaError(path + ": expected an integer");
  return v.get<int>();
}

std::string text(const json& v, const std::string& path) {
  if (!v.is_string()) throw SchemaError(path + ": expected a string");
  return v.get<std::string>();
}

std::vector<double> numbers(const json& v, const std::string& path,
                            std::optional<std::size_t> size = std::nullopt) {
  if (!v.is_array()) throw SchemaError(path + ": expected an array");
  if (size && v.size() != *size) {
    throw SchemaError(path + ": expected " + std::to_string(*size) +
                      " entries, got " + std::to_string(v.size()));
  }
  std::vector<double> out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    out.push_back(number(v[k], path + "[" + std::to_string(k) + "]"));
  }
  return out;
}

Eigen::VectorXd vector_of(const json& v, const std::string& path) {
  const std::vector<double> values = numbers(v, path);
  return Eigen::Map<const Eigen::VectorXd>(values.data(),
                                           static_cast<Eigen::Index>(values.size()));
}

Posed pose_of(const json& v, const std::string& path) {
  const auto q = numbers(v, path, 3);
  return {q[0], q[1], q[2]};
}

Twistd twist_of(const json& v, const std::string& path) {
  const auto eta = numbers(v, path, 2);
  return {eta[0], eta[1]};
}

TrajectoryProfile trajectory_of(const json& v, const std::string& path,
                                double default_step) {
  const std::string type = text(field(v, "type", path), path + ".type");
  const Posed start =
      pose_of(field(v, "initial_pose", path), path + ".initial_pose");
  if (type == "constant_twist") {
    return ConstantTwist{start, twist_of(field(v, "twist", path), path + ".twist")};
  }
  if (type == "sampled_twist") {
    const double step = v.contains("step")
                            ? number(v["step"], path + ".step")
                            : default_step;
    const json& rows = field(v, "samples", path);
    if (!rows.is_array()) throw SchemaError(path + ".samples: expected an array");
    std::vector<TwistSample> samples;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const auto s = numbers(rows[k], path + ".samples[" + std::to_string(k) + "]", 5);
      samples.push_back({s[0], s[1], s[2], s[3], s[4]});
    }
    return SampledTwist(start, std::move(samples), step);
  }
  throw SchemaError(path + ".type: unknown trajectory type '" + type + "'");
}

// ---------------------------------------------------------------------------
// Schema writing

json to_json(const Posed& q) { return json::array({q.x, q.y, q.theta}); }
json to_json(const Twistd& eta) { return json::array({eta.v, eta.omega}); }
json to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v(k));
  return out;
}

json to_json(const TrajectoryProfile& profile) {
  if (const auto* c = std::get_if<ConstantTwist>(&profile)) {
    return {{"type", "constant_twist"},
            {"initial_pose", to_json(c->start)},
            {"twist", to_json(c->twist)}};
  }
  const auto& s = std::get<SampledTwist>(profile);
  json rows = json::array();
  for (const TwistSample& k : s.samples()) {
    rows.push_back(json::array({k.t, k.v, k.omega, k.v_rate, k.omega_rate}));
  }
  return {{"type", "sampled_twist"},
          {"initial_pose", to_json(s.start())},
          {"step", s.step()},
          {"samples", rows}};
}

void require_positive(const Eigen::VectorXd& v, std::size_t size,
                      const std::string& name) {
  if (static_cast<std::size_t>(v.size()) != size) {
    throw ValidationError(name + ": expected " + std::to_string(size) +
                          " diagonal entries, got " + std::to_string(v.size()));
  }
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (!(std::isfinite(v(k)) && v(k) > 0)) {
      throw ValidationError(name + "[" + std::to_string(k) +
                            "] must be positive and finite");
    }
  }
}

bool finite(const Posed& q) {
  return std::isfinite(q.x) && std::isfinite(q.y) && std::isfinite(q.theta);
}

std::string format_double(double value) {
  char buf[64];
  auto [end, ec] =
      std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
  return std::string(buf, end);
}

}  // namespace

// ---------------------------------------------------------------------------

void validate_scenario(const ScenarioConfig& c) {
  if (c.n < 1) throw ValidationError("n must be at least 1");
  try {
    validate_spanning_tree(c.n, c.edges);
  } catch (const TreeError& e) {
    throw ValidationError(std::string("edges: ") + e.what());
  }
  if (static_cast<int>(c.robots.size()) != c.n) {
    throw ValidationError("robots: expected " + std::to_string(c.n) +
                          " entries, got " + std::to_string(c.robots.size()));
  }
  const auto n = static_cast<std::size_t>(c.n);
  require_positive(c.lambda1, 3 * n, "gains.lambda1");
  if (c.mode == Mode::kDynamic) {
    require_positive(c.lambda2, 2 * n, "gains.lambda2");
    require_positive(c.gamma, 6 * n, "gains.gamma");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const RobotConfig& r = c.robots[i];
    const std::string where = "robots[" + std::to_string(i) + "]";
    if (!finite(r.initial_pose) || !finite(initial_pose(r.trajectory))) {
      throw ValidationError(where + ": poses must be finite");
    }
    if (const auto* sampled = std::get_if<SampledTwist>(&r.trajectory);
        sampled && sampled->end_time() < c.t_final) {
      throw ValidationError(where + ".trajectory: samples end at t = " +
                            format_double(sampled->end_time()) +
                            ", before t_final = " + format_double(c.t_final));
    }
    if (c.mode == Mode::kDynamic) {
      if (!(r.params.mass > 0 && std::isfinite(r.params.mass))) {
        throw ValidationError(where + ".params.mass must be positive");
      }
      if (!(r.params.inertia > 0 && std::isfinite(r.params.inertia))) {
        throw ValidationError(where + ".params.inertia must be positive");
      }
      if (!r.params.damping.allFinite() || !r.initial_estimate.allFinite() ||
          !std::isfinite(r.initial_twist.v) ||
          !std::isfinite(r.initial_twist.omega)) {
        throw ValidationError(where + ": dynamic-mode fields must be finite");
      }
    }
  }
  if (!(c.dt > 0 && std::isfinite(c.dt))) throw ValidationError("dt must be positive");
  if (!(c.t_final > 0 && std::isfinite(c.t_final))) {
    throw ValidationError("t_final must be positive");
  }
  if (!(c.sample_rate > 0 && std::isfinite(c.sample_rate))) {
    throw ValidationError("sample_rate must be positive");
  }
  if (c.threshold && !(*c.threshold >= 0)) {
    throw ValidationError("metrics.threshold must be non-negative");
  }
}

ScenarioConfig parse_scenario(std::string_view input) {
  json doc;
  try {
    doc = json::parse(input.begin(), input.end());
  } catch (const json::parse_error& e) {
    // Translate the byte offset into a line/column position.
    const std::size_t offset = std::min<std::size_t>(e.byte, input.size());
    std::size_t line = 1, column = 1;
    for (std::size_t k = 0; k + 1 < offset; ++k) {
      if (input[k] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ParseError("line " + std::to_string(line) + ", column " +
                     std::to_string(column) + ": " + e.what());
  }

  ScenarioConfig c;
  const std::string root = "$";
  if (!doc.is_object()) throw SchemaError("$: expected an object");
  c.name = doc.contains("name") ? text(doc["name"], "$.name") : "";
  c.units = doc.contains("units") ? text(doc["units"], "$.units") : "m";
  const std::string mode = text(field(doc, "mode", root), "$.mode");
  if (mode == "kinematic") {
    c.mode = Mode::kKinematic;
  } else if (mode == "dynamic") {
    c.mode = Mode::kDynamic;
  } else {
    throw SchemaError("$.mode: expected 'kinematic' or 'dynamic', got '" + mode + "'");
  }
  c.n = integer(field(doc, "n", root), "$.n");

  const json& integration = field(doc, "integration", root);
  c.dt = number(field(integration, "dt", "$.integration"), "$.integration.dt");
  c.t_final = number(field(integration, "t_final", "$.integration"),
                     "$.integration.t_final");
  c.sample_rate = number(field(integration, "sample_rate", "$.integration"),
                         "$.integration.sample_rate");

  const json& edges = field(doc, "edges", root);
  if (!edges.is_array()) throw SchemaError("$.edges: expected an array");
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const std::string path = "$.edges[" + std::to_string(k) + "]";
    if (!edges[k].is_array() || edges[k].size() != 2) {
      throw SchemaError(path + ": expected [parent, child]");
    }
    c.edges.emplace_back(integer(edges[k][0], path + "[0]"),
                         integer(edges[k][1], path + "[1]"));
  }

  const json& robots = field(doc, "robots", root);
  if (!robots.is_array()) throw SchemaError("$.robots: expected an array");
  for (std::size_t i = 0; i < robots.size(); ++i) {
    const std::string path = "$.robots[" + std::to_string(i) + "]";
    const json& r = robots[i];
    RobotConfig rc;
    rc.initial_pose = pose_of(field(r, "initial_pose", path), path + ".initial_pose");
    try {
      rc.trajectory = trajectory_of(field(r, "trajectory", path),
                                    path + ".trajectory", c.dt);
    } catch (const ValidationError& e) {
      throw ValidationError(path + ".trajectory: " + e.what());
    }
    if (c.mode == Mode::kDynamic) {
      rc.initial_twist = r.contains("initial_twist")
                             ? twist_of(r["initial_twist"], path + ".initial_twist")
                             : Twistd{};
      if (r.contains("initial_estimate")) {
        const auto phi = numbers(r["initial_estimate"], path + ".initial_estimate", 6);
        rc.initial_estimate = Vector6<double>(phi.data());
      }
      const json& p = field(r, "params", path);
      rc.params.mass = number(field(p, "mass", path + ".params"), path + ".params.mass");
      rc.params.inertia =
          number(field(p, "inertia", path + ".params"), path + ".params.inertia");
      const json& d = field(p, "damping", path + ".params");
      if (!d.is_array() || d.size() != 2) {
        throw SchemaError(path + ".params.damping: expected a 2x2 array");
      }
      for (int row = 0; row < 2; ++row) {
        const auto vals = numbers(d[row],
                                  path + ".params.damping[" + std::to_string(row) + "]", 2);
        rc.params.damping(row, 0) = vals[0];
        rc.params.damping(row, 1) = vals[1];
      }
    }
    c.robots.push_back(std::move(rc));
  }

  const json& gains = field(doc, "gains", root);
  c.lambda1 = vector_of(field(gains, "lambda1", "$.gains"), "$.gains.lambda1");
  if (c.mode == Mode::kDynamic) {
    c.lambda2 = vector_of(field(gains, "lambda2", "$.gains"), "$.gains.lambda2");
    c.gamma = vector_of(field(gains, "gamma", "$.gains"), "$.gains.gamma");
  }

  if (doc.contains("metrics")) {
    const json& m = doc["metrics"];
    if (m.contains("threshold") && !m["threshold"].is_null()) {
      c.threshold = number(m["threshold"], "$.metrics.threshold");
    }
  }
  validate_scenario(c);
  return c;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str());
}

std::string serialize_scenario(const ScenarioConfig& c) {
  json doc;
  doc["name"] = c.name;
  doc["units"] = c.units;
  doc["mode"] = to_string(c.mode);
  doc["n"] = c.n;
  json edges = json::array();
  for (const auto& [p, ch] : c.edges) edges.push_back(json::array({p, ch}));
  doc["edges"] = edges;
  json robots = json::array();
  for (const RobotConfig& r : c.robots) {
    json jr;
    jr["initial_pose"] = to_json(r.initial_pose);
    jr["trajectory"] = to_json(r.trajectory);
    if (c.mode == Mode::kDynamic) {
      jr["initial_twist"] = to_json(r.initial_twist);
      jr["initial_estimate"] = to_json(Eigen::VectorXd(r.initial_estimate));
      jr["params"] = {
          {"mass", r.params.mass},
          {"inertia", r.params.inertia},
          {"damping",
           json::array({json::array({r.params.damping(0, 0), r.params.damping(0, 1)}),
                        json::array({r.params.damping(1, 0), r.params.damping(1, 1)})})}};
    }
    robots.push_back(jr);
  }
  doc["robots"] = robots;
  doc["gains"]["lambda1"] = to_json(c.lambda1);
  if (c.mode == Mode::kDynamic) {
    doc["gains"]["lambda2"] = to_json(c.lambda2);
    doc["gains"]["gamma"] = to_json(c.gamma);
  }
  doc["integration"] = {{"dt", c.dt}, {"t_final", c.t_final},
                        {"sample_rate", c.sample_rate}};
  if (c.threshold) doc["metrics"]["threshold"] = *c.threshold;
  return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Presets

namespace {

// Regular pentagon of circumradius `radius` around the robot-1 anchor, all
// robots driven by the same constant twist (translating pentagon).
std::vector<Posed> pentagon_desired_starts(double cx, double radius,
                                           double leader_y) {
  constexpr double pi = std::numbers::pi;
  const double h = pi / 2;
  return {
      {cx, leader_y, h},
      {cx + radius * std::cos(pi / 10), radius * std::sin(pi / 10), h},
      {cx + radius * std::sin(pi / 5), -radius * std::cos(pi / 5), h},
      {cx - radius * std::sin(pi / 5), -radius * std::cos(pi / 5), h},
      {cx - radius * std::cos(pi / 10), radius * std::sin(pi / 10), h},
  };
}

std::vector<std::pair<int, int>> chain_edges(int n) {
  std::vector<std::pair<int, int>> edges;
  for (int k = 1; k < n; ++k) edges.emplace_back(k, k + 1);
  return edges;
}

ScenarioConfig kinematic_pentagon() {
  ScenarioConfig c;
  c.name = "kinematic-pentagon";
  c.units = "cm";
  c.mode = Mode::kKinematic;
  c.n = 5;
  c.edges = chain_edges(5);
  const std::vector<Posed> desired = pentagon_desired_starts(5.0, 10.0, 10.0);
  const std::vector<Posed> actual = {
      {2.37, 8.0, 0.0162},   {17.5, 6.0, 0.0218},    {2.06, -1.36, -0.0031},
      {-9.9, -11.49, 0.0517}, {-4.45, 8.62, -0.0452},
  };
  for (int i = 0; i < 5; ++i) {
    RobotConfig r;
    r.initial_pose = actual[i];
    r.trajectory = ConstantTwist{desired[i], {5.0, 1.0}};
    c.robots.push_back(r);
  }
  c.lambda1.resize(15);
  for (int i = 0; i < 5; ++i) c.lambda1.segment<3>(3 * i) << 2.0, 2.0, 10.0;
  c.dt = 1e-3;
  c.t_final = 50.0;
  c.sample_rate = 100.0;
  return c;
}

ScenarioConfig adaptive_pentagon() {
  ScenarioConfig c;
  c.name = "adaptive-pentagon";
  c.units = "m";
  c.mode = Mode::kDynamic;
  c.n = 5;
  c.edges = chain_edges(5);
  const std::vector<Posed> desired = pentagon_desired_starts(4.0, 1.0, 1.0);
  const std::vector<Posed> actual = {
      {0.3200, 2.8857, 0.0139}, {2.3247, 2.4519, 2.6061},
      {0.2533, 1.1993, 0.7796}, {2.4002, 1.2942, 2.7319},
      {0.5455, 0.7914, 0.4366},
  };
  for (int i = 0; i < 5; ++i) {
    RobotConfig r;
    r.initial_pose = actual[i];
    r.trajectory = ConstantTwist{desired[i], {4.0, 1.0}};
    r.initial_twist = {0.0, 0.0};
    r.initial_estimate.setZero();
    r.params.mass = 3.6;
    r.params.inertia = 0.0405;
    r.params.damping << 0.3, 0.0, 0.0, 0.004;
    c.robots.push_back(r);
  }
  c.lambda1 = Eigen::VectorXd::Ones(15);
  c.lambda2 = Eigen::VectorXd::Constant(10, 3.0);
  c.gamma = Eigen::VectorXd::Ones(30);
  c.dt = 1e-3;
  c.t_final = 50.0;
  c.sample_rate = 100.0;
  return c;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"kinematic-pentagon", "adaptive-pentagon"};
}

ScenarioConfig preset(std::string_view name) {
  if (name == "kinematic-pentagon") return kinematic_pentagon();
  if (name == "adaptive-pentagon") return adaptive_pentagon();
  throw std::out_of_range("unknown preset '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Trace CSV

std::vector<std::string> trace_columns(const Trace& trace) {
  const int n = trace.n;
  std::vector<std::string> cols = {"t"};
  for (int i = 1; i <= n; ++i) {
    const std::string k = std::to_string(i);
    cols.insert(cols.end(), {"x" + k, "y" + k, "th" + k});
  }
  for (int i = 1; i <= n; ++i) {
    const std::string k = std::to_string(i);
    cols.insert(cols.end(), {"v" + k, "w" + k});
  }
  for (int i = 1; i <= n; ++i) cols.push_back("norm_e" + std::to_string(i));
  for (const auto& [p, c] : trace.edges) {
    cols.push_back("norm_eps_" + std::to_string(p) + "_" + std::to_string(c));
  }
  cols.insert(cols.end(), {"norm_z", "V", "Va", "ls_residual"});
  if (trace.mode == Mode::kDynamic) {
    for (int i = 1; i <= n; ++i) {
      const std::string k = std::to_string(i);
      cols.insert(cols.end(), {"uv" + k, "uw" + k});
    }
    for (int i = 1; i <= n; ++i) {
      for (int j = 1; j <= 6; ++j) {
        cols.push_back("phihat" + std::to_string(i) + "_" + std::to_string(j));
      }
    }
  }
  return cols;
}

void write_trace_csv(const Trace& trace, std::ostream& out) {
  const std::vector<std::string> cols = trace_columns(trace);
  for (std::size_t k = 0; k < cols.size(); ++k) {
    out << (k ? "," : "") << cols[k];
  }
  out << "\n";
  std::string line;
  for (const TraceRecord& r : trace.records) {
    line.clear();
    auto put = [&line](double v) {
      if (!line.empty()) line += ',';
      line += format_double(v);
    };
    put(r.t);
    for (const Posed& q : r.poses) {
      put(q.x);
      put(q.y);
      put(q.theta);
    }
    for (Eigen::Index k = 0; k < r.twists.size(); ++k) put(r.twists(k));
    for (Eigen::Index k = 0; k < r.norm_e.size(); ++k) put(r.norm_e(k));
    for (Eigen::Index k = 0; k < r.norm_eps.size(); ++k) put(r.norm_eps(k));
    put(r.norm_z);
    put(r.v);
    put(r.va);
    put(r.ls_residual);
    if (trace.mode == Mode::kDynamic) {
      for (Eigen::Index k = 0; k < r.controls.size(); ++k) put(r.controls(k));
      for (Eigen::Index k = 0; k < r.estimates.size(); ++k) put(r.estimates(k));
    }
    out << line << "\n";
  }
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
  };
  if (!std::getline(in, line)) return table;
  table.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    for (const std::string& cell : split(line)) {
      double v = 0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc()) throw ParseError("bad CSV cell '" + cell + "'");
      row.push_back(v);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

// ---------------------------------------------------------------------------
// Metrics

std::optional<double> fit_decay_rate(std::span<const double> times,
                                     std::span<const double> values) {
  if (times.size() != values.size() || values.empty()) return std::nullopt;
  const double peak = *std::max_element(values.begin(), values.end());
  const double floor = 1e-10 * peak;
  // Last run of consecutive non-increasing samples above the floor.
  std::size_t end = values.size();
  while (end > 0 && !(values[end - 1] > floor)) --end;
  if (end < 2) return std::nullopt;
  std::size_t begin = end - 1;
  while (begin > 0 && values[begin - 1] >= values[begin] &&
         values[begin - 1] > floor) {
    --begin;
  }
  const std::size_t count = end - begin;
  if (count < 2) return std::nullopt;
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t k = begin; k < end; ++k) {
    const double t = times[k];
    const double y = std::log(values[k]);
    st += t;
    sy += y;
    stt += t * t;
    sty += t * y;
  }
  const double c = static_cast<double>(count);
  const double denom = c * stt - st * st;
  if (!(denom > 0)) return std::nullopt;
  return -(c * sty - st * sy) / denom;
}

namespace {

std::optional<double> settle_time(const std::vector<TraceRecord>& records,
                                  double threshold,
                                  const std::function<double(const TraceRecord&)>& f) {
  // Walk backwards to the last violation.
  for (std::size_t k = records.size(); k > 0; --k) {
    if (!(f(records[k - 1]) <= threshold)) {
      if (k == records.size()) return std::nullopt;
      return records[k].t;
    }
  }
  return records.front().t;
}

json optional_json(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

MetricsReport compute_metrics(const Trace& trace, std::optional<double> threshold) {
  if (trace.records.empty()) throw EmptyTrace("cannot compute metrics of an empty trace");
  const auto& recs = trace.records;
  const TraceRecord& first = recs.front();
  const TraceRecord& last = recs.back();
  MetricsReport m;
  double initial_max = first.norm_e.size() ? first.norm_e.maxCoeff() : 0.0;
  if (first.norm_eps.size()) initial_max = std::max(initial_max, first.norm_eps.maxCoeff());
  m.threshold = threshold.value_or(0.02 * initial_max);

  for (int i = 0; i < trace.n; ++i) {
    m.robot_convergence.push_back(settle_time(
        recs, m.threshold, [i](const TraceRecord& r) { return r.norm_e(i); }));
    m.final_norm_e.push_back(last.norm_e(i));
  }
  m.edges = trace.edges;
  for (Eigen::Index k = 0; k < first.norm_eps.size(); ++k) {
    m.edge_convergence.push_back(settle_time(
        recs, m.threshold, [k](const TraceRecord& r) { return r.norm_eps(k); }));
    m.final_norm_eps.push_back(last.norm_eps(k));
  }
  m.formation_convergence = settle_time(recs, m.threshold, [](const TraceRecord& r) {
    double worst = r.norm_e.size() ? r.norm_e.maxCoeff() : 0.0;
    if (r.norm_eps.size()) worst = std::max(worst, r.norm_eps.maxCoeff());
    return worst;
  });

  std::vector<double> times, norms;
  for (const TraceRecord& r : recs) {
    times.push_back(r.t);
    norms.push_back(r.norm_z);
  }
  m.decay_rate = fit_decay_rate(times, norms);

  m.peak_v.assign(trace.n, 0.0);
  m.peak_omega.assign(trace.n, 0.0);
  if (trace.mode == Mode::kDynamic) m.peak_control.assign(trace.n, 0.0);
  double residual_sum = 0;
  for (const TraceRecord& r : recs) {
    for (int i = 0; i < trace.n; ++i) {
      m.peak_v[i] = std::max(m.peak_v[i], std::abs(r.twists(2 * i)));
      m.peak_omega[i] = std::max(m.peak_omega[i], std::abs(r.twists(2 * i + 1)));
      if (trace.mode == Mode::kDynamic) {
        m.peak_control[i] =
            std::max(m.peak_control[i], r.controls.segment<2>(2 * i).norm());
      }
    }
    m.residual_max = std::max(m.residual_max, r.ls_residual);
    residual_sum += r.ls_residual;
  }
  m.residual_mean = residual_sum / static_cast<double>(recs.size());
  m.residual_final = last.ls_residual;
  return m;
}

std::string metrics_to_json(const MetricsReport& m) {
  json doc;
  doc["threshold"] = m.threshold;
  json robots = json::array();
  for (std::size_t i = 0; i < m.final_norm_e.size(); ++i) {
    robots.push_back({{"robot", i + 1},
                      {"convergence_time", optional_json(m.robot_convergence[i])},
                      {"converged", m.robot_convergence[i].has_value()},
                      {"final_norm_e", m.final_norm_e[i]},
                      {"peak_v", m.peak_v[i]},
                      {"peak_omega", m.peak_omega[i]}});
    if (!m.peak_control.empty()) robots.back()["peak_control"] = m.peak_control[i];
  }
  doc["robots"] = robots;
  json edges = json::array();
  for (std::size_t k = 0; k < m.final_norm_eps.size(); ++k) {
    json edge = {{"convergence_time", optional_json(m.edge_convergence[k])},
                 {"converged", m.edge_convergence[k].has_value()},
                 {"final_norm_eps", m.final_norm_eps[k]}};
    if (k < m.edges.size()) {
      edge["parent"] = m.edges[k].first;
      edge["child"] = m.edges[k].second;
    }
    edges.push_back(edge);
  }
  doc["edges"] = edges;
  doc["formation_convergence_time"] = optional_json(m.formation_convergence);
  doc["converged"] = m.formation_convergence.has_value();
  doc["decay_rate"] = optional_json(m.decay_rate);
  doc["residual"] = {{"max", m.residual_max},
                     {"mean", m.residual_mean},
                     {"final", m.residual_final}};
  return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------

int run_scenario(const ScenarioConfig& config, const std::string& trace_path,
                 const std::string& metrics_path, std::ostream& err) {
  Trace trace;
  try {
    validate_scenario(config);
    trace = simulate(config);
  } catch (const ValidationError& e) {
    err << "ValidationError: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const SingularSpeed& e) {
    err << "SingularSpeed: " << e.what() << "\n";
    return kExitRuntimeError;
  } catch (const RankDeficient& e) {
    err << "RankDeficient: " << e.what() << "\n";
    return kExitRuntimeError;
  } catch (const DivergenceError& e) {
    err << "DivergenceError at t = " << e.time() << ": " << e.what() << "\n";
    return kExitRuntimeError;
  } catch (const FormationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntimeError;
  }
  const MetricsReport metrics = compute_metrics(trace, config.threshold);
  std::ofstream trace_out(trace_path);
  if (!trace_out) {
    err << "I/O error: cannot write trace file '" << trace_path << "'\n";
    return kExitIoError;
  }
  write_trace_csv(trace, trace_out);
  std::ofstream metrics_out(metrics_path);
  if (!metrics_out) {
    err << "I/O error: cannot write metrics file '" << metrics_path << "'\n";
    return kExitIoError;
  }
  metrics_out << metrics_to_json(metrics);
  if (!trace_out.flush() || !metrics_out.flush()) {
    err << "I/O error: write failed\n";
    return kExitIoError;
  }
  return kExitOk;
}

}  // namespace formation
