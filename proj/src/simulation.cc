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

#include "formation/simulation.h"

#include <cmath>
#include <string>

namespace formation {

std::string to_string(Mode mode) {
  return mode == Mode::kDynamic ? "dynamic" : "kinematic";
}

SystemModel SystemModel::FromConfig(const ScenarioConfig& config) {
  SystemModel model;
  model.tree = validate_spanning_tree(config.n, config.edges);
  model.mode = config.mode;
  model.lambda1 = config.lambda1;
  model.lambda2 = config.lambda2;
  model.gamma = config.gamma;
  for (const RobotConfig& r : config.robots) {
    model.profiles.push_back(r.trajectory);
    model.params.push_back(r.params);
  }
  return model;
}

SimState<double> initial_state(const ScenarioConfig& config) {
  const int n = config.n;
  SimState<double> s;
  s.t = 0;
  s.n = n;
  s.mode = config.mode;
  s.x.resize(SimState<double>::Dimension(n, config.mode));
  for (int i = 0; i < n; ++i) {
    const RobotConfig& r = config.robots[i];
    s.x.segment<3>(3 * i) = r.initial_pose.vector();
    if (config.mode == Mode::kDynamic) {
      s.x.segment<2>(3 * n + 2 * i) = r.initial_twist.vector();
      s.x.segment<6>(5 * n + 6 * i) = r.initial_estimate;
    }
  }
  return s;
}

namespace {

TraceRecord record_from(const ClosedLoop<double>& loop,
                        const SimState<double>& s,
                        const Evaluation<double>& ev) {
  const int n = s.n;
  TraceRecord rec;
  rec.t = s.t;
  rec.poses = ev.poses;
  rec.twists = ev.twist;
  if (s.mode == Mode::kDynamic) {
    rec.controls = ev.control;
    rec.estimates = s.estimates();
  }
  rec.norm_e.resize(n);
  for (int i = 0; i < n; ++i) {
    rec.norm_e(i) = (ev.desired[i].pose.vector() - ev.poses[i].vector()).norm();
  }
  rec.norm_eps.resize(n - 1);
  for (int k = 0; k < n - 1; ++k) rec.norm_eps(k) = ev.law.error.edge(k).norm();
  rec.norm_z = ev.law.error.z.norm();
  rec.v = 0.5 * ev.law.error.z.squaredNorm();
  rec.va = loop.lyapunov(s, ev).value;
  rec.ls_residual = ev.law.residual.norm();
  return rec;
}

}  // namespace

TraceRecord make_record(const ClosedLoop<double>& loop,
                        const SimState<double>& state) {
  return record_from(loop, state, loop.evaluate(state));
}

Trace simulate(const ScenarioConfig& config, const TraceObserver& observer,
               const ClosedLoop<double>::Probe& probe) {
  const SystemModel model = SystemModel::FromConfig(config);
  ClosedLoop<double> loop(model);
  if (probe) loop.set_probe(probe);
  Trace trace;
  trace.n = config.n;
  trace.mode = config.mode;
  trace.edges = model.tree.one_based_edges();

  const auto steps = static_cast<long>(std::ceil(config.t_final / config.dt - 1e-9));
  const long decimation =
      std::max(1L, std::lround(1.0 / (config.sample_rate * config.dt)));

  SimState<double> s = initial_state(config);
  auto sample = [&](const SimState<double>& state) {
    const Evaluation<double> ev = loop.evaluate(state);
    trace.records.push_back(record_from(loop, state, ev));
    if (observer) observer(state, ev);
  };
  sample(s);
  for (long k = 1; k <= steps; ++k) {
    const double t_next = std::min(static_cast<double>(k) * config.dt,
                                   config.t_final);
    s = rk4_step(s, t_next - s.t, loop);
    s.t = t_next;
    if (!s.x.allFinite()) {
      throw DivergenceError("state became non-finite", s.t);
    }
    if (k % decimation == 0) sample(s);
  }
  trace.final_state = s;
  return trace;
}

}  // namespace formation
