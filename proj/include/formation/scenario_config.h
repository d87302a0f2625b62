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

#ifndef FORMATION_SCENARIO_CONFIG_H_
#define FORMATION_SCENARIO_CONFIG_H_

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "formation/adaptive_control.h"
#include "formation/se2.h"
#include "formation/trajectory.h"

namespace formation {

enum class Mode { kKinematic, kDynamic };

std::string to_string(Mode mode);

struct RobotConfig {
  Posed initial_pose;
  TrajectoryProfile trajectory = ConstantTwist{};
  // Dynamic mode only.
  Twistd initial_twist;
  Vector6<double> initial_estimate = Vector6<double>::Zero();
  RobotParams params;

  bool operator==(const RobotConfig& o) const {
    return initial_pose == o.initial_pose && trajectory == o.trajectory &&
           initial_twist == o.initial_twist &&
           initial_estimate == o.initial_estimate && params == o.params;
  }
};

// Declarative description of one closed-loop run. Gains are the diagonals of
// lambda1 (3n), lambda2 (2n) and Gamma (6n).
struct ScenarioConfig {
  std::string name;
  std::string units = "m";
  Mode mode = Mode::kKinematic;
  int n = 1;
  std::vector<std::pair<int, int>> edges;  // 1-based (parent, child)
  std::vector<RobotConfig> robots;
  Eigen::VectorXd lambda1;
  Eigen::VectorXd lambda2;
  Eigen::VectorXd gamma;
  double dt = 1e-3;
  double t_final = 50.0;
  double sample_rate = 100.0;  // trace samples per unit time
  std::optional<double> threshold;

  bool operator==(const ScenarioConfig& o) const {
    auto same = [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
      return a.size() == b.size() && a == b;
    };
    return name == o.name && units == o.units && mode == o.mode && n == o.n &&
           edges == o.edges && robots == o.robots && same(lambda1, o.lambda1) &&
           same(lambda2, o.lambda2) && same(gamma, o.gamma) && dt == o.dt &&
           t_final == o.t_final && sample_rate == o.sample_rate &&
           threshold == o.threshold;
  }
};

}  // namespace formation

#endif  // FORMATION_SCENARIO_CONFIG_H_
