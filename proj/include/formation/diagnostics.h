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

#ifndef FORMATION_DIAGNOSTICS_H_
#define FORMATION_DIAGNOSTICS_H_

#include <iosfwd>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "formation/scenario_config.h"
#include "formation/simulation.h"

namespace formation {

// Numerical checks of the closed loop against independent finite-difference
// oracles. The oracles integrate the closed loop a single RK4 step of +-h
// from the given state in quadruple precision and difference the result, so
// they never touch the analytic derivative formulas they check.

struct EtafRateCheck {
  Eigen::VectorXd analytic;
  Eigen::VectorXd finite_difference;
  double error = 0;           // ||analytic - fd||_inf
  double relative_error = 0;  // error / ||analytic||_inf
};

// Compares the analytic eta_f' with (eta_f(t+h) - eta_f(t-h)) / 2h.
EtafRateCheck check_etaf_rate(const SystemModel& model,
                              const SimState<double>& state, double h);

struct LyapunovRateCheck {
  double value = 0;              // V_a (V in kinematic mode)
  double predicted = 0;          // -z'l1 z - s'l2 s + z'r
  double finite_difference = 0;  // (V_a(t+h) - V_a(t-h)) / 2h
  double error = 0;              // |fd - predicted|
  double scale = 0;              // |z'l1 z| + |s'l2 s| + |z'r|

  double relative_error() const {
    if (scale > 0) return error / scale;
    return error > 0 ? std::numeric_limits<double>::infinity() : 0.0;
  }
};

LyapunovRateCheck check_lyapunov_rate(const SystemModel& model,
                                      const SimState<double>& state, double h);

// ||K^T (K eta* + lambda1 z + H)||_inf / (1 + ||K||_F ||lambda1 z + H||).
double normal_equation_ratio(const KinematicLaw<double>& law,
                             const Eigen::VectorXd& lambda1);

// True when J(eta*) <= J(eta* + delta) for `trials` random perturbations.
bool least_squares_is_optimal(const KinematicLaw<double>& law,
                              const Eigen::VectorXd& lambda1, std::mt19937& rng,
                              int trials);

// Tolerances of the check suite.
inline constexpr double kNormalEquationTolerance = 1e-10;
inline constexpr double kLyapunovRateTolerance = 1e-6;
inline constexpr double kEtafRateTolerance = 1e-4;
inline constexpr double kFiniteDifferenceStep = 1e-5;

struct CheckResult {
  std::string name;
  bool passed = false;
  double worst = 0;
  double tolerance = 0;
  std::string detail;
};

// Simulates the scenario and runs every applicable diagnostic at each trace
// sample. Writes nothing to disk.
std::vector<CheckResult> run_checks(const ScenarioConfig& config);

void print_checks(const std::vector<CheckResult>& results, std::ostream& out);

}  // namespace formation

#endif  // FORMATION_DIAGNOSTICS_H_
