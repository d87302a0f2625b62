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


#ifndef FORMATION_TESTS_TEST_SUPPORT_H_
#define FORMATION_TESTS_TEST_SUPPORT_H_

#include <numbers>
#include <random>

#include <Eigen/Dense>

namespace formation::testing {

inline constexpr double kPi = std::numbers::pi;

inline std::mt19937& rng() {
  static std::mt19937 engine(123456789u);
  return engine;
}

inline double uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng());
}

inline double random_angle() { return uniform(-kPi, kPi); }

inline Eigen::VectorXd random_vector(int n, double lo = -1.0, double hi = 1.0) {
  Eigen::VectorXd v(n);
  for (int k = 0; k < n; ++k) v(k) = uniform(lo, hi);
  return v;
}

inline Eigen::VectorXd random_headings(int n) {
  return random_vector(n, -kPi, kPi);
}

}  // namespace formation::testing

#endif  // FORMATION_TESTS_TEST_SUPPORT_H_
