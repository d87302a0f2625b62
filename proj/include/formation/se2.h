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

#ifndef FORMATION_SE2_H_
#define FORMATION_SE2_H_

#include <cmath>

#include <Eigen/Dense>

namespace formation {

template <typename Scalar>
using Vector2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Matrix2 = Eigen::Matrix<Scalar, 2, 2>;
template <typename Scalar>
using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;
template <typename Scalar>
using Matrix32 = Eigen::Matrix<Scalar, 3, 2>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// Planar configuration. The heading is an unwrapped real: it is never reduced
// modulo 2*pi, so desired headings that grow linearly in time stay continuous.
template <typename Scalar>
struct Pose {
  Scalar x{0};
  Scalar y{0};
  Scalar theta{0};

  Vector3<Scalar> vector() const { return {x, y, theta}; }
  static Pose FromVector(const Vector3<Scalar>& q) { return {q(0), q(1), q(2)}; }

  template <typename Other>
  Pose<Other> cast() const {
    return {static_cast<Other>(x), static_cast<Other>(y),
            static_cast<Other>(theta)};
  }
  bool operator==(const Pose&) const = default;
};

// Body velocities: forward speed v along the heading, yaw rate omega.
template <typename Scalar>
struct Twist {
  Scalar v{0};
  Scalar omega{0};

  Vector2<Scalar> vector() const { return {v, omega}; }
  static Twist FromVector(const Vector2<Scalar>& eta) { return {eta(0), eta(1)}; }

  template <typename Other>
  Twist<Other> cast() const {
    return {static_cast<Other>(v), static_cast<Other>(omega)};
  }
  bool operator==(const Twist&) const = default;
};

using Posed = Pose<double>;
using Twistd = Twist<double>;

// Skew selector with d/dt R^T(theta) = omega * Q * R^T(theta).
template <typename Scalar>
Matrix3<Scalar> QMatrix() {
  Matrix3<Scalar> q;
  q << 0, 1, 0,
      -1, 0, 0,
       0, 0, 0;
  return q;
}

// Selector picking (v, omega) into (x, y, theta) body rates; R^T(t) S(t) = P.
template <typename Scalar>
Matrix32<Scalar> PMatrix() {
  Matrix32<Scalar> p;
  p << 1, 0,
       0, 0,
       0, 1;
  return p;
}

template <typename Scalar>
Matrix3<Scalar> rotation_matrix(Scalar theta) {
  using std::cos;
  using std::sin;
  const Scalar c = cos(theta);
  const Scalar s = sin(theta);
  Matrix3<Scalar> r;
  r << c, -s, 0,
       s,  c, 0,
       0,  0, 1;
  return r;
}

// Unicycle input matrix: q_dot = S(theta) * eta.
template <typename Scalar>
Matrix32<Scalar> steering_matrix(Scalar theta) {
  using std::cos;
  using std::sin;
  Matrix32<Scalar> s;
  s << cos(theta), 0,
       sin(theta), 0,
       0,          1;
  return s;
}

// Tracking error expressed in the robot's moving frame, s = R^T(theta) e.
template <typename Scalar, typename Derived>
Vector3<Scalar> body_frame_error(Scalar theta,
                                 const Eigen::MatrixBase<Derived>& e) {
  using std::cos;
  using std::sin;
  const Scalar c = cos(theta);
  const Scalar s = sin(theta);
  return {c * e(0) + s * e(1), -s * e(0) + c * e(1), e(2)};
}

template <typename Scalar>
Vector3<Scalar> unicycle_rate(Scalar theta, const Twist<Scalar>& eta) {
  using std::cos;
  using std::sin;
  return {eta.v * cos(theta), eta.v * sin(theta), eta.omega};
}

}  // namespace formation

#endif  // FORMATION_SE2_H_
