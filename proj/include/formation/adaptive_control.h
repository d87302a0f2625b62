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

#ifndef FORMATION_ADAPTIVE_CONTROL_H_
#define FORMATION_ADAPTIVE_CONTROL_H_

#include <span>

#include "formation/errors.h"
#include "formation/se2.h"

namespace formation {

template <typename Scalar>
using Vector6 = Eigen::Matrix<Scalar, 6, 1>;
template <typename Scalar>
using Regressor = Eigen::Matrix<Scalar, 2, 6>;

// Rigid-body parameters of one unicycle: M = diag(mass, inertia) and a
// constant damping matrix D, with dynamics M eta' + D eta = u.
struct RobotParams {
  double mass = 1.0;
  double inertia = 1.0;
  Eigen::Matrix2d damping = Eigen::Matrix2d::Zero();

  bool operator==(const RobotParams& o) const {
    return mass == o.mass && inertia == o.inertia && damping == o.damping;
  }
};

// phi = (m, J, D11, D12, D21, D22).
template <typename Scalar>
Vector6<Scalar> param_vector(const RobotParams& p) {
  Vector6<Scalar> phi;
  phi << p.mass, p.inertia, p.damping(0, 0), p.damping(0, 1), p.damping(1, 0),
      p.damping(1, 1);
  return phi;
}

inline RobotParams params_from_vector(const Vector6<double>& phi) {
  RobotParams p;
  p.mass = phi(0);
  p.inertia = phi(1);
  p.damping << phi(2), phi(3), phi(4), phi(5);
  return p;
}

// Y(mu, eta) with Y phi = M mu + D eta for every (M, D) encoded by phi.
template <typename Scalar>
Regressor<Scalar> regression_matrix(const Vector2<Scalar>& mu,
                                    const Twist<Scalar>& eta) {
  Regressor<Scalar> y;
  y << mu(0), 0, eta.v, eta.omega, 0, 0,
       0, mu(1), 0, 0, eta.v, eta.omega;
  return y;
}

// Block-diagonal stack of per-robot regressors, 2n x 6n.
template <typename Scalar>
MatrixX<Scalar> block_regression(const VectorX<Scalar>& mu,
                                 const VectorX<Scalar>& eta) {
  const int n = static_cast<int>(eta.size() / 2);
  MatrixX<Scalar> y = MatrixX<Scalar>::Zero(2 * n, 6 * n);
  for (int i = 0; i < n; ++i) {
    y.template block<2, 6>(2 * i, 6 * i) = regression_matrix<Scalar>(
        mu.template segment<2>(2 * i),
        Twist<Scalar>::FromVector(eta.template segment<2>(2 * i)));
  }
  return y;
}

// u = -lambda2 sigma - K^T z + Y phi_hat.
template <typename Scalar>
VectorX<Scalar> adaptive_control_u(const VectorX<Scalar>& sigma,
                                   const VectorX<Scalar>& z,
                                   const MatrixX<Scalar>& k,
                                   const MatrixX<Scalar>& y,
                                   const VectorX<Scalar>& phi_hat,
                                   const VectorX<Scalar>& lambda2) {
  return -lambda2.cwiseProduct(sigma) - k.transpose() * z + y * phi_hat;
}

// Gradient adaptation law phi_hat' = -Gamma Y^T sigma.
template <typename Scalar>
VectorX<Scalar> adaptation_rate(const MatrixX<Scalar>& y,
                                const VectorX<Scalar>& sigma,
                                const VectorX<Scalar>& gamma) {
  return -gamma.cwiseProduct(y.transpose() * sigma);
}

template <typename Scalar>
struct LyapunovDiagnostics {
  Scalar value;           // V_a
  Scalar predicted_rate;  // -z^T l1 z - s^T l2 s + z^T r
};

// V_a = 1/2 z^T z + 1/2 sigma^T M sigma + 1/2 phi_err^T Gamma^{-1} phi_err.
// M is diagonal and passed by its diagonal. The rate keeps the z^T r term
// left over when the kinematic law is only satisfied in the least-squares
// sense (r = K eta_f + lambda1 z + H).
template <typename Scalar>
LyapunovDiagnostics<Scalar> lyapunov_diagnostics(
    const VectorX<Scalar>& z, const VectorX<Scalar>& sigma,
    const VectorX<Scalar>& phi_error, const VectorX<Scalar>& mass_diagonal,
    const VectorX<Scalar>& gamma, const VectorX<Scalar>& lambda1,
    const VectorX<Scalar>& lambda2, const VectorX<Scalar>& residual) {
  const Scalar half(0.5);
  LyapunovDiagnostics<Scalar> out;
  out.value = half * z.squaredNorm() +
              half * sigma.dot(mass_diagonal.cwiseProduct(sigma)) +
              half * phi_error.dot(phi_error.cwiseQuotient(gamma));
  out.predicted_rate = -z.dot(lambda1.cwiseProduct(z)) -
                       sigma.dot(lambda2.cwiseProduct(sigma)) +
                       z.dot(residual);
  return out;
}

}  // namespace formation

#endif  // FORMATION_ADAPTIVE_CONTROL_H_
