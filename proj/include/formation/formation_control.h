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

#ifndef FORMATION_FORMATION_CONTROL_H_
#define FORMATION_FORMATION_CONTROL_H_

#include <span>
#include <vector>

#include "formation/errors.h"
#include "formation/se2.h"
#include "formation/spanning_tree.h"
#include "formation/structured_linalg.h"
#include "formation/trajectory.h"

namespace formation {

// Stacked error z = (s_1, eps_e1, eps_e2, ...): the leader's body-frame
// tracking error followed by one coordination error per tree edge, in the
// tree's edge order.
template <typename Scalar>
struct ErrorState {
  VectorX<Scalar> z;

  int robots() const { return static_cast<int>(z.size() / 3); }
  auto leader() const { return z.template head<3>(); }
  auto edge(int k) const { return z.template segment<3>(3 + 3 * k); }
};

template <typename Scalar>
ErrorState<Scalar> build_error_state(
    const SpanningTree& tree, std::span<const Pose<Scalar>> poses,
    std::span<const DesiredState<Scalar>> desired) {
  const int n = tree.size();
  ErrorState<Scalar> out;
  out.z.resize(3 * n);
  const Vector3<Scalar> e1 = desired[0].pose.vector() - poses[0].vector();
  out.z.template head<3>() = body_frame_error(poses[0].theta, e1);
  const auto& edges = tree.edges();
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const int i = edges[k].parent;
    const int j = edges[k].child;
    // Depends only on the relative configuration q_i - q_j.
    out.z.template segment<3>(3 + 3 * k) =
        (desired[i].pose.vector() - desired[j].pose.vector()) -
        (poses[i].vector() - poses[j].vector());
  }
  return out;
}

template <typename Scalar>
MatrixX<Scalar> build_K(const SpanningTree& tree,
                        const VectorX<Scalar>& theta) {
  const int n = tree.size();
  MatrixX<Scalar> k = MatrixX<Scalar>::Zero(3 * n, 2 * n);
  k.template block<3, 2>(0, 0) = -PMatrix<Scalar>();
  const auto& edges = tree.edges();
  for (std::size_t r = 0; r < edges.size(); ++r) {
    const int row = 3 + 3 * static_cast<int>(r);
    k.template block<3, 2>(row, 2 * edges[r].parent) =
        -steering_matrix(theta(edges[r].parent));
    k.template block<3, 2>(row, 2 * edges[r].child) =
        steering_matrix(theta(edges[r].child));
  }
  return k;
}

template <typename Scalar>
Vector3<Scalar> desired_rate(const DesiredState<Scalar>& d) {
  return unicycle_rate(d.pose.theta, d.twist);
}

template <typename Scalar>
VectorX<Scalar> build_H(const SpanningTree& tree, Scalar leader_theta,
                        std::span<const DesiredState<Scalar>> desired) {
  const int n = tree.size();
  VectorX<Scalar> h(3 * n);
  h.template head<3>() = body_frame_error(leader_theta, desired_rate(desired[0]));
  const auto& edges = tree.edges();
  for (std::size_t r = 0; r < edges.size(); ++r) {
    h.template segment<3>(3 + 3 * r) =
        desired_rate(desired[edges[r].parent]) -
        desired_rate(desired[edges[r].child]);
  }
  return h;
}

// Time derivative of K along heading rates omega: each edge row carries
// -omega_p Q^T S(theta_p) and +omega_c Q^T S(theta_c); the leader row is
// constant.
template <typename Scalar>
MatrixX<Scalar> build_K_dot(const SpanningTree& tree,
                            const VectorX<Scalar>& theta,
                            const VectorX<Scalar>& omega) {
  const int n = tree.size();
  const Matrix3<Scalar> qt = QMatrix<Scalar>().transpose();
  MatrixX<Scalar> kd = MatrixX<Scalar>::Zero(3 * n, 2 * n);
  const auto& edges = tree.edges();
  for (std::size_t r = 0; r < edges.size(); ++r) {
    const int row = 3 + 3 * static_cast<int>(r);
    const int p = edges[r].parent;
    const int c = edges[r].child;
    kd.template block<3, 2>(row, 2 * p) =
        -omega(p) * qt * steering_matrix(theta(p));
    kd.template block<3, 2>(row, 2 * c) =
        omega(c) * qt * steering_matrix(theta(c));
  }
  return kd;
}

// d/dt [S(theta_d) eta_d] = omega_d Q^T S(theta_d) eta_d + S(theta_d) eta_d'.
template <typename Scalar>
Vector3<Scalar> desired_rate_dot(const DesiredState<Scalar>& d) {
  const Matrix32<Scalar> s = steering_matrix(d.pose.theta);
  return d.twist.omega * QMatrix<Scalar>().transpose() * (s * d.twist.vector()) +
         s * d.twist_rate;
}

// Time derivative of H. The leader block picks up the robot's own yaw rate
// through d/dt R^T(theta_1) = omega_1 Q R^T(theta_1).
template <typename Scalar>
VectorX<Scalar> build_H_dot(const SpanningTree& tree, Scalar leader_theta,
                            Scalar leader_omega,
                            std::span<const DesiredState<Scalar>> desired) {
  const int n = tree.size();
  VectorX<Scalar> hd(3 * n);
  const Matrix3<Scalar> q = QMatrix<Scalar>();
  const Vector3<Scalar> rotated =
      body_frame_error(leader_theta, desired_rate(desired[0]));
  hd.template head<3>() =
      leader_omega * q * rotated +
      body_frame_error(leader_theta, desired_rate_dot(desired[0]));
  const auto& edges = tree.edges();
  for (std::size_t r = 0; r < edges.size(); ++r) {
    hd.template segment<3>(3 + 3 * r) =
        desired_rate_dot(desired[edges[r].parent]) -
        desired_rate_dot(desired[edges[r].child]);
  }
  return hd;
}

// z' = K eta + H plus the frame-rotation term omega_1 Q s_1 in the leader
// block (it drops out of z^T z' because Q is skew).
template <typename Scalar>
VectorX<Scalar> build_z_dot(const ErrorState<Scalar>& z,
                            const MatrixX<Scalar>& k, const VectorX<Scalar>& h,
                            const VectorX<Scalar>& eta) {
  VectorX<Scalar> zd = k * eta + h;
  const Scalar leader_omega = eta(1);
  zd.template head<3>() += leader_omega * QMatrix<Scalar>() * z.leader();
  return zd;
}

// Solves K eta = -(lambda1 z + H) in the least-squares sense.
template <typename Scalar>
LeastSquaresResult<Scalar> kinematic_control(const ErrorState<Scalar>& z,
                                             const MatrixX<Scalar>& k,
                                             const VectorX<Scalar>& h,
                                             const VectorX<Scalar>& lambda1) {
  const VectorX<Scalar> rhs = -(lambda1.cwiseProduct(z.z) + h);
  return least_squares_solve(k, rhs);
}

// Least-squares cost J(eta) = ||(-lambda1 z - H) - K eta||^2.
template <typename Scalar>
Scalar kinematic_cost(const ErrorState<Scalar>& z, const MatrixX<Scalar>& k,
                      const VectorX<Scalar>& h, const VectorX<Scalar>& lambda1,
                      const VectorX<Scalar>& eta) {
  const VectorX<Scalar> rhs = -(lambda1.cwiseProduct(z.z) + h);
  return least_squares_cost(k, rhs, eta);
}

template <typename Scalar>
VectorX<Scalar> headings(std::span<const Pose<Scalar>> poses) {
  VectorX<Scalar> theta(poses.size());
  for (std::size_t i = 0; i < poses.size(); ++i) theta(i) = poses[i].theta;
  return theta;
}

// Everything the kinematic law computes at one instant, kept together so the
// dynamic controller and the diagnostics can reuse the factorization.
template <typename Scalar>
struct KinematicLaw {
  ErrorState<Scalar> error;
  VectorX<Scalar> theta;
  MatrixX<Scalar> k;
  VectorX<Scalar> h;
  VectorX<Scalar> eta;       // least-squares solution (eta_f)
  VectorX<Scalar> residual;  // K eta + lambda1 z + H
  Scalar condition;
  NormalEquations<Scalar> normal;
};

// Evaluates the kinematic law with its conditioning guard. Chain graphs are
// additionally certified through the closed-form pivots of K^T K.
template <typename Scalar>
KinematicLaw<Scalar> evaluate_kinematic_law(
    const SpanningTree& tree, std::span<const Pose<Scalar>> poses,
    std::span<const DesiredState<Scalar>> desired,
    const VectorX<Scalar>& lambda1) {
  ErrorState<Scalar> error = build_error_state(tree, poses, desired);
  VectorX<Scalar> theta = headings(poses);
  MatrixX<Scalar> k = build_K(tree, theta);
  VectorX<Scalar> h = build_H(tree, poses[0].theta, desired);
  if (tree.is_chain()) {
    const auto pivots = ktk_chain_determinant(theta).pivots;
    if (!(pivots.minCoeff() > Scalar(0))) {
      throw RankDeficient("chain K^T K lost a positive pivot");
    }
  }
  NormalEquations<Scalar> normal(k);
  const VectorX<Scalar> rhs = -(lambda1.cwiseProduct(error.z) + h);
  VectorX<Scalar> eta = normal.solve(k.transpose() * rhs);
  VectorX<Scalar> residual = k * eta - rhs;
  const Scalar condition = normal.condition();
  return {std::move(error), std::move(theta),    std::move(k),
          std::move(h),     std::move(eta),      std::move(residual),
          condition,        std::move(normal)};
}

// Analytic time derivative of eta_f = -K^+ (lambda1 z + H) along the actual
// robot twists eta:
//   eta_f' = -(d K^+/dt)(lambda1 z + H) - K^+ (lambda1 z' + H'),
//   d K^+/dt = d(K^T K)^{-1}/dt K^T + (K^T K)^{-1} K'^T,
//   d(K^T K)^{-1}/dt = -(K^T K)^{-1} (K'^T K + K^T K') (K^T K)^{-1}.
template <typename Scalar>
VectorX<Scalar> etaf_dot(const KinematicLaw<Scalar>& law,
                         const SpanningTree& tree,
                         std::span<const Pose<Scalar>> poses,
                         const VectorX<Scalar>& eta,
                         std::span<const DesiredState<Scalar>> desired,
                         const VectorX<Scalar>& lambda1) {
  const int n = tree.size();
  VectorX<Scalar> omega(n);
  for (int i = 0; i < n; ++i) omega(i) = eta(2 * i + 1);
  const MatrixX<Scalar> k_dot = build_K_dot(tree, law.theta, omega);
  const VectorX<Scalar> h_dot =
      build_H_dot(tree, poses[0].theta, omega(0), desired);
  const VectorX<Scalar> z_dot = build_z_dot(law.error, law.k, law.h, eta);
  const VectorX<Scalar> b = lambda1.cwiseProduct(law.error.z) + law.h;
  const VectorX<Scalar> b_dot = lambda1.cwiseProduct(z_dot) + h_dot;
  const MatrixX<Scalar> gram_dot =
      k_dot.transpose() * law.k + law.k.transpose() * k_dot;
  // With eta_f = -(K^T K)^{-1} K^T b the three terms collapse to one solve.
  const VectorX<Scalar> inner =
      gram_dot * law.eta + k_dot.transpose() * b + law.k.transpose() * b_dot;
  return -law.normal.solve(inner);
}

template <typename Scalar>
VectorX<Scalar> etaf_dot(const SpanningTree& tree,
                         std::span<const Pose<Scalar>> poses,
                         const VectorX<Scalar>& eta,
                         std::span<const DesiredState<Scalar>> desired,
                         const VectorX<Scalar>& lambda1) {
  const auto law = evaluate_kinematic_law(tree, poses, desired, lambda1);
  return etaf_dot(law, tree, poses, eta, desired, lambda1);
}

}  // namespace formation

#endif  // FORMATION_FORMATION_CONTROL_H_
