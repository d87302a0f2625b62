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


#include "formation/se2.h"

#include <cmath>

#include <gtest/gtest.h>

#include "test_support.h"

namespace formation {
namespace {

using testing::kPi;
using testing::random_angle;

TEST(RotationMatrix, IdentityAtZero) {
  EXPECT_TRUE(rotation_matrix(0.0).isApprox(Eigen::Matrix3d::Identity()));
}

TEST(RotationMatrix, QuarterTurnFirstColumn) {
  const Eigen::Vector3d col = rotation_matrix(kPi / 2).col(0);
  EXPECT_NEAR(col(0), 0.0, 1e-15);
  EXPECT_NEAR(col(1), 1.0, 1e-15);
  EXPECT_NEAR(col(2), 0.0, 1e-15);
}

TEST(RotationMatrix, TransposeIsInverseRotation) {
  for (int k = 0; k < 200; ++k) {
    const double theta = random_angle();
    const Eigen::Matrix3d r = rotation_matrix(theta);
    EXPECT_LT((r.transpose() - rotation_matrix(-theta)).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_NEAR(r.determinant(), 1.0, 1e-13);
  }
}

TEST(RotationMatrix, TransposeRateMatchesSkewProduct) {
  // d/dt R^T(w t) = w Q R^T(w t), central differences converge as h^2.
  const double w = 1.7;
  const double t = 0.4;
  const Eigen::Matrix3d analytic =
      w * QMatrix<double>() * rotation_matrix(w * t).transpose();
  auto gap = [&](double h) {
    const Eigen::Matrix3d fd = (rotation_matrix(w * (t + h)).transpose() -
                                rotation_matrix(w * (t - h)).transpose()) /
                               (2 * h);
    return (fd - analytic).cwiseAbs().maxCoeff();
  };
  const double coarse = gap(1e-2);
  const double fine = gap(5e-3);
  EXPECT_LT(coarse, 1e-3);
  EXPECT_NEAR(coarse / fine, 4.0, 0.05);
}

TEST(SteeringMatrix, ZeroAngleRows) {
  Eigen::Matrix<double, 3, 2> expected;
  expected << 1, 0, 0, 0, 0, 1;
  EXPECT_EQ(steering_matrix(0.0), expected);
}

TEST(SteeringMatrix, BodyFrameProjectionIsSelector) {
  for (int k = 0; k < 100; ++k) {
    const double theta = random_angle();
    const Eigen::Matrix<double, 3, 2> rs =
        rotation_matrix(theta).transpose() * steering_matrix(theta);
    EXPECT_LT((rs - PMatrix<double>()).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(SteeringMatrix, GramOfPairIsCosineDiagonal) {
  for (int k = 0; k < 200; ++k) {
    const double a = random_angle();
    const double b = random_angle();
    const Eigen::Matrix2d g = steering_matrix(a).transpose() * steering_matrix(b);
    EXPECT_NEAR(g(0, 0), std::cos(a - b), 1e-13);
    EXPECT_NEAR(g(0, 1), 0.0, 1e-13);
    EXPECT_NEAR(g(1, 0), 0.0, 1e-13);
    EXPECT_NEAR(g(1, 1), 1.0, 1e-13);
  }
}

TEST(SkewMatrix, QuadraticFormVanishes) {
  for (int k = 0; k < 200; ++k) {
    const Eigen::Vector3d s = testing::random_vector(3, -10, 10);
    const double w = testing::uniform(-5, 5);
    EXPECT_NEAR(s.dot((w * QMatrix<double>()) * s), 0.0, 1e-12);
  }
  const Eigen::Matrix3d q = QMatrix<double>();
  const Eigen::Matrix2d block = q.topLeftCorner<2, 2>();
  EXPECT_EQ(block, Eigen::Matrix2d(-block.transpose()));
}

TEST(BodyFrameError, IdentityRotation) {
  const Eigen::Vector3d s = body_frame_error(0.0, Eigen::Vector3d(1, 2, 3));
  EXPECT_EQ(s, Eigen::Vector3d(1, 2, 3));
}

TEST(BodyFrameError, QuarterTurn) {
  const Eigen::Vector3d s = body_frame_error(kPi / 2, Eigen::Vector3d(1, 0, 0));
  EXPECT_NEAR(s(0), 0.0, 1e-15);
  EXPECT_NEAR(s(1), -1.0, 1e-15);
  EXPECT_NEAR(s(2), 0.0, 1e-15);
}

TEST(BodyFrameError, MatchesTransposedRotation) {
  for (int k = 0; k < 100; ++k) {
    const double theta = random_angle();
    const Eigen::Vector3d e = testing::random_vector(3, -5, 5);
    const Eigen::Vector3d expected = rotation_matrix(theta).transpose() * e;
    EXPECT_LT((body_frame_error(theta, e) - expected).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(UnicycleRate, Examples) {
  EXPECT_EQ(unicycle_rate(0.0, Twistd{1, 0}), Eigen::Vector3d(1, 0, 0));
  const Eigen::Vector3d q = unicycle_rate(kPi / 2, Twistd{2, 3});
  EXPECT_NEAR(q(0), 0.0, 1e-15);
  EXPECT_NEAR(q(1), 2.0, 1e-15);
  EXPECT_EQ(q(2), 3.0);
  EXPECT_EQ(unicycle_rate(0.7, Twistd{0, 0}), Eigen::Vector3d::Zero());
}

TEST(Pose, VectorRoundTripAndCast) {
  const Posed q{1.5, -2.0, 0.25};
  EXPECT_EQ(Posed::FromVector(q.vector()), q);
  const Pose<long double> wide = q.cast<long double>();
  EXPECT_EQ(wide.cast<double>(), q);
}

}  // namespace
}  // namespace formation
