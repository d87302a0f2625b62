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

#ifndef FORMATION_TRAJECTORY_H_
#define FORMATION_TRAJECTORY_H_

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <type_traits>
#include <typeindex>
#include <variant>
#include <vector>

#include "formation/errors.h"
#include "formation/se2.h"

namespace formation {

// Desired trajectories need |v_d| bounded away from zero; below this the
// curvature relation omega = (x' y'' - x'' y') / v^2 is singular.
inline constexpr double kMinDesiredSpeed = 1e-6;

// Desired pose, twist, and twist rate of one robot at one instant. The pose
// satisfies q_d' = S(theta_d) eta_d by construction.
template <typename Scalar>
struct DesiredState {
  Pose<Scalar> pose;
  Twist<Scalar> twist;
  Vector2<Scalar> twist_rate = Vector2<Scalar>::Zero();
};

// Constant (v, omega): a circular arc, or a straight line when omega == 0.
struct ConstantTwist {
  Posed start;
  Twistd twist;
  bool operator==(const ConstantTwist&) const = default;
};

struct TwistSample {
  double t = 0;
  double v = 0;
  double omega = 0;
  double v_rate = 0;
  double omega_rate = 0;
  bool operator==(const TwistSample&) const = default;
};

// Time-indexed twist program. Between samples the twist is the cubic Hermite
// interpolant of the sampled values and rates, and the pose is obtained by
// RK4 integration of the unicycle kinematics on a fixed grid.
class SampledTwist {
 public:
  SampledTwist(Posed start, std::vector<TwistSample> samples, double step);

  const Posed& start() const { return start_; }
  const std::vector<TwistSample>& samples() const { return samples_; }
  double step() const { return step_; }
  double end_time() const { return samples_.back().t; }

  // Interpolated twist and its time derivative.
  template <typename Scalar>
  void twist_at(Scalar t, Twist<Scalar>& twist, Vector2<Scalar>& rate) const;
  // Grid pose advanced by one partial RK4 step, carried out in Scalar.
  template <typename Scalar>
  Pose<Scalar> pose_at(Scalar t) const;

  bool operator==(const SampledTwist& o) const {
    return start_ == o.start_ && samples_ == o.samples_ && step_ == o.step_;
  }

 private:
  void check_domain(double t) const;
  // Pose grid integrated in Scalar; double is built eagerly, other types on
  // first use and shared between copies.
  template <typename Scalar>
  std::vector<Vector3<Scalar>> integrate_grid() const;
  template <typename Scalar>
  const std::vector<Vector3<Scalar>>& grid() const;
  template <typename Scalar>
  Vector3<Scalar> rate(Scalar t, const Vector3<Scalar>& q) const;
  template <typename Scalar>
  Vector3<Scalar> rk4(Scalar t, const Vector3<Scalar>& q, Scalar h) const;

  Posed start_;
  std::vector<TwistSample> samples_;
  double step_;
  std::vector<Eigen::Vector3d> grid_;
  struct GridCache {
    std::mutex mutex;
    std::map<std::type_index, std::shared_ptr<const void>> grids;
  };
  std::shared_ptr<GridCache> cache_ = std::make_shared<GridCache>();
};

using TrajectoryProfile = std::variant<ConstantTwist, SampledTwist>;

template <typename Scalar>
void SampledTwist::twist_at(Scalar t, Twist<Scalar>& twist,
                            Vector2<Scalar>& rate) const {
  check_domain(static_cast<double>(t));
  auto hi = std::upper_bound(
      samples_.begin(), samples_.end(), static_cast<double>(t),
      [](double value, const TwistSample& s) { return value < s.t; });
  if (hi == samples_.end()) --hi;
  const TwistSample& b = *hi;
  const TwistSample& a = *(hi - 1);
  const Scalar h = Scalar(b.t - a.t);
  const Scalar s = (t - Scalar(a.t)) / h;
  const Scalar s2 = s * s;
  const Scalar s3 = s2 * s;
  // Cubic Hermite basis and its derivative with respect to s.
  const Scalar h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
  const Scalar h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
  const Scalar d00 = 6 * s2 - 6 * s, d10 = 3 * s2 - 4 * s + 1;
  const Scalar d01 = -6 * s2 + 6 * s, d11 = 3 * s2 - 2 * s;
  twist.v = h00 * a.v + h10 * h * a.v_rate + h01 * b.v + h11 * h * b.v_rate;
  twist.omega = h00 * a.omega + h10 * h * a.omega_rate + h01 * b.omega +
                h11 * h * b.omega_rate;
  rate(0) = (d00 * a.v + d01 * b.v) / h + d10 * a.v_rate + d11 * b.v_rate;
  rate(1) = (d00 * a.omega + d01 * b.omega) / h + d10 * a.omega_rate +
            d11 * b.omega_rate;
}

template <typename Scalar>
Vector3<Scalar> SampledTwist::rate(Scalar t, const Vector3<Scalar>& q) const {
  using std::min;
  Twist<Scalar> twist;
  Vector2<Scalar> unused;
  twist_at(min(t, Scalar(end_time())), twist, unused);
  return unicycle_rate(q(2), twist);
}

template <typename Scalar>
Vector3<Scalar> SampledTwist::rk4(Scalar t, const Vector3<Scalar>& q,
                                  Scalar h) const {
  const Scalar half = h / 2;
  const Vector3<Scalar> k1 = rate(t, q);
  const Vector3<Scalar> k2 = rate(t + half, (q + half * k1).eval());
  const Vector3<Scalar> k3 = rate(t + half, (q + half * k2).eval());
  const Vector3<Scalar> k4 = rate(t + h, (q + h * k3).eval());
  return q + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
}

template <typename Scalar>
std::vector<Vector3<Scalar>> SampledTwist::integrate_grid() const {
  using std::min;
  const auto count = static_cast<std::size_t>(std::ceil(end_time() / step_)) + 1;
  const Scalar step(step_), end(end_time());
  std::vector<Vector3<Scalar>> out;
  out.reserve(count);
  out.push_back(start_.vector().template cast<Scalar>());
  for (std::size_t k = 1; k < count; ++k) {
    const Scalar t0 = Scalar(static_cast<double>(k - 1)) * step;
    const Scalar h = min(step, end - t0);
    out.push_back(h > Scalar(0) ? rk4<Scalar>(t0, out.back(), h) : out.back());
  }
  return out;
}

template <typename Scalar>
const std::vector<Vector3<Scalar>>& SampledTwist::grid() const {
  if constexpr (std::is_same_v<Scalar, double>) {
    return grid_;
  } else {
    std::lock_guard<std::mutex> lock(cache_->mutex);
    std::shared_ptr<const void>& slot = cache_->grids[typeid(Scalar)];
    if (!slot) {
      slot = std::make_shared<const std::vector<Vector3<Scalar>>>(
          integrate_grid<Scalar>());
    }
    return *static_cast<const std::vector<Vector3<Scalar>>*>(slot.get());
  }
}

template <typename Scalar>
Pose<Scalar> SampledTwist::pose_at(Scalar t) const {
  check_domain(static_cast<double>(t));
  const std::vector<Vector3<Scalar>>& g = grid<Scalar>();
  auto k = static_cast<std::size_t>(std::floor(static_cast<double>(t) / step_));
  k = std::min(k, g.size() - 1);
  const Scalar tk = Scalar(static_cast<double>(k)) * Scalar(step_);
  return Pose<Scalar>::FromVector(rk4(tk, g[k], t - tk));
}

Posed initial_pose(const TrajectoryProfile& profile);

namespace detail {

// sin(u) / u, continuous through zero.
template <typename Scalar>
Scalar sinc(Scalar u) {
  using std::abs;
  using std::sin;
  if (abs(u) < Scalar(1e-4)) return Scalar(1) - u * u / Scalar(6);
  return sin(u) / u;
}

inline void check_speed(double v, double t) {
  if (!(std::abs(v) >= kMinDesiredSpeed)) {
    throw SingularSpeed("desired speed |v_d| = " + std::to_string(std::abs(v)) +
                        " below threshold at t = " + std::to_string(t));
  }
}

}  // namespace detail

template <typename Scalar>
DesiredState<Scalar> desired_state(const ConstantTwist& profile, Scalar t) {
  using std::cos;
  using std::sin;
  detail::check_speed(profile.twist.v, static_cast<double>(t));
  const Pose<Scalar> q0 = profile.start.cast<Scalar>();
  const Scalar v = static_cast<Scalar>(profile.twist.v);
  const Scalar w = static_cast<Scalar>(profile.twist.omega);
  // Chord form of the arc: (v/w)(sin th - sin th0) = v t cos(mid) sinc(w t/2).
  const Scalar half = w * t / Scalar(2);
  const Scalar mid = q0.theta + half;
  const Scalar chord = v * t * detail::sinc(half);
  DesiredState<Scalar> d;
  d.pose = {q0.x + chord * cos(mid), q0.y + chord * sin(mid), q0.theta + w * t};
  d.twist = {v, w};
  d.twist_rate.setZero();
  return d;
}

template <typename Scalar>
DesiredState<Scalar> desired_state(const SampledTwist& profile, Scalar t) {
  DesiredState<Scalar> d;
  profile.twist_at(t, d.twist, d.twist_rate);
  detail::check_speed(static_cast<double>(d.twist.v), static_cast<double>(t));
  d.pose = profile.pose_at(t);
  return d;
}

template <typename Scalar>
DesiredState<Scalar> desired_state(const TrajectoryProfile& profile, Scalar t) {
  return std::visit([t](const auto& p) { return desired_state<Scalar>(p, t); },
                    profile);
}

// Yaw rate of a planar curve from its Cartesian derivatives.
inline double omega_from_cartesian(double x_dot, double x_ddot, double y_dot,
                                   double y_ddot, double v_d) {
  if (!(std::abs(v_d) >= kMinDesiredSpeed)) {
    throw SingularSpeed("omega_from_cartesian: |v_d| below threshold");
  }
  return (x_dot * y_ddot - x_ddot * y_dot) / (v_d * v_d);
}

}  // namespace formation

#endif  // FORMATION_TRAJECTORY_H_
