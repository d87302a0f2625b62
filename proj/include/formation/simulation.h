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

#ifndef FORMATION_SIMULATION_H_
#define FORMATION_SIMULATION_H_

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "formation/adaptive_control.h"
#include "formation/errors.h"
#include "formation/formation_control.h"
#include "formation/scenario_config.h"
#include "formation/se2.h"
#include "formation/spanning_tree.h"
#include "formation/trajectory.h"

namespace formation {

// The closed-loop plant and controllers of one scenario, without its initial
// condition or integration settings.
struct SystemModel {
  SpanningTree tree;
  Mode mode = Mode::kKinematic;
  std::vector<TrajectoryProfile> profiles;
  Eigen::VectorXd lambda1;
  Eigen::VectorXd lambda2;
  Eigen::VectorXd gamma;
  std::vector<RobotParams> params;

  int robots() const { return tree.size(); }
  static SystemModel FromConfig(const ScenarioConfig& config);
};

// Flat integration state: poses (3n), then in dynamic mode the twists (2n)
// and the parameter estimates (6n).
template <typename Scalar>
struct SimState {
  Scalar t{0};
  VectorX<Scalar> x;
  int n = 0;
  Mode mode = Mode::kKinematic;

  static int Dimension(int n, Mode mode) {
    return mode == Mode::kDynamic ? 11 * n : 3 * n;
  }

  Pose<Scalar> pose(int i) const {
    return Pose<Scalar>::FromVector(x.template segment<3>(3 * i));
  }
  std::vector<Pose<Scalar>> poses() const {
    std::vector<Pose<Scalar>> out(n);
    for (int i = 0; i < n; ++i) out[i] = pose(i);
    return out;
  }
  auto twists() const { return x.segment(3 * n, 2 * n); }
  auto estimates() const { return x.segment(5 * n, 6 * n); }

  template <typename Other>
  SimState<Other> cast() const {
    return {static_cast<Other>(t), x.template cast<Other>(), n, mode};
  }
};

SimState<double> initial_state(const ScenarioConfig& config);

// eta' = M^{-1} (u - D eta).
template <typename Scalar>
Vector2<Scalar> unicycle_acceleration(const RobotParams& params,
                                      const Vector2<Scalar>& eta,
                                      const Vector2<Scalar>& u) {
  const Matrix2<Scalar> damping = params.damping.template cast<Scalar>();
  const Vector2<Scalar> mass(static_cast<Scalar>(params.mass),
                             static_cast<Scalar>(params.inertia));
  return (u - damping * eta).cwiseQuotient(mass);
}

// Controller outputs and state derivative at one instant.
template <typename Scalar>
struct Evaluation {
  explicit Evaluation(KinematicLaw<Scalar> l) : law(std::move(l)) {}

  KinematicLaw<Scalar> law;
  std::vector<Pose<Scalar>> poses;
  std::vector<DesiredState<Scalar>> desired;
  VectorX<Scalar> twist;  // commanded eta (kinematic) or state eta (dynamic)
  // Dynamic mode only.
  VectorX<Scalar> etaf_rate;
  VectorX<Scalar> sigma;
  MatrixX<Scalar> regression;
  VectorX<Scalar> control;
  VectorX<Scalar> estimate_rate;

  VectorX<Scalar> derivative;
};

template <typename Scalar>
class ClosedLoop {
 public:
  explicit ClosedLoop(const SystemModel& model)
      : model_(model),
        lambda1_(model.lambda1.cast<Scalar>()),
        lambda2_(model.lambda2.cast<Scalar>()),
        gamma_(model.gamma.cast<Scalar>()) {
    const int n = model.robots();
    if (model.mode == Mode::kDynamic) {
      mass_.resize(2 * n);
      phi_.resize(6 * n);
      for (int i = 0; i < n; ++i) {
        mass_(2 * i) = static_cast<Scalar>(model.params[i].mass);
        mass_(2 * i + 1) = static_cast<Scalar>(model.params[i].inertia);
        phi_.template segment<6>(6 * i) = param_vector<Scalar>(model.params[i]);
      }
    }
  }

  const SystemModel& model() const { return model_; }
  const VectorX<Scalar>& lambda1() const { return lambda1_; }
  const VectorX<Scalar>& lambda2() const { return lambda2_; }
  const VectorX<Scalar>& gamma() const { return gamma_; }
  const VectorX<Scalar>& mass_diagonal() const { return mass_; }
  const VectorX<Scalar>& true_parameters() const { return phi_; }

  std::vector<DesiredState<Scalar>> desired_states(Scalar t) const {
    std::vector<DesiredState<Scalar>> out;
    out.reserve(model_.profiles.size());
    for (const auto& p : model_.profiles) out.push_back(desired_state(p, t));
    return out;
  }

  Evaluation<Scalar> evaluate(const SimState<Scalar>& s) const {
    const int n = s.n;
    std::vector<Pose<Scalar>> poses = s.poses();
    std::vector<DesiredState<Scalar>> desired = desired_states(s.t);
    Evaluation<Scalar> ev{evaluate_kinematic_law<Scalar>(
        model_.tree, poses, desired, lambda1_)};
    ev.derivative.resize(s.x.size());
    if (s.mode == Mode::kKinematic) {
      ev.twist = ev.law.eta;
      for (int i = 0; i < n; ++i) {
        ev.derivative.template segment<3>(3 * i) = unicycle_rate(
            poses[i].theta,
            Twist<Scalar>::FromVector(ev.twist.template segment<2>(2 * i)));
      }
    } else {
      ev.twist = s.twists();
      ev.etaf_rate = etaf_dot<Scalar>(ev.law, model_.tree, poses, ev.twist,
                                      desired, lambda1_);
      ev.sigma = ev.twist - ev.law.eta;
      ev.regression = block_regression<Scalar>(ev.etaf_rate, ev.twist);
      ev.control = adaptive_control_u<Scalar>(ev.sigma, ev.law.error.z,
                                              ev.law.k, ev.regression,
                                              s.estimates(), lambda2_);
      ev.estimate_rate =
          adaptation_rate<Scalar>(ev.regression, ev.sigma, gamma_);
      for (int i = 0; i < n; ++i) {
        const Vector2<Scalar> eta = ev.twist.template segment<2>(2 * i);
        ev.derivative.template segment<3>(3 * i) =
            unicycle_rate(poses[i].theta, Twist<Scalar>::FromVector(eta));
        ev.derivative.template segment<2>(3 * n + 2 * i) =
            unicycle_acceleration<Scalar>(
                model_.params[i], eta,
                ev.control.template segment<2>(2 * i));
      }
      ev.derivative.segment(5 * n, 6 * n) = ev.estimate_rate;
    }
    if (!ev.derivative.allFinite()) {
      throw DivergenceError("non-finite state derivative", static_cast<double>(s.t));
    }
    ev.poses = std::move(poses);
    ev.desired = std::move(desired);
    return ev;
  }

  VectorX<Scalar> derivative(const SimState<Scalar>& s) const {
    Evaluation<Scalar> ev = evaluate(s);
    if (probe_) probe_(s, ev);
    return std::move(ev.derivative);
  }

  // Observes every controller evaluation made by the integrator.
  using Probe =
      std::function<void(const SimState<Scalar>&, const Evaluation<Scalar>&)>;
  void set_probe(Probe probe) { probe_ = std::move(probe); }

  // V_a and its predicted rate; in kinematic mode V = 1/2 z^T z and its rate
  // -z^T lambda1 z + z^T r.
  LyapunovDiagnostics<Scalar> lyapunov(const SimState<Scalar>& s,
                                       const Evaluation<Scalar>& ev) const {
    if (s.mode == Mode::kKinematic) {
      const VectorX<Scalar> empty;
      return lyapunov_diagnostics<Scalar>(ev.law.error.z, empty, empty, empty,
                                          empty, lambda1_, empty,
                                          ev.law.residual);
    }
    const VectorX<Scalar> phi_error = s.estimates() - phi_;
    return lyapunov_diagnostics<Scalar>(ev.law.error.z, ev.sigma, phi_error,
                                        mass_, gamma_, lambda1_, lambda2_,
                                        ev.law.residual);
  }

 private:
  const SystemModel& model_;
  VectorX<Scalar> lambda1_, lambda2_, gamma_;
  VectorX<Scalar> mass_;
  VectorX<Scalar> phi_;
  Probe probe_;
};

// Classical fourth-order Runge-Kutta increment of x' = rate(t, x) over h. The
// rate is re-evaluated at every stage (continuous-time control).
template <typename Scalar, typename Rate>
VectorX<Scalar> rk4_increment(Scalar t, const VectorX<Scalar>& x, Scalar h,
                              Rate&& rate) {
  const Scalar half = h / Scalar(2);
  const VectorX<Scalar> k1 = rate(t, x);
  const VectorX<Scalar> k2 = rate(t + half, (x + half * k1).eval());
  const VectorX<Scalar> k3 = rate(t + half, (x + half * k2).eval());
  const VectorX<Scalar> k4 = rate(t + h, (x + h * k3).eval());
  return h / Scalar(6) * (k1 + Scalar(2) * k2 + Scalar(2) * k3 + k4);
}

template <typename Scalar>
SimState<Scalar> rk4_step(const SimState<Scalar>& s, Scalar dt,
                          const ClosedLoop<Scalar>& loop) {
  auto rate = [&](Scalar t, const VectorX<Scalar>& x) {
    return loop.derivative(SimState<Scalar>{t, x, s.n, s.mode});
  };
  SimState<Scalar> next = s;
  next.x += rk4_increment(s.t, s.x, dt, rate);
  next.t = s.t + dt;
  return next;
}

// One uniformly spaced sample of a run.
struct TraceRecord {
  double t = 0;
  std::vector<Posed> poses;
  Eigen::VectorXd twists;     // 2n
  Eigen::VectorXd controls;   // 2n, dynamic mode
  Eigen::VectorXd estimates;  // 6n, dynamic mode
  Eigen::VectorXd norm_e;     // n
  Eigen::VectorXd norm_eps;   // n - 1, tree edge order
  double norm_z = 0;
  double v = 0;
  double va = 0;
  double ls_residual = 0;
};

struct Trace {
  int n = 0;
  Mode mode = Mode::kKinematic;
  std::vector<std::pair<int, int>> edges;  // 1-based, tree edge order
  std::vector<TraceRecord> records;
  SimState<double> final_state;
};

TraceRecord make_record(const ClosedLoop<double>& loop,
                        const SimState<double>& state);

// Invoked at every sampled instant with the state and its evaluation.
using TraceObserver = std::function<void(const SimState<double>&,
                                         const Evaluation<double>&)>;

// Fixed-step integration from t = 0 to config.t_final, sampling the trace at
// config.sample_rate. Deterministic for a given config.
Trace simulate(const ScenarioConfig& config,
               const TraceObserver& observer = nullptr,
               const ClosedLoop<double>::Probe& probe = nullptr);

}  // namespace formation

#endif  // FORMATION_SIMULATION_H_
