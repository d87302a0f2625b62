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

#include "formation/diagnostics.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include <boost/multiprecision/float128.hpp>

namespace Eigen {

template <>
struct NumTraits<boost::multiprecision::float128>
    : GenericNumTraits<boost::multiprecision::float128> {
  using Self = boost::multiprecision::float128;
  using Real = Self;
  using NonInteger = Self;
  using Literal = Self;
  using Nested = Self;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 2,
    AddCost = 8,
    MulCost = 16,
  };
  static Self epsilon() { return std::numeric_limits<Self>::epsilon(); }
  static Self dummy_precision() { return Self(1e-28); }
  static Self highest() { return std::numeric_limits<Self>::max(); }
  static Self lowest() { return std::numeric_limits<Self>::lowest(); }
  static Self infinity() { return std::numeric_limits<Self>::infinity(); }
  static Self quiet_NaN() { return std::numeric_limits<Self>::quiet_NaN(); }
  static int digits10() { return std::numeric_limits<Self>::digits10; }
};

}  // namespace Eigen

namespace formation {

namespace {

using Extended = boost::multiprecision::float128;

// State advanced by a single RK4 step of signed length h.
SimState<Extended> shifted(const ClosedLoop<Extended>& loop,
                           const SimState<Extended>& s, Extended h) {
  auto rate = [&](Extended t, const VectorX<Extended>& x) {
    return loop.derivative(SimState<Extended>{t, x, s.n, s.mode});
  };
  SimState<Extended> out = s;
  out.x += rk4_increment(s.t, s.x, h, rate);
  out.t = s.t + h;
  return out;
}

VectorX<Extended> analytic_etaf_rate(const ClosedLoop<Extended>& loop,
                                     const Evaluation<Extended>& ev) {
  if (ev.etaf_rate.size()) return ev.etaf_rate;
  return etaf_dot<Extended>(ev.law, loop.model().tree, ev.poses, ev.twist,
                            ev.desired, loop.lambda1());
}

// Sampled profiles are defined on [0, end] only.
bool difference_fits(const SystemModel& model, double t, double h) {
  for (const TrajectoryProfile& p : model.profiles) {
    if (const auto* sampled = std::get_if<SampledTwist>(&p)) {
      if (t - h < 0.0 || t + h > sampled->end_time()) return false;
    }
  }
  return true;
}

}  // namespace

EtafRateCheck check_etaf_rate(const SystemModel& model,
                              const SimState<double>& state, double h) {
  const ClosedLoop<Extended> loop(model);
  const SimState<Extended> s = state.cast<Extended>();
  const Evaluation<Extended> ev = loop.evaluate(s);
  const VectorX<Extended> analytic = analytic_etaf_rate(loop, ev);
  const Extended step = static_cast<Extended>(h);
  const VectorX<Extended> forward = loop.evaluate(shifted(loop, s, step)).law.eta;
  const VectorX<Extended> backward = loop.evaluate(shifted(loop, s, -step)).law.eta;
  const VectorX<Extended> fd = (forward - backward) / (Extended(2) * step);

  EtafRateCheck out;
  out.analytic = analytic.cast<double>();
  out.finite_difference = fd.cast<double>();
  out.error = static_cast<double>((analytic - fd).cwiseAbs().maxCoeff());
  const double scale = static_cast<double>(analytic.cwiseAbs().maxCoeff());
  if (scale > 0) {
    out.relative_error = out.error / scale;
  } else {
    out.relative_error =
        out.error > 0 ? std::numeric_limits<double>::infinity() : 0.0;
  }
  return out;
}

LyapunovRateCheck check_lyapunov_rate(const SystemModel& model,
                                      const SimState<double>& state, double h) {
  const ClosedLoop<Extended> loop(model);
  const SimState<Extended> s = state.cast<Extended>();
  const Evaluation<Extended> ev = loop.evaluate(s);
  const auto here = loop.lyapunov(s, ev);
  const Extended step = static_cast<Extended>(h);
  const SimState<Extended> plus = shifted(loop, s, step);
  const SimState<Extended> minus = shifted(loop, s, -step);
  const Extended v_plus = loop.lyapunov(plus, loop.evaluate(plus)).value;
  const Extended v_minus = loop.lyapunov(minus, loop.evaluate(minus)).value;

  const VectorX<Extended>& z = ev.law.error.z;
  Extended scale = abs(z.dot(loop.lambda1().cwiseProduct(z))) +
                   abs(z.dot(ev.law.residual));
  if (s.mode == Mode::kDynamic) {
    scale += abs(ev.sigma.dot(loop.lambda2().cwiseProduct(ev.sigma)));
  }

  LyapunovRateCheck out;
  out.value = static_cast<double>(here.value);
  out.predicted = static_cast<double>(here.predicted_rate);
  const Extended fd = (v_plus - v_minus) / (Extended(2) * step);
  out.finite_difference = static_cast<double>(fd);
  out.error = static_cast<double>(abs(fd - here.predicted_rate));
  out.scale = static_cast<double>(scale);
  return out;
}

double normal_equation_ratio(const KinematicLaw<double>& law,
                             const Eigen::VectorXd& lambda1) {
  const Eigen::VectorXd b = lambda1.cwiseProduct(law.error.z) + law.h;
  const double lhs = (law.k.transpose() * law.residual).cwiseAbs().maxCoeff();
  return lhs / (1.0 + law.k.norm() * b.norm());
}

bool least_squares_is_optimal(const KinematicLaw<double>& law,
                              const Eigen::VectorXd& lambda1, std::mt19937& rng,
                              int trials) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> exponent(-3.0, 0.0);
  const double best =
      kinematic_cost<double>(law.error, law.k, law.h, lambda1, law.eta);
  for (int k = 0; k < trials; ++k) {
    Eigen::VectorXd delta(law.eta.size());
    for (Eigen::Index j = 0; j < delta.size(); ++j) delta(j) = normal(rng);
    delta *= std::pow(10.0, exponent(rng)) * (1.0 + law.eta.norm());
    const Eigen::VectorXd perturbed = law.eta + delta;
    if (kinematic_cost<double>(law.error, law.k, law.h, lambda1, perturbed) <
        best) {
      return false;
    }
  }
  return true;
}

std::vector<CheckResult> run_checks(const ScenarioConfig& config) {
  const SystemModel model = SystemModel::FromConfig(config);
  std::mt19937 rng(20170622);

  double worst_ratio = 0;
  long optimality_failures = 0;
  long evaluations = 0;
  auto probe = [&](const SimState<double>&, const Evaluation<double>& ev) {
    worst_ratio = std::max(worst_ratio, normal_equation_ratio(ev.law, model.lambda1));
    ++evaluations;
  };

  std::vector<SimState<double>> samples;
  long sample_index = 0;
  const long stride = std::max(1L, std::lround(config.sample_rate / 10.0));
  auto observer = [&](const SimState<double>& s, const Evaluation<double>& ev) {
    if (!least_squares_is_optimal(ev.law, model.lambda1, rng, 10)) {
      ++optimality_failures;
    }
    if (sample_index++ % stride == 0 &&
        difference_fits(model, s.t, kFiniteDifferenceStep)) {
      samples.push_back(s);
    }
  };
  simulate(config, observer, probe);

  std::vector<CheckResult> results;
  {
    CheckResult r{"least-squares normal equations", worst_ratio <= kNormalEquationTolerance,
                  worst_ratio, kNormalEquationTolerance,
                  std::to_string(evaluations) + " controller evaluations"};
    results.push_back(r);
  }
  {
    CheckResult r{"least-squares optimality", optimality_failures == 0,
                  static_cast<double>(optimality_failures), 0.0,
                  "random perturbations never lower the cost"};
    results.push_back(r);
  }

  double worst_lyapunov = 0;
  double worst_etaf = 0;
  for (const SimState<double>& s : samples) {
    const LyapunovRateCheck lr = check_lyapunov_rate(model, s, kFiniteDifferenceStep);
    worst_lyapunov = std::max(worst_lyapunov, lr.relative_error());
    const EtafRateCheck er = check_etaf_rate(model, s, kFiniteDifferenceStep);
    worst_etaf = std::max(worst_etaf, er.relative_error);
  }
  const std::string where = std::to_string(samples.size()) + " sampled instants";
  results.push_back({config.mode == Mode::kDynamic ? "lyapunov rate identity (V_a)"
                                                   : "lyapunov rate identity (V)",
                     worst_lyapunov <= kLyapunovRateTolerance, worst_lyapunov,
                     kLyapunovRateTolerance, where + ", relative to |z'l1 z| + |s'l2 s| + |z'r|"});
  results.push_back({"eta_f rate vs finite difference", worst_etaf <= kEtafRateTolerance,
                     worst_etaf, kEtafRateTolerance, where + ", relative to ||eta_f'||"});
  return results;
}

void print_checks(const std::vector<CheckResult>& results, std::ostream& out) {
  for (const CheckResult& r : results) {
    out << (r.passed ? "PASS" : "FAIL") << "  " << r.name << "  worst="
        << std::setprecision(6) << r.worst << " limit=" << r.tolerance << "  ("
        << r.detail << ")\n";
  }
}

}  // namespace formation
