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


// End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
// exits nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "formation/diagnostics.h"
#include "formation/scenario.h"
#include "formation/structured_linalg.h"

namespace {

using namespace formation;

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Criterion 1.
constexpr double kAdaptiveSettleFraction = 0.02;
constexpr double kAdaptiveSettleTime = 20.0;
constexpr double kWallClockBudget = 10.0;  // seconds
// Criterion 2.
constexpr double kKinematicSettleFraction = 0.05;
constexpr double kKinematicSettleTime = 10.0;
constexpr double kTwistTolerance = 0.01;  // relative, per component
constexpr double kTwistSettleTime = 20.0;
constexpr double kKinematicFinalError = 1e-4;
// Criterion 3.
constexpr double kDeterminantTolerance = 1e-9;
constexpr int kDeterminantDraws = 500;
// Criterion 4.
constexpr int kPivotDraws = 1000;
// Criterion 5.
constexpr int kEtafStride = 10;  // every 0.1 s
constexpr double kHalvingRatioLow = 3.5;
constexpr double kHalvingRatioHigh = 4.5;
// Criterion 6.
constexpr int kCancellationStates = 10000;
constexpr double kCancellationUlps = 64;
// Criterion 7.
constexpr int kOptimalityStates = 100;
constexpr int kOptimalityDirections = 100;
// Criterion 8.
constexpr double kKinematicManifold = 1e-6;
constexpr double kDynamicManifold = 1e-4;
// Criterion 9.
constexpr double kEstimateSettleFraction = 0.01;
constexpr double kEstimateWindow = 10.0;

int failures = 0;

void report(int index, const std::string& title, bool passed,
            const std::string& detail) {
  std::printf("[%s] %d. %s: %s\n", passed ? "PASS" : "FAIL", index,
              title.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!passed) ++failures;
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

std::mt19937& rng() {
  static std::mt19937 engine(20170622);
  return engine;
}

Eigen::VectorXd random_headings(int n) {
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  Eigen::VectorXd theta(n);
  for (int i = 0; i < n; ++i) theta(i) = angle(rng());
  return theta;
}

Eigen::VectorXd random_vector(int n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = u(rng());
  return v;
}

std::vector<std::pair<int, int>> chain(int n) {
  std::vector<std::pair<int, int>> edges;
  for (int k = 1; k < n; ++k) edges.emplace_back(k, k + 1);
  return edges;
}

double max_error(const TraceRecord& r) {
  return std::max(r.norm_e.maxCoeff(),
                  r.norm_eps.size() ? r.norm_eps.maxCoeff() : 0.0);
}

ScenarioConfig on_trajectory(ScenarioConfig c) {
  for (RobotConfig& r : c.robots) {
    r.initial_pose = initial_pose(r.trajectory);
    r.initial_twist = desired_state<double>(r.trajectory, 0.0).twist;
    r.initial_estimate = param_vector<double>(r.params);
  }
  return c;
}

struct AdaptiveRun {
  Trace trace;
  std::vector<SimState<double>> samples;
  double worst_ratio = 0;
  long evaluations = 0;
};

AdaptiveRun adaptive_run(const ScenarioConfig& c) {
  AdaptiveRun run;
  auto probe = [&](const SimState<double>&, const Evaluation<double>& ev) {
    run.worst_ratio = std::max(run.worst_ratio, normal_equation_ratio(ev.law, c.lambda1));
    ++run.evaluations;
  };
  auto observer = [&](const SimState<double>& s, const Evaluation<double>&) {
    run.samples.push_back(s);
  };
  run.trace = simulate(c, observer, probe);
  return run;
}

void adaptive_reproduction(const ScenarioConfig& c, const Trace& trace) {
  const auto start = std::chrono::steady_clock::now();
  const Trace timed = simulate(c);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const TraceRecord& first = trace.records.front();
  const double e0 = first.norm_e.maxCoeff();
  const double eps0 = first.norm_eps.maxCoeff();
  double worst_e = 0, worst_eps = 0;
  for (const TraceRecord& r : trace.records) {
    if (r.t < kAdaptiveSettleTime) continue;
    worst_e = std::max(worst_e, r.norm_e.maxCoeff());
    worst_eps = std::max(worst_eps, r.norm_eps.maxCoeff());
  }
  const bool ok = worst_e <= kAdaptiveSettleFraction * e0 &&
                  worst_eps <= kAdaptiveSettleFraction * eps0 &&
                  wall < kWallClockBudget && timed.records.size() == trace.records.size();
  report(1, "adaptive pentagon settles", ok,
         fmt("t >= %.0f: max|e| %.3g of initial %.3g, max|eps| %.3g of initial %.3g "
             "(limit %.0f%%); 50 s run took %.2f s (limit %.0f s)",
             kAdaptiveSettleTime, worst_e, e0, worst_eps, eps0,
             100 * kAdaptiveSettleFraction, wall, kWallClockBudget));
}

void kinematic_reproduction() {
  const ScenarioConfig c = preset("kinematic-pentagon");
  const Trace trace = simulate(c);
  const TraceRecord& first = trace.records.front();
  const double e0 = first.norm_e.maxCoeff();
  const double eps0 = first.norm_eps.maxCoeff();
  double worst_e = 0, worst_eps = 0, worst_twist = 0;
  for (const TraceRecord& r : trace.records) {
    if (r.t >= kKinematicSettleTime) {
      worst_e = std::max(worst_e, r.norm_e.maxCoeff());
      worst_eps = std::max(worst_eps, r.norm_eps.maxCoeff());
    }
    if (r.t >= kTwistSettleTime) {
      for (int i = 0; i < trace.n; ++i) {
        worst_twist = std::max({worst_twist, std::abs(r.twists(2 * i) - 5.0) / 5.0,
                                std::abs(r.twists(2 * i + 1) - 1.0) / 1.0});
      }
    }
  }
  const double final_error = max_error(trace.records.back());
  const bool ok = worst_e <= kKinematicSettleFraction * e0 &&
                  worst_eps <= kKinematicSettleFraction * eps0 &&
                  worst_twist <= kTwistTolerance && final_error < kKinematicFinalError;
  report(2, "kinematic pentagon settles", ok,
         fmt("t >= %.0f: max|e| %.3g of %.3g, max|eps| %.3g of %.3g (limit %.0f%%); "
             "t >= %.0f: twist off (5,1) by %.2g (limit %.0g); final error %.2g "
             "(limit %.0g)",
             kKinematicSettleTime, worst_e, e0, worst_eps, eps0,
             100 * kKinematicSettleFraction, kTwistSettleTime, worst_twist,
             kTwistTolerance, final_error, kKinematicFinalError));
}

void determinant_equivalence() {
  double worst = 0;
  double smallest = std::numeric_limits<double>::infinity();
  for (int n = 2; n <= 8; ++n) {
    const std::vector<std::pair<int, int>> edges = chain(n);
    const SpanningTree tree = validate_spanning_tree(n, edges);
    for (int k = 0; k < kDeterminantDraws; ++k) {
      const Eigen::VectorXd theta = random_headings(n);
      const double closed = ktk_chain_determinant(theta).determinant;
      const double general = pentadiagonal_determinant(ktk_chain_assemble(theta));
      const Eigen::MatrixXd K = build_K(tree, theta);
      const double dense = (K.transpose() * K).partialPivLu().determinant();
      worst = std::max({worst, std::abs(closed - general) / std::abs(general),
                        std::abs(closed - dense) / std::abs(dense),
                        std::abs(general - dense) / std::abs(dense)});
      smallest = std::min({smallest, closed, general, dense});
    }
  }
  report(3, "chain determinant equivalence", worst <= kDeterminantTolerance && smallest > 0,
         fmt("n = 2..8, %d draws each: worst relative gap %.2g (limit %.0g), "
             "smallest determinant %.3g",
             kDeterminantDraws, worst, kDeterminantTolerance, smallest));
}

void pivot_bounds() {
  long violations = 0;
  for (int k = 0; k < kPivotDraws; ++k) {
    const int n = 2 + k % 7;
    const int m = 2 * n;
    const Eigen::VectorXd x = ktk_chain_determinant(random_headings(n)).pivots;
    for (int i = 1; i <= m - 3; i += 2) {
      if (!((i + 3.0) / (i + 1.0) <= x(i - 1) && x(i - 1) <= 2.0)) ++violations;
    }
    if (!(2.0 / m <= x(m - 2) && x(m - 2) <= 1.0)) ++violations;
    if (x(m - 1) != 2.0 / m) ++violations;
  }
  report(4, "pivot bounds", violations == 0,
         fmt("%d heading draws, %ld bound violations", kPivotDraws, violations));
}

void etaf_rate(const SystemModel& model, const std::vector<SimState<double>>& samples) {
  double worst = 0, ratio_low = std::numeric_limits<double>::infinity(), ratio_high = 0;
  int checked = 0;
  for (std::size_t k = 0; k < samples.size(); k += kEtafStride) {
    const EtafRateCheck a = check_etaf_rate(model, samples[k], kFiniteDifferenceStep);
    const EtafRateCheck b = check_etaf_rate(model, samples[k], kFiniteDifferenceStep / 2);
    worst = std::max(worst, a.relative_error);
    const double ratio = a.error / b.error;
    ratio_low = std::min(ratio_low, ratio);
    ratio_high = std::max(ratio_high, ratio);
    ++checked;
  }
  const bool ok = worst < kEtafRateTolerance && ratio_low >= kHalvingRatioLow &&
                  ratio_high <= kHalvingRatioHigh;
  report(5, "fictitious velocity rate", ok,
         fmt("%d instants, h = %.0e: worst relative gap %.2g (limit %.0e); "
             "h -> h/2 gap ratio in [%.3f, %.3f] (allowed [%.1f, %.1f])",
             checked, kFiniteDifferenceStep, worst, kEtafRateTolerance, ratio_low,
             ratio_high, kHalvingRatioLow, kHalvingRatioHigh));
}

void lyapunov_rate(const SystemModel& model, const std::vector<SimState<double>>& samples) {
  double worst = 0;
  for (const SimState<double>& s : samples) {
    worst = std::max(worst,
                     check_lyapunov_rate(model, s, kFiniteDifferenceStep).relative_error());
  }

  // sigma^T Y phi_err + phi_err^T Gamma^-1 phi_err' vanishes under the
  // adaptation law; the bound is the rounding error of the two dot products.
  const int n = model.robots();
  double worst_cancel = 0;
  for (int k = 0; k < kCancellationStates; ++k) {
    const Eigen::MatrixXd y = block_regression<double>(random_vector(2 * n, -10, 10),
                                                       random_vector(2 * n, -10, 10));
    const Eigen::VectorXd sigma = random_vector(2 * n, -5, 5);
    const Eigen::VectorXd phi_error = random_vector(6 * n, -5, 5);
    const Eigen::VectorXd gamma = random_vector(6 * n, 0.1, 10);
    const Eigen::VectorXd rate = adaptation_rate<double>(y, sigma, gamma);
    const double cross = sigma.dot(y * phi_error);
    const double adapt = phi_error.dot(gamma.cwiseInverse().cwiseProduct(rate));
    const double scale =
        sigma.cwiseAbs().dot(y.cwiseAbs() * phi_error.cwiseAbs());
    worst_cancel = std::max(worst_cancel, std::abs(cross + adapt) / (kEps * scale));
  }
  const bool ok = worst < kLyapunovRateTolerance && worst_cancel <= kCancellationUlps;
  report(6, "Lyapunov rate identity", ok,
         fmt("%zu instants: worst relative gap %.2g (limit %.0e); %d random states: "
             "cross-term residue %.2g ulp of |s|'|Y||phi| (limit %.0f)",
             samples.size(), worst, kLyapunovRateTolerance, kCancellationStates,
             worst_cancel, kCancellationUlps));
}

void least_squares_contract(const SystemModel& model, const AdaptiveRun& run) {
  // Ratio at every control evaluation of the kinematic preset as well.
  const ScenarioConfig kc = preset("kinematic-pentagon");
  double worst = run.worst_ratio;
  long evaluations = run.evaluations;
  simulate(kc, nullptr, [&](const SimState<double>&, const Evaluation<double>& ev) {
    worst = std::max(worst, normal_equation_ratio(ev.law, kc.lambda1));
    ++evaluations;
  });

  std::uniform_real_distribution<double> time(0.0, 50.0);
  std::uniform_real_distribution<double> offset(-3.0, 3.0);
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  int suboptimal = 0;
  const ClosedLoop<double> loop(model);
  for (int k = 0; k < kOptimalityStates; ++k) {
    const double t = time(rng());
    const auto desired = loop.desired_states(t);
    std::vector<Posed> poses;
    for (const auto& d : desired) {
      poses.push_back({d.pose.x + offset(rng()), d.pose.y + offset(rng()), angle(rng())});
    }
    const auto law = evaluate_kinematic_law<double>(model.tree, poses, desired, model.lambda1);
    if (!least_squares_is_optimal(law, model.lambda1, rng(), kOptimalityDirections)) {
      ++suboptimal;
    }
  }
  const bool ok = worst <= kNormalEquationTolerance && suboptimal == 0;
  report(7, "least-squares contract", ok,
         fmt("%ld controller evaluations: worst normal-equation ratio %.2g (limit %.0e); "
             "%d random states x %d perturbations: %d lowered the cost",
             evaluations, worst, kNormalEquationTolerance, kOptimalityStates,
             kOptimalityDirections, suboptimal));
}

void invariant_manifold() {
  double worst[2] = {0, 0};
  const char* names[2] = {"kinematic-pentagon", "adaptive-pentagon"};
  for (int m = 0; m < 2; ++m) {
    const Trace trace = simulate(on_trajectory(preset(names[m])));
    for (const TraceRecord& r : trace.records) worst[m] = std::max(worst[m], max_error(r));
  }
  const bool ok = worst[0] < kKinematicManifold && worst[1] < kDynamicManifold;
  report(8, "invariant manifold", ok,
         fmt("50 s from the desired trajectories: kinematic max error %.2g (limit %.0e), "
             "dynamic with exact estimates %.2g (limit %.0e)",
             worst[0], kKinematicManifold, worst[1], kDynamicManifold));
}

void boundedness(const Trace& trace) {
  const int n = trace.n;
  double sup_phi = 0, sup_eta = 0, sup_u = 0;
  bool finite = true;
  for (const TraceRecord& r : trace.records) {
    finite = finite && r.estimates.allFinite() && r.twists.allFinite() &&
             r.controls.allFinite();
    sup_phi = std::max(sup_phi, r.estimates.cwiseAbs().maxCoeff());
    sup_eta = std::max(sup_eta, r.twists.cwiseAbs().maxCoeff());
    sup_u = std::max(sup_u, r.controls.cwiseAbs().maxCoeff());
  }
  finite = finite && std::isfinite(sup_phi) && std::isfinite(sup_eta) && std::isfinite(sup_u);

  // Each estimate's excursion over the final window, relative to its mean
  // magnitude there.
  const double t_end = trace.records.back().t;
  double worst_drift = 0;
  for (int j = 0; j < 6 * n; ++j) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0;
    int count = 0;
    for (const TraceRecord& r : trace.records) {
      if (r.t < t_end - kEstimateWindow - 1e-9) continue;
      lo = std::min(lo, r.estimates(j));
      hi = std::max(hi, r.estimates(j));
      sum += r.estimates(j);
      ++count;
    }
    const double mean = sum / count;
    worst_drift = std::max(worst_drift, std::max(hi - mean, mean - lo) / std::abs(mean));
  }
  const bool ok = finite && worst_drift <= kEstimateSettleFraction;
  report(9, "bounded adaptation", ok,
         fmt("50 s: sup|phi_hat| %.3g, sup|eta| %.3g, sup|u| %.3g, %s; final %.0f s: "
             "worst estimate excursion %.2g%% of its mean (limit %.0f%%)",
             sup_phi, sup_eta, sup_u, finite ? "all finite" : "non-finite values",
             kEstimateWindow, 100 * worst_drift, 100 * kEstimateSettleFraction));
}

}  // namespace

int main() {
  const ScenarioConfig adaptive = preset("adaptive-pentagon");
  const SystemModel model = SystemModel::FromConfig(adaptive);
  const AdaptiveRun run = adaptive_run(adaptive);

  adaptive_reproduction(adaptive, run.trace);
  kinematic_reproduction();
  determinant_equivalence();
  pivot_bounds();
  etaf_rate(model, run.samples);
  lyapunov_rate(model, run.samples);
  least_squares_contract(model, run);
  invariant_manifold();
  boundedness(run.trace);

  std::printf("%d of 9 criteria passed\n", 9 - failures);
  return failures == 0 ? 0 : 1;
}
