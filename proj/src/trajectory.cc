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

#include "formation/trajectory.h"

#include <algorithm>
#include <cmath>

namespace formation {

SampledTwist::SampledTwist(Posed start, std::vector<TwistSample> samples,
                           double step)
    : start_(start), samples_(std::move(samples)), step_(step) {
  if (samples_.size() < 2) {
    throw ValidationError("sampled twist profile needs at least two samples");
  }
  if (samples_.front().t != 0.0) {
    throw ValidationError("sampled twist profile must start at t = 0");
  }
  for (std::size_t k = 1; k < samples_.size(); ++k) {
    if (!(samples_[k].t > samples_[k - 1].t)) {
      throw ValidationError("sample times must be strictly increasing");
    }
  }
  if (!(step_ > 0.0)) {
    throw ValidationError("sampled twist integration step must be positive");
  }
  grid_ = integrate_grid<double>();
}

void SampledTwist::check_domain(double t) const {
  if (t < 0.0 || t > end_time()) {
    throw FormationError("sampled twist profile evaluated outside [0, " +
                         std::to_string(end_time()) + "]");
  }
}

Posed initial_pose(const TrajectoryProfile& profile) {
  return std::visit(
      [](const auto& p) -> Posed {
        if constexpr (std::is_same_v<std::decay_t<decltype(p)>, ConstantTwist>) {
          return p.start;
        } else {
          return p.start();
        }
      },
      profile);
}

}  // namespace formation
