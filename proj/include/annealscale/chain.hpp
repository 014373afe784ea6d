// Copyright 2026 The annealscale Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "annealscale/noise.hpp"

namespace annealscale {

/// Annealing ramps J(s) = s^bond_power and Gamma(s) = (1 - s)^field_power
/// with s = t / T, unless `frozen_s` pins the schedule to one point.
struct Schedule {
    double bond_power = 2.0;
    double field_power = 2.0;
    std::optional<double> frozen_s;

    double progress(double t, double T) const;
    double bond(double s) const;
    double field(double s) const;
};

/// Open transverse-field Ising chain
///
///   H(t) = -J(s) sum_i sz_i sz_{i+1} - sum_i Gamma_i(s, t) sx_i,
///   Gamma_i(s, t) = Gamma(s) + lambda eta_i(t),
///
/// where eta_i is the noise signal attached to site i (absent sites are clean).
class ChainSpec {
  public:
    explicit ChainSpec(std::size_t sites, Schedule schedule = {});

    std::size_t size() const { return sites_; }
    const Schedule& schedule() const { return schedule_; }

    /// Attaches a signal to one site with coupling lambda.
    void attach_noise(std::size_t site, std::shared_ptr<const NoiseSignal> signal,
                      double coupling);

    double coupling() const { return coupling_; }
    const std::shared_ptr<const NoiseSignal>& noise(std::size_t site) const {
        return noise_[site];
    }
    bool noisy() const;

    double bond(double s) const { return schedule_.bond(s); }
    double field(std::size_t site, double s, double t) const;

    /// Fields of every site at (s, t); out.size() == size().
    void fields(double s, double t, std::span<double> out) const;

  private:
    std::size_t sites_;
    Schedule schedule_;
    double coupling_ = 0.0;
    std::vector<std::shared_ptr<const NoiseSignal>> noise_;
};

}  // namespace annealscale
