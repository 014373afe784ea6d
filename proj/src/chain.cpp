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

#include "annealscale/chain.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "annealscale/error.hpp"

namespace annealscale {

double Schedule::progress(double t, double T) const {
    if (frozen_s) return *frozen_s;
    return std::clamp(t / T, 0.0, 1.0);
}

double Schedule::bond(double s) const {
    return bond_power == 2.0 ? s * s : std::pow(s, bond_power);
}

double Schedule::field(double s) const {
    const double r = 1.0 - s;
    return field_power == 2.0 ? r * r : std::pow(r, field_power);
}

ChainSpec::ChainSpec(std::size_t sites, Schedule schedule)
        : sites_(sites), schedule_(schedule), noise_(sites) {
    if (sites < 2) throw ParameterError("a chain needs at least two sites");
    if (!(schedule.bond_power > 0.0) || !(schedule.field_power > 0.0)) {
        throw ParameterError("schedule powers must be positive");
    }
    if (schedule.frozen_s && !(*schedule.frozen_s >= 0.0 && *schedule.frozen_s <= 1.0)) {
        throw ParameterError("frozen schedule point must lie in [0, 1]");
    }
}

void ChainSpec::attach_noise(std::size_t site, std::shared_ptr<const NoiseSignal> signal,
                             double coupling) {
    if (site >= sites_) {
        throw ParameterError("noise site " + std::to_string(site) + " outside the chain");
    }
    if (!(coupling >= 0.0)) throw ParameterError("noise coupling must be non-negative");
    if (noisy() && coupling != coupling_) {
        throw ParameterError("all noise sources of a chain share one coupling");
    }
    coupling_ = coupling;
    noise_[site] = std::move(signal);
}

bool ChainSpec::noisy() const {
    for (const auto& n : noise_) {
        if (n) return true;
    }
    return false;
}

double ChainSpec::field(std::size_t site, double s, double t) const {
    const double base = schedule_.field(s);
    const auto& signal = noise_[site];
    return signal ? base + coupling_ * (*signal)(t) : base;
}

void ChainSpec::fields(double s, double t, std::span<double> out) const {
    const double base = schedule_.field(s);
    for (std::size_t i = 0; i < sites_; ++i) {
        const auto& signal = noise_[i];
        out[i] = signal ? base + coupling_ * (*signal)(t) : base;
    }
}

}  // namespace annealscale
