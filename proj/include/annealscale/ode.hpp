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

// Adaptive Dormand-Prince 5(4) integration with a PI step-size controller.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <sstream>
#include <vector>

#include "annealscale/error.hpp"

namespace annealscale {

struct StepperOptions {
    double rtol = 1e-8;
    double atol = 1e-10;
    double initial_step = 0.0;  // 0 selects a step from the first derivative
    double max_step = 0.0;      // 0 means unbounded
    double min_step = 1e-12;    // relative to max(1, |t|)
    std::uint64_t max_steps = 0;  // 0 means unbounded

    void validate() const;
};

struct IntegrationStats {
    std::uint64_t accepted = 0;
    std::uint64_t rejected = 0;
    std::uint64_t evaluations = 0;
};

namespace dopri5 {

inline constexpr double c[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};

inline constexpr double a[7][6] = {
        {},
        {1.0 / 5},
        {3.0 / 40, 9.0 / 40},
        {44.0 / 45, -56.0 / 15, 32.0 / 9},
        {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
        {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
        {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};

// fifth-order weights equal the last row of a (FSAL)
inline constexpr double e[7] = {71.0 / 57600,      0.0,          -71.0 / 16695, 71.0 / 1920,
                                -17253.0 / 339200, 22.0 / 525, -1.0 / 40};

}  // namespace dopri5

/// PI controller in the form used by Hairer's DOPRI5.
class StepController {
  public:
    /// Returns true when a step with scaled error `err` is accepted; `h` is
    /// replaced by the proposal for the next attempt either way.
    bool judge(double err, double& h) {
        constexpr double beta = 0.04;
        constexpr double expo = 0.2 - beta * 0.75;
        constexpr double safe = 0.9;
        constexpr double grow = 5.0;    // largest step increase
        constexpr double shrink = 0.1;  // largest step decrease
        if (!std::isfinite(err)) {
            h *= shrink;
            rejected_last_ = true;
            return false;
        }
        const double fac11 = std::pow(err, expo);
        if (err <= 1.0) {
            double fac = fac11 / std::pow(facold_, beta);
            fac = std::clamp(fac / safe, 1.0 / grow, 1.0 / shrink);
            facold_ = std::max(err, 1e-4);
            double next = h / fac;
            if (rejected_last_) next = std::min(next, h);
            h = next;
            rejected_last_ = false;
            return true;
        }
        h /= std::min(1.0 / shrink, fac11 / safe);
        rejected_last_ = true;
        return false;
    }

  private:
    double facold_ = 1e-4;
    bool rejected_last_ = false;
};

/// Throws IntegrationError describing a step-size underflow.
[[noreturn]] void throw_step_underflow(double t, double h, double err);

/// Generic integrator for y' = f(t, y) on a flat vector of doubles.
///
/// System must provide `void operator()(double t, std::span<const double> y,
/// std::span<double> dydt)`. The step size persists across calls to
/// integrate(), so a long interval may be covered piecewise at no extra cost.
template <class System>
class DormandPrince {
  public:
    DormandPrince(std::size_t n, StepperOptions options)
            : options_(options), y1_(n), tmp_(n), k_(7, std::vector<double>(n)) {
        options_.validate();
        h_ = options_.initial_step;
    }

    void integrate(System& f, double t0, double t1, std::span<double> y) {
        if (t1 <= t0) return;
        const std::size_t n = y.size();
        f(t0, y, k_[0]);
        ++stats_.evaluations;
        if (h_ <= 0.0) h_ = initial_step(t0, y, k_[0]);

        double t = t0;
        while (t < t1) {
            if (options_.max_steps && stats_.accepted + stats_.rejected >= options_.max_steps) {
                std::ostringstream msg;
                msg << "step budget exhausted at t=" << t;
                throw IntegrationError(msg.str(), t, std::numeric_limits<double>::quiet_NaN());
            }
            if (options_.max_step > 0.0) h_ = std::min(h_, options_.max_step);
            bool last = false;
            double h = h_;
            if (t + h >= t1 || t + 1.01 * h >= t1) {
                h = t1 - t;
                last = true;
            }
            if (h < options_.min_step * std::max(1.0, std::abs(t))) {
                throw_step_underflow(t, h, last_error_);
            }

            for (std::size_t s = 1; s < 7; ++s) {
                for (std::size_t i = 0; i < n; ++i) {
                    double acc = 0.0;
                    for (std::size_t j = 0; j < s; ++j) acc += dopri5::a[s][j] * k_[j][i];
                    (s == 6 ? y1_ : tmp_)[i] = y[i] + h * acc;
                }
                f(t + dopri5::c[s] * h, s == 6 ? y1_ : tmp_, k_[s]);
            }
            stats_.evaluations += 6;

            double sum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double delta = 0.0;
                for (std::size_t j = 0; j < 7; ++j) delta += dopri5::e[j] * k_[j][i];
                const double scale =
                        options_.atol + options_.rtol * std::max(std::abs(y[i]), std::abs(y1_[i]));
                const double r = h * delta / scale;
                sum += r * r;
            }
            const double err = std::sqrt(sum / static_cast<double>(n));
            last_error_ = err;

            double proposal = h;
            if (controller_.judge(err, proposal)) {
                ++stats_.accepted;
                t = last ? t1 : t + h;
                std::copy(y1_.begin(), y1_.end(), y.begin());
                std::swap(k_[0], k_[6]);
                // keep the unclamped proposal so the next segment starts well
                if (!last || proposal < h_) h_ = proposal;
            } else {
                ++stats_.rejected;
                h_ = proposal;
            }
        }
    }

    const IntegrationStats& stats() const { return stats_; }
    double step_size() const { return h_; }

  private:
    double initial_step(double t, std::span<const double> y, std::span<const double> dy) const {
        double d0 = 0.0;
        double d1 = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double sk = options_.atol + options_.rtol * std::abs(y[i]);
            d0 += (y[i] / sk) * (y[i] / sk);
            d1 += (dy[i] / sk) * (dy[i] / sk);
        }
        double h = (d0 < 1e-10 || d1 < 1e-10) ? 1e-6 : 0.01 * std::sqrt(d0 / d1);
        h = std::min(h, 0.1 * std::max(1.0, std::abs(t)));
        if (options_.max_step > 0.0) h = std::min(h, options_.max_step);
        return h;
    }

    StepperOptions options_;
    StepController controller_;
    IntegrationStats stats_;
    std::vector<double> y1_;
    std::vector<double> tmp_;
    std::vector<std::vector<double>> k_;
    double h_ = 0.0;
    double last_error_ = 0.0;
};

}  // namespace annealscale
