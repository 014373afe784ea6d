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

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

namespace annealscale {

/// Derives an independent 64-bit stream seed from a master seed and a path of
/// integer tags (site index, realization index, ...). The derivation depends
/// only on its arguments, never on the order in which streams are requested.
std::uint64_t derive_seed(std::uint64_t master, std::span<const std::uint64_t> path);
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path);

/// Bit pattern of a double, for use as a seed tag.
std::uint64_t seed_tag(double value);

/// Engine seeded from a derived seed through std::seed_seq.
std::mt19937_64 make_engine(std::uint64_t seed);

/// Power-law spectrum S(w) = (w/w0)^-p exp(-w/w0) / (w0 Gamma(1-p)).
///
/// S is also the probability density of a Gamma(1-p, w0) variate, which is
/// how mode frequencies are drawn.
struct NoiseSpectrum {
    double exponent = 0.75;      // p
    double cutoff = 1.0;         // w0
    double coupling = 0.01;      // lambda
    std::size_t n_modes = 1000;

    /// Throws ParameterError unless 0 < p < 1, w0 > 0, lambda >= 0, n_modes >= 1.
    void validate() const;

    double density(double omega) const;
};

struct NoiseMode {
    double omega;
    double x;  // cosine amplitude
    double p;  // sine amplitude
};

/// One realization eta(t) = N^-1/2 sum_i (x_i cos(w_i t) + p_i sin(w_i t)).
///
/// Immutable once built; evaluation is exact at any t and safe to call from
/// several threads.
class NoiseSignal {
  public:
    NoiseSignal(std::span<const NoiseMode> modes, NoiseSpectrum spectrum, std::uint64_t seed);

    double operator()(double t) const;

    /// Evaluates at several times; out.size() must equal times.size().
    void evaluate(std::span<const double> times, std::span<double> out) const;

    std::size_t size() const { return omega_.size(); }
    NoiseMode mode(std::size_t i) const { return {omega_[i], x_[i], p_[i]}; }
    const NoiseSpectrum& spectrum() const { return spectrum_; }
    std::uint64_t seed() const { return seed_; }

  private:
    std::vector<double> omega_;
    std::vector<double> x_;
    std::vector<double> p_;
    NoiseSpectrum spectrum_;
    std::uint64_t seed_;
};

/// Draws a realization: w_i ~ Gamma(1-p, w0), x_i, p_i ~ N(0, 1).
NoiseSignal sample_signal(const NoiseSpectrum& spectrum, std::uint64_t seed);

/// Re[(1 - i w0 tau)^-(1-p)]: the N -> infinity autocorrelation <eta(t) eta(t+tau)>.
double autocorrelation_exact(const NoiseSpectrum& spectrum, double tau);

}  // namespace annealscale
