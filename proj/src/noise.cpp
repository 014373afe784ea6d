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

#include "annealscale/noise.hpp"

#include <cmath>
#include <complex>
#include <cstring>
#include <limits>
#include <sstream>

#include "annealscale/error.hpp"

namespace annealscale {

// Defined in noise_kernel.cpp, which is built with vectorized libm calls.
double harmonic_sum(const double* omega, const double* x, const double* p, std::size_t n, double t);

std::uint64_t derive_seed(std::uint64_t master, std::span<const std::uint64_t> path) {
    std::vector<std::uint32_t> words;
    words.reserve(2 * (path.size() + 1));
    auto push = [&words](std::uint64_t v) {
        words.push_back(static_cast<std::uint32_t>(v));
        words.push_back(static_cast<std::uint32_t>(v >> 32));
    };
    push(master);
    for (auto tag : path) push(tag);
    std::seed_seq seq(words.begin(), words.end());
    std::uint32_t out[2];
    seq.generate(out, out + 2);
    return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
    return derive_seed(master, std::span<const std::uint64_t>(path.begin(), path.size()));
}

std::uint64_t seed_tag(double value) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(value));
    std::memcpy(&bits, &value, sizeof(bits));
    return bits;
}

std::mt19937_64 make_engine(std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    return std::mt19937_64(seq);
}

void NoiseSpectrum::validate() const {
    std::ostringstream msg;
    if (!(exponent > 0.0 && exponent < 1.0)) {
        msg << "noise exponent p must lie in (0, 1), got " << exponent;
    } else if (!(cutoff > 0.0) || !std::isfinite(cutoff)) {
        msg << "noise cutoff must be positive, got " << cutoff;
    } else if (!(coupling >= 0.0) || !std::isfinite(coupling)) {
        msg << "noise coupling must be non-negative, got " << coupling;
    } else if (n_modes < 1) {
        msg << "noise needs at least one mode";
    } else {
        return;
    }
    throw ParameterError(msg.str());
}

double NoiseSpectrum::density(double omega) const {
    if (omega <= 0.0) return 0.0;
    const double u = omega / cutoff;
    return std::pow(u, -exponent) * std::exp(-u) / (cutoff * std::tgamma(1.0 - exponent));
}

NoiseSignal::NoiseSignal(std::span<const NoiseMode> modes, NoiseSpectrum spectrum,
                         std::uint64_t seed)
        : spectrum_(spectrum), seed_(seed) {
    if (modes.empty()) throw ParameterError("noise signal needs at least one mode");
    omega_.reserve(modes.size());
    x_.reserve(modes.size());
    p_.reserve(modes.size());
    for (const auto& m : modes) {
        if (!(m.omega > 0.0)) throw ParameterError("noise mode frequencies must be positive");
        omega_.push_back(m.omega);
        x_.push_back(m.x);
        p_.push_back(m.p);
    }
}

double NoiseSignal::operator()(double t) const {
    const double sum = harmonic_sum(omega_.data(), x_.data(), p_.data(), omega_.size(), t);
    return sum / std::sqrt(static_cast<double>(omega_.size()));
}

void NoiseSignal::evaluate(std::span<const double> times, std::span<double> out) const {
    for (std::size_t k = 0; k < times.size(); ++k) out[k] = (*this)(times[k]);
}

NoiseSignal sample_signal(const NoiseSpectrum& spectrum, std::uint64_t seed) {
    spectrum.validate();
    auto engine = make_engine(seed);
    std::gamma_distribution<double> frequency(1.0 - spectrum.exponent, spectrum.cutoff);
    std::normal_distribution<double> amplitude(0.0, 1.0);

    std::vector<NoiseMode> modes(spectrum.n_modes);
    for (auto& m : modes) {
        // a gamma variate can underflow to exactly zero for shape < 1
        do {
            m.omega = frequency(engine);
        } while (!(m.omega > 0.0));
    }
    for (auto& m : modes) {
        m.x = amplitude(engine);
        m.p = amplitude(engine);
    }
    return NoiseSignal(modes, spectrum, seed);
}

double autocorrelation_exact(const NoiseSpectrum& spectrum, double tau) {
    const std::complex<double> base(1.0, -spectrum.cutoff * tau);
    return std::pow(base, -(1.0 - spectrum.exponent)).real();
}

}  // namespace annealscale
