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

#include <algorithm>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numeric>
#include <vector>

#include "annealscale/error.hpp"
#include "annealscale/noise.hpp"
#include "catch2/catch.hpp"

namespace annealscale {

namespace {

// Mean and standard error of a sample.
struct Moments {
    double mean;
    double stderr_;
};

Moments moments(const std::vector<double>& x) {
    const double n = static_cast<double>(x.size());
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / (n - 1) / n)};
}

// Integral of S(w) g(w) over (0, inf). The substitution w = w0 u^(1/(1-p))
// removes the w^-p singularity of the density.
template <class G>
double spectral_integral(const NoiseSpectrum& spec, G g) {
    const double q = 1.0 - spec.exponent;
    const double norm = 1.0 / (q * boost::math::tgamma(q));
    auto f = [&](double u) {
        const double w = spec.cutoff * std::pow(u, 1.0 / q);
        return norm * std::exp(-w / spec.cutoff) * g(w);
    };
    // exp(-u^(1/q)) is below 1e-30 well before u = 8^q
    const double upper = std::pow(70.0, q);
    double err = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, upper, 25, 1e-13,
                                                                        &err);
}

std::vector<NoiseSignal> ensemble(const NoiseSpectrum& spec, std::size_t count,
                                  std::uint64_t master) {
    std::vector<NoiseSignal> out;
    out.reserve(count);
    for (std::size_t r = 0; r < count; ++r) out.push_back(sample_signal(spec, derive_seed(master, {r})));
    return out;
}

}  // namespace

TEST_CASE("spectrum validation") {
    NoiseSpectrum spec;
    CHECK_NOTHROW(spec.validate());
    for (double p : {0.0, 1.0, -0.1, 1.5}) {
        NoiseSpectrum bad = spec;
        bad.exponent = p;
        CHECK_THROWS_AS(bad.validate(), ParameterError);
    }
    NoiseSpectrum bad = spec;
    bad.cutoff = 0.0;
    CHECK_THROWS_AS(bad.validate(), ParameterError);
    bad = spec;
    bad.coupling = -1e-3;
    CHECK_THROWS_AS(bad.validate(), ParameterError);
    bad = spec;
    bad.n_modes = 0;
    CHECK_THROWS_AS(bad.validate(), ParameterError);
    CHECK_THROWS_AS(sample_signal(bad, 1), ParameterError);
}

TEST_CASE("the spectrum is a normalized density") {
    NoiseSpectrum spec;
    CHECK(spectral_integral(spec, [](double) { return 1.0; }) == Approx(1.0).epsilon(1e-10));
    CHECK(spectral_integral(spec, [](double w) { return w; }) == Approx(0.25).epsilon(1e-10));
    spec.exponent = 0.4;
    spec.cutoff = 2.5;
    CHECK(spectral_integral(spec, [](double) { return 1.0; }) == Approx(1.0).epsilon(1e-10));
    CHECK(spec.density(0.7) ==
          Approx(std::pow(0.7 / 2.5, -0.4) * std::exp(-0.7 / 2.5) / (2.5 * std::tgamma(0.6))));
}

TEST_CASE("sampled frequencies") {
    NoiseSpectrum spec;
    const auto signal = sample_signal(spec, 20260101);
    REQUIRE(signal.size() == 1000);

    std::vector<double> omega;
    for (std::size_t i = 0; i < signal.size(); ++i) omega.push_back(signal.mode(i).omega);
    CHECK(std::all_of(omega.begin(), omega.end(), [](double w) { return w > 0.0; }));

    SECTION("mean frequency is (1-p) w0") {
        const double expected = spectral_integral(spec, [](double w) { return w; });
        const auto m = moments(omega);
        CHECK(std::abs(m.mean - expected) < 5.0 * m.stderr_);
    }

    SECTION("frequencies follow the spectral density") {
        // Kolmogorov-Smirnov against the gamma CDF on 1e5 draws
        NoiseSpectrum big = spec;
        big.n_modes = 100000;
        const auto many = sample_signal(big, 7);
        std::vector<double> w(many.size());
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = many.mode(i).omega;
        std::sort(w.begin(), w.end());
        const double n = static_cast<double>(w.size());
        double d = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double cdf = boost::math::gamma_p(1.0 - big.exponent, w[i] / big.cutoff);
            d = std::max({d, std::abs(cdf - i / n), std::abs(cdf - (i + 1) / n)});
        }
        // critical value at significance 0.001
        CHECK(d * std::sqrt(n) < 1.95);
    }
}

TEST_CASE("sampling is reproducible") {
    NoiseSpectrum spec;
    spec.n_modes = 64;
    const auto a = sample_signal(spec, 99);
    const auto b = sample_signal(spec, 99);
    const auto c = sample_signal(spec, 100);
    bool same = true;
    bool differ = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        same = same && a.mode(i).omega == b.mode(i).omega && a.mode(i).x == b.mode(i).x &&
               a.mode(i).p == b.mode(i).p;
        differ = differ || a.mode(i).omega != c.mode(i).omega;
    }
    CHECK(same);
    CHECK(differ);
    CHECK(a.seed() == 99);
}

TEST_CASE("derived seeds") {
    CHECK(derive_seed(1, {2, 3}) == derive_seed(1, {2, 3}));
    CHECK(derive_seed(1, {2, 3}) != derive_seed(1, {3, 2}));
    CHECK(derive_seed(1, {2, 3}) != derive_seed(2, {2, 3}));
    CHECK(derive_seed(1, {2}) != derive_seed(1, {2, 0}));
    CHECK(seed_tag(0.1) != seed_tag(0.10000000000000002));
}

TEST_CASE("signal evaluation") {
    NoiseSpectrum spec;
    GIVEN("a single mode") {
        spec.n_modes = 1;
        const auto signal = sample_signal(spec, 5);
        THEN("eta(0) is its cosine amplitude") { CHECK(signal(0.0) == signal.mode(0).x); }
    }
    GIVEN("unit cosine amplitudes") {
        std::vector<NoiseMode> modes;
        for (int i = 0; i < 400; ++i) modes.push_back({0.01 * (i + 1), 1.0, 0.0});
        spec.n_modes = modes.size();
        const NoiseSignal signal(modes, spec, 0);
        THEN("eta(0) = sqrt(N)") { CHECK(signal(0.0) == Approx(20.0).epsilon(1e-14)); }
    }
    GIVEN("zero amplitudes") {
        std::vector<NoiseMode> modes(300, NoiseMode{0.3, 0.0, 0.0});
        spec.n_modes = modes.size();
        const NoiseSignal signal(modes, spec, 0);
        THEN("eta vanishes everywhere") {
            for (double t : {0.0, 1.0, 123.4, -7.0}) CHECK(signal(t) == 0.0);
        }
    }
    GIVEN("a sampled signal") {
        spec.n_modes = 777;  // not a multiple of any vector width
        const auto signal = sample_signal(spec, 11);
        THEN("the mode sum matches a direct evaluation") {
            for (double t : {0.0, 0.5, 3.25, 1234.5, 98765.4321}) {
                long double ref = 0.0L;
                for (std::size_t i = 0; i < signal.size(); ++i) {
                    const auto m = signal.mode(i);
                    ref += m.x * std::cos(static_cast<long double>(m.omega) * t) +
                           m.p * std::sin(static_cast<long double>(m.omega) * t);
                }
                ref /= std::sqrt(static_cast<long double>(signal.size()));
                CHECK(signal(t) == Approx(static_cast<double>(ref)).margin(1e-11));
            }
            const std::vector<double> times{0.0, 1.0, 2.0, 40.5};
            std::vector<double> values(times.size());
            signal.evaluate(times, values);
            for (std::size_t k = 0; k < times.size(); ++k) CHECK(values[k] == signal(times[k]));
        }
    }
}

TEST_CASE("closed-form autocorrelation") {
    NoiseSpectrum spec;
    CHECK(autocorrelation_exact(spec, 0.0) == 1.0);
    const double at_one = std::pow(std::complex<double>(1.0, -1.0), -0.25).real();
    CHECK(autocorrelation_exact(spec, 1.0) == Approx(at_one).epsilon(1e-14));

    std::vector<double> magnitude;
    for (double tau : {0.5, 1.0, 10.0, 100.0}) {
        const double quad = spectral_integral(spec, [tau](double w) { return std::cos(w * tau); });
        CHECK(autocorrelation_exact(spec, tau) == Approx(quad).margin(1e-9));
        magnitude.push_back(std::abs(quad));
    }
    CHECK(magnitude[3] < magnitude[2]);
    CHECK(magnitude[2] < magnitude[1]);

    spec.exponent = 0.3;
    spec.cutoff = 2.0;
    const double quad = spectral_integral(spec, [](double w) { return std::cos(w * 0.8); });
    CHECK(autocorrelation_exact(spec, 0.8) == Approx(quad).margin(1e-9));
}

TEST_CASE("ensemble statistics over independent realizations") {
    NoiseSpectrum spec;
    spec.n_modes = 100;
    const std::size_t count = 10000;
    const auto signals = ensemble(spec, count, 314159);
    const auto partners = ensemble(spec, count, 271828);
    const double t0 = 3.7;

    SECTION("zero mean and unit variance") {
        for (double t : {0.0, t0, 37.2}) {
            std::vector<double> x(count);
            for (std::size_t r = 0; r < count; ++r) x[r] = signals[r](t);
            const auto m = moments(x);
            CHECK(std::abs(m.mean) < 5.0 * m.stderr_);
        }
        std::vector<double> sq0(count), sq1(count);
        for (std::size_t r = 0; r < count; ++r) {
            sq0[r] = signals[r](0.0) * signals[r](0.0);
            sq1[r] = signals[r](37.2) * signals[r](37.2);
        }
        const auto v0 = moments(sq0);
        const auto v1 = moments(sq1);
        CHECK(std::abs(v0.mean - 1.0) < 0.05);
        // stationarity
        CHECK(std::abs(v0.mean - v1.mean) <
              5.0 * std::sqrt(v0.stderr_ * v0.stderr_ + v1.stderr_ * v1.stderr_));
    }

    SECTION("autocorrelation matches the characteristic function") {
        for (double tau : {0.0, 0.5, 1.0, 5.0}) {
            std::vector<double> prod(count);
            for (std::size_t r = 0; r < count; ++r) prod[r] = signals[r](t0) * signals[r](t0 + tau);
            const auto m = moments(prod);
            INFO("tau = " << tau);
            CHECK(std::abs(m.mean - autocorrelation_exact(spec, tau)) < 5.0 * m.stderr_);
        }
    }

    SECTION("distinct sites are uncorrelated") {
        for (double tau : {0.0, 1.0}) {
            std::vector<double> prod(count);
            for (std::size_t r = 0; r < count; ++r) prod[r] = signals[r](t0) * partners[r](t0 + tau);
            const auto m = moments(prod);
            CHECK(std::abs(m.mean) < 5.0 * m.stderr_);
        }
    }
}

}  // namespace annealscale
