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

#include "annealscale/qubit.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "annealscale/parallel.hpp"

namespace annealscale {

namespace {

using Complex = std::complex<double>;

struct QubitSystem {
    double h_z;
    double lambda;
    const NoiseSignal* noise;

    // y = (Re a, Im a, Re b, Im b); d psi / dt = -i H psi
    void operator()(double t, std::span<const double> y, std::span<double> dy) const {
        const double x = noise ? lambda * (*noise)(t) : 0.0;
        const double ha_re = h_z * y[0] + x * y[2];
        const double ha_im = h_z * y[1] + x * y[3];
        const double hb_re = x * y[0] - h_z * y[2];
        const double hb_im = x * y[1] - h_z * y[3];
        dy[0] = ha_im;
        dy[1] = -ha_re;
        dy[2] = hb_im;
        dy[3] = -hb_re;
    }
};

std::size_t sample_count(const QubitRun& run) {
    return static_cast<std::size_t>(std::floor(run.t_max / run.dt_out + 1e-9)) + 1;
}

std::vector<double> sample_times(const QubitRun& run) {
    std::vector<double> t(sample_count(run));
    for (std::size_t k = 0; k < t.size(); ++k) t[k] = static_cast<double>(k) * run.dt_out;
    return t;
}

}  // namespace

StepperOptions QubitRun::default_qubit_stepper() {
    StepperOptions o;
    o.rtol = 1e-10;
    o.atol = 1e-12;
    return o;
}

void QubitRun::validate() const {
    if (!(t_max > 0.0) || !std::isfinite(t_max)) throw ParameterError("t_max must be positive");
    if (!(dt_out > 0.0) || dt_out > t_max) throw ParameterError("dt_out must lie in (0, t_max]");
    if (n_realizations < 1) throw ParameterError("need at least one realization");
    if (!std::isfinite(h_z)) throw ParameterError("h_z must be finite");
    spectrum.validate();
    stepper.validate();
}

std::vector<Eigen::Vector2cd> qubit_trajectory(const QubitRun& run, std::size_t realization) {
    const auto times = sample_times(run);
    std::unique_ptr<NoiseSignal> noise;
    if (run.spectrum.coupling != 0.0) {
        noise = std::make_unique<NoiseSignal>(
                sample_signal(run.spectrum, derive_seed(run.master_seed, {realization})));
    }
    QubitSystem system{run.h_z, run.spectrum.coupling, noise.get()};
    DormandPrince<QubitSystem> integrator(4, run.stepper);
    std::vector<double> y{1.0, 0.0, 0.0, 0.0};
    std::vector<Eigen::Vector2cd> out(times.size());
    out[0] << Complex(1.0, 0.0), Complex(0.0, 0.0);
    for (std::size_t k = 1; k < times.size(); ++k) {
        integrator.integrate(system, times[k - 1], times[k], y);
        out[k] << Complex(y[0], y[1]), Complex(y[2], y[3]);
    }
    return out;
}

namespace {

using Trajectories = std::vector<std::vector<Eigen::Vector2cd>>;

Trajectories trajectories(const QubitRun& run) {
    run.validate();
    Trajectories psi(run.n_realizations);
    parallel_for(psi.size(), run.workers, [&](std::size_t r) {
        psi[r] = qubit_trajectory(run, run.first_realization + r);
    });
    return psi;
}

// rho averaged over psi[first, last), summed in realization order
PurityCurve average(const QubitRun& run, const Trajectories& psi, std::size_t first,
                    std::size_t last) {
    PurityCurve curve;
    curve.run = run;
    curve.run.first_realization = run.first_realization + first;
    curve.run.n_realizations = last - first;
    curve.t = sample_times(run);
    const std::size_t m = curve.t.size();
    curve.purity.resize(m);
    curve.rho.resize(m);
    const long double inv = 1.0L / static_cast<long double>(last - first);
    for (std::size_t k = 0; k < m; ++k) {
        long double uu = 0, dd = 0, ud_re = 0, ud_im = 0;
        for (std::size_t r = first; r < last; ++r) {
            const Complex a = psi[r][k](0);
            const Complex b = psi[r][k](1);
            uu += std::norm(a);
            dd += std::norm(b);
            const Complex ud = a * std::conj(b);
            ud_re += ud.real();
            ud_im += ud.imag();
        }
        uu *= inv;
        dd *= inv;
        ud_re *= inv;
        ud_im *= inv;
        Eigen::Matrix2cd rho;
        rho << Complex(double(uu), 0.0), Complex(double(ud_re), double(ud_im)),
                Complex(double(ud_re), -double(ud_im)), Complex(double(dd), 0.0);
        curve.rho[k] = rho;
        curve.purity[k] = double(uu * uu + dd * dd + 2 * (ud_re * ud_re + ud_im * ud_im));
    }
    return curve;
}

}  // namespace

PurityCurve evolve_qubit(const QubitRun& run) {
    const auto psi = trajectories(run);
    return average(run, psi, 0, psi.size());
}

double coherence_time(std::span<const double> t, std::span<const double> purity) {
    if (t.size() != purity.size() || t.empty()) {
        throw ParameterError("purity curve needs matching, non-empty columns");
    }
    constexpr double level = 0.75;
    for (std::size_t k = 1; k < t.size(); ++k) {
        if (purity[k - 1] > level && purity[k] <= level) {
            const double w = (purity[k - 1] - level) / (purity[k - 1] - purity[k]);
            return t[k - 1] + w * (t[k] - t[k - 1]);
        }
    }
    std::ostringstream msg;
    msg << "horizon too short: purity is " << purity.back() << " at t=" << t.back()
        << " and never fell to 0.75";
    throw HorizonError(msg.str(), purity.back());
}

double coherence_time(const PurityCurve& curve) { return coherence_time(curve.t, curve.purity); }

double CoherenceEstimate::relative_split() const {
    return std::abs(T_r_first - T_r_second) / (0.5 * (T_r_first + T_r_second));
}

CoherenceEstimate coherence_with_split(const QubitRun& run) {
    QubitRun both = run;
    both.n_realizations = 2 * run.n_realizations;
    const auto psi = trajectories(both);
    const std::size_t n = run.n_realizations;
    CoherenceEstimate e;
    e.T_r = coherence_time(average(both, psi, 0, 2 * n));
    e.T_r_first = coherence_time(average(both, psi, 0, n));
    e.T_r_second = coherence_time(average(both, psi, n, 2 * n));
    return e;
}

}  // namespace annealscale
