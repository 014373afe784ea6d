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

// One qubit in a noisy transverse field,
//
//   H(t) = h_z sz + lambda eta(t) sx,   psi(0) = |sz = +1>,
//
// averaged over noise realizations into a density matrix.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "annealscale/error.hpp"
#include "annealscale/noise.hpp"
#include "annealscale/ode.hpp"

namespace annealscale {

struct QubitRun {
    double h_z = 0.0;
    NoiseSpectrum spectrum;  // lambda is spectrum.coupling
    double t_max = 200.0;
    double dt_out = 0.5;
    std::size_t n_realizations = 1000;
    std::uint64_t master_seed = 1;
    /// Realizations first_realization .. first_realization + n_realizations - 1
    /// are used, so disjoint seed sets share a master seed.
    std::size_t first_realization = 0;
    StepperOptions stepper = default_qubit_stepper();
    std::size_t workers = 0;

    static StepperOptions default_qubit_stepper();
    void validate() const;
};

struct PurityCurve {
    QubitRun run;
    std::vector<double> t;
    std::vector<double> purity;
    std::vector<Eigen::Matrix2cd> rho;
};

/// Amplitudes (up, down) of one realization at t = 0, dt_out, 2 dt_out, ...
std::vector<Eigen::Vector2cd> qubit_trajectory(const QubitRun& run, std::size_t realization);

PurityCurve evolve_qubit(const QubitRun& run);

/// Thrown when the purity never falls to 3/4 inside the horizon.
class HorizonError : public Error {
  public:
    HorizonError(const std::string& what, double final_purity)
            : Error(what), final_purity_(final_purity) {}
    double final_purity() const { return final_purity_; }

  private:
    double final_purity_;
};

/// First downward crossing of purity 3/4, linearly interpolated.
double coherence_time(std::span<const double> t, std::span<const double> purity);
double coherence_time(const PurityCurve& curve);

struct CoherenceEstimate {
    double T_r = 0.0;        // from all 2N realizations
    double T_r_first = 0.0;  // realizations [0, N)
    double T_r_second = 0.0; // realizations [N, 2N)
    double relative_split() const;
};

/// T_r from two disjoint sets of run.n_realizations realizations each, and
/// from their union.
CoherenceEstimate coherence_with_split(const QubitRun& run);

}  // namespace annealscale
