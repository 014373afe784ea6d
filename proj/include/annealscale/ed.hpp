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

// Full Hilbert-space reference for short chains.
//
// Basis: site 0 is the least-significant bit of the basis index; a clear bit
// is spin up (sz = +1). All routines use the same ChainSpec (schedule and
// noise signals) as the free-fermion code, so the two are directly comparable.

#include <Eigen/Dense>
#include <cstddef>

#include "annealscale/bdg.hpp"
#include "annealscale/chain.hpp"
#include "annealscale/ode.hpp"

namespace annealscale::ed {

inline constexpr std::size_t max_sites = 12;

struct DenseState {
    Eigen::VectorXcd amplitudes;
    std::size_t sites = 0;

    double norm() const { return amplitudes.norm(); }
};

/// Product state with every spin along +z.
DenseState all_up(std::size_t sites);
/// Product state with every spin along +x.
DenseState x_polarized(std::size_t sites);

/// Dense H(s, t) = -J(s) sum sz_i sz_{i+1} - sum Gamma_i(s, t) sx_i.
Eigen::MatrixXd build_hamiltonian(const ChainSpec& chain, double s, double t);

/// Applies H(s, t) without forming the matrix.
void apply_hamiltonian(const ChainSpec& chain, double s, double t, const Eigen::VectorXcd& in,
                       Eigen::VectorXcd& out);

struct Eigenpair {
    double energy = 0.0;
    DenseState state;
};

/// Lowest eigenpair of H(s, t) by dense diagonalization.
Eigenpair ground_state(const ChainSpec& chain, double s, double t);

/// Lowest `count` eigenvalues of H(s, t), ascending.
Eigen::VectorXd spectrum(const ChainSpec& chain, double s, double t, std::size_t count);

/// <psi|H(s, t)|psi> and <psi|H^2|psi> - <psi|H|psi>^2.
double energy(const DenseState& state, const ChainSpec& chain, double s, double t);
double energy_variance(const DenseState& state, const ChainSpec& chain, double s, double t);

/// rtol 1e-11, which keeps the norm within 1e-8 over t = 1e3.
StepperOptions default_exact_stepper();

/// Integrates the Schrodinger equation from t = 0 to t = T (s = t / T).
DenseState evolve_exact(const DenseState& initial, const ChainSpec& chain, double T,
                        const StepperOptions& stepper = default_exact_stepper());

/// Evolves up to `t_end` under a schedule evaluated with annealing time T.
DenseState evolve_exact_to(const DenseState& initial, const ChainSpec& chain, double T,
                           double t_end, const StepperOptions& stepper = default_exact_stepper());

struct ClassicalStats {
    double residual_energy = 0.0;         // <sum_bonds (1 - sz sz)>
    double magnetization_deficit = 0.0;   // <L - |sum sz|>
};

/// z-basis expectations obtained by summing |amplitude|^2 over basis states.
ClassicalStats classical_stats(const DenseState& state);

/// Two-point functions <c_i^+ c_j> and <c_i c_j> with c_i built from the spin
/// operators, c_i = (prod_{j<i} sx_j) (sz_i - i sy_i) / 2.
CorrelationPair correlators(const DenseState& state);

}  // namespace annealscale::ed
