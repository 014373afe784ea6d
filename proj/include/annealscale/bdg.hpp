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

// Free-fermion (Bogoliubov-de Gennes) treatment of the open transverse-field
// Ising chain.
//
// Conventions, fixed for the whole library:
//
//   sx_i           = 1 - 2 n_i                   (x-polarized state = vacuum)
//   sz_i sz_{i+1}  = (c_i^+ - c_i)(c_{i+1}^+ + c_{i+1})
//   H = sum_ij A_ij c_i^+ c_j + 1/2 sum_ij (B_ij c_i^+ c_j^+ + h.c.) - sum_i Gamma_i
//   A_ii = 2 Gamma_i,  A_{i,i+1} = A_{i+1,i} = -J,  B_{i,i+1} = -B_{i+1,i} = -J
//   c_i = sum_k (U_ik b_k + conj(V_ik) b_k^+),  b_k the quasiparticles.
//
// Internally the modes are propagated in the Majorana basis a_i = c_i + c_i^+,
// b_i = i (c_i^+ - c_i), where the generator is a real antisymmetric
// tridiagonal matrix and Y = Omega [U; V] obeys dY/dt = h(t) Y.

#include <Eigen/Dense>
#include <array>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "annealscale/chain.hpp"
#include "annealscale/ode.hpp"

namespace annealscale {

using RealMatrix = Eigen::MatrixXd;
using ComplexMatrix = Eigen::MatrixXcd;

struct BdgMatrices {
    RealMatrix A;  // symmetric
    RealMatrix B;  // antisymmetric
};

/// Quasiparticle modes; columns of [U; V] are orthonormal in the Nambu metric.
struct BdgModes {
    ComplexMatrix U;
    ComplexMatrix V;

    std::size_t size() const { return static_cast<std::size_t>(U.rows()); }

    /// max |U^+U + V^+V - 1|
    double orthonormality_defect() const;
    /// max |U^T V + V^T U|
    double antisymmetry_defect() const;
};

/// G_ij = <c_i^+ c_j>, F_ij = <c_i c_j>.
struct CorrelationPair {
    ComplexMatrix G;
    ComplexMatrix F;
};

BdgMatrices bdg_matrices(const ChainSpec& chain, double s, double t);

/// Nonnegative quasiparticle energies of H(A, B), in descending order.
Eigen::VectorXd quasiparticle_energies(const RealMatrix& A, const RealMatrix& B);

/// Many-body ground state of H(A, B).
///
/// Obtained from the singular value decomposition A - B = Phi diag(e) Psi^T,
/// U = (Phi + Psi) / 2, V = (Phi - Psi) / 2. Each mode's sign is fixed so the
/// largest-magnitude entry of Phi_k (and, for zero modes, of Psi_k) is
/// positive, which makes degenerate classical points reproducible.
BdgModes ground_state(const RealMatrix& A, const RealMatrix& B);

/// Ground-state energy of the chain at (s, t): -1/2 sum_k e_k.
double ground_energy(const ChainSpec& chain, double s, double t);

CorrelationPair correlations(const BdgModes& modes);

/// <-sum sz_i sz_{i+1}> + (L - 1), computed from the two-point functions.
/// Values in [-1e-8, 0) are clamped to zero.
double residual_energy(const CorrelationPair& corr);

/// <H(s, t)> for the state described by `corr`.
double energy(const CorrelationPair& corr, const ChainSpec& chain, double s, double t);

/// Applies the BdG generator: returns H_BdG [U; V] with H_BdG = [[A, B], [-B, -A]].
/// Reference route used to cross-check the Majorana propagation.
std::pair<ComplexMatrix, ComplexMatrix> apply_bdg_hamiltonian(const BdgMatrices& m,
                                                              const BdgModes& modes);

namespace detail {
// Block LU of an implicit stage system; see bdg_evolver.cpp.
struct StageFactor {
    std::vector<std::array<double, 9>> upper;
    std::vector<std::array<double, 9>> mult;
    std::vector<std::array<double, 9>> pivot_inv;
};
}  // namespace detail

enum class BdgMethod {
    gauss_legendre,  // 3-stage implicit Gauss (order 6), step doubling
    dormand_prince,  // explicit 5(4) pair
};

struct BdgStepper {
    StepperOptions options;
    BdgMethod method = BdgMethod::gauss_legendre;
};

/// rtol 1e-8, atol 1e-10, Gauss-Legendre.
BdgStepper default_bdg_stepper();

BdgMethod parse_bdg_method(const std::string& name);
const char* to_string(BdgMethod method);

/// Propagates modes from t = 0 to t = T under the annealing schedule
/// (s = t / T) including the chain's noise signals.
BdgModes evolve(const BdgModes& modes, const ChainSpec& chain, double T,
                const BdgStepper& stepper = default_bdg_stepper());

/// Stateful propagation with intermediate stops. Holds the modes in the
/// Majorana basis between calls.
///
/// The Gauss-Legendre route keeps [U; V] orthonormal to rounding for any step
/// size; the explicit route drifts at roughly rtol per unit time.
class BdgEvolver {
  public:
    BdgEvolver(const BdgModes& initial, const ChainSpec& chain, double T,
               const BdgStepper& stepper = default_bdg_stepper());

    /// Integrates forward to `t`. Times beyond T keep s = 1.
    void advance_to(double t);
    double time() const { return t_; }

    BdgModes modes() const;

    /// Residual Ising energy of the current state read directly from the
    /// Majorana two-point function.
    double residual_energy() const;
    /// <sz_i sz_{i+1}> for every bond.
    std::vector<double> bond_correlations() const;

    const IntegrationStats& stats() const { return stats_; }

  private:
    static constexpr std::size_t block = 64;  // columns per storage block

    double& at(std::vector<double>& y, std::size_t row, std::size_t col) const;
    double at(const std::vector<double>& y, std::size_t row, std::size_t col) const;
    void superdiagonal(double t, double* out) const;
    double gauss_attempt(double h);
    double dopri_attempt(double h);

    const ChainSpec* chain_;
    double T_;
    BdgStepper stepper_;
    StepController dopri_control_;
    bool rejected_last_ = false;
    IntegrationStats stats_;
    std::size_t n_;        // 2L Majorana operators
    std::size_t blocks_;   // ceil(2L / block)
    // Y = Re | Im, stored as `blocks_` row-major n x block panels
    std::vector<double> y_;
    std::vector<double> y_full_;
    std::vector<double> y_half_;
    std::vector<double> coeff_;
    std::array<detail::StageFactor, 3> factors_;
    std::vector<double> work_;
    double t_ = 0.0;
    double h_ = 0.0;
    double last_error_ = 0.0;
};

}  // namespace annealscale
