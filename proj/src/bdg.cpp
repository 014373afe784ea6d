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

#include "annealscale/bdg.hpp"

#include <algorithm>
#include <cmath>

#include "annealscale/error.hpp"

namespace annealscale {

namespace {

// Signed magnitude-maximal entry; used for the deterministic sign convention.
template <class Vec>
double dominant_entry(const Vec& v) {
    Eigen::Index idx = 0;
    v.cwiseAbs().maxCoeff(&idx);
    return v(idx);
}

}  // namespace

double BdgModes::orthonormality_defect() const {
    const auto n = U.cols();
    const ComplexMatrix gram = U.adjoint() * U + V.adjoint() * V;
    return (gram - ComplexMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
}

double BdgModes::antisymmetry_defect() const {
    const ComplexMatrix anti = U.transpose() * V + V.transpose() * U;
    return anti.cwiseAbs().maxCoeff();
}

BdgMatrices bdg_matrices(const ChainSpec& chain, double s, double t) {
    const auto L = static_cast<Eigen::Index>(chain.size());
    BdgMatrices m{RealMatrix::Zero(L, L), RealMatrix::Zero(L, L)};
    const double J = chain.bond(s);
    for (Eigen::Index i = 0; i < L; ++i) {
        m.A(i, i) = 2.0 * chain.field(static_cast<std::size_t>(i), s, t);
        if (i + 1 < L) {
            m.A(i, i + 1) = -J;
            m.A(i + 1, i) = -J;
            m.B(i, i + 1) = -J;
            m.B(i + 1, i) = J;
        }
    }
    return m;
}

Eigen::VectorXd quasiparticle_energies(const RealMatrix& A, const RealMatrix& B) {
    Eigen::BDCSVD<RealMatrix> svd(A - B);
    return svd.singularValues();
}

BdgModes ground_state(const RealMatrix& A, const RealMatrix& B) {
    if (A.rows() != A.cols() || B.rows() != A.rows() || B.cols() != A.cols()) {
        throw ParameterError("BdG blocks must be square and of equal size");
    }
    Eigen::BDCSVD<RealMatrix> svd(A - B, Eigen::ComputeFullU | Eigen::ComputeFullV);
    RealMatrix phi = svd.matrixU();
    RealMatrix psi = svd.matrixV();
    const Eigen::VectorXd& e = svd.singularValues();
    const double zero_tol = 1e-12 * std::max(1.0, e.size() ? e(0) : 1.0);
    for (Eigen::Index k = 0; k < phi.cols(); ++k) {
        if (dominant_entry(phi.col(k)) < 0.0) {
            phi.col(k) *= -1.0;
            psi.col(k) *= -1.0;
        }
        if (e(k) <= zero_tol && dominant_entry(psi.col(k)) < 0.0) psi.col(k) *= -1.0;
    }
    BdgModes modes;
    modes.U = (0.5 * (phi + psi)).cast<std::complex<double>>();
    modes.V = (0.5 * (phi - psi)).cast<std::complex<double>>();
    return modes;
}

double ground_energy(const ChainSpec& chain, double s, double t) {
    const auto m = bdg_matrices(chain, s, t);
    return -0.5 * quasiparticle_energies(m.A, m.B).sum();
}

CorrelationPair correlations(const BdgModes& modes) {
    return {modes.V * modes.V.adjoint(), modes.U * modes.V.adjoint()};
}

double residual_energy(const CorrelationPair& corr) {
    const auto L = corr.G.rows();
    double total = 0.0;
    for (Eigen::Index i = 0; i + 1 < L; ++i) {
        const double zz = 2.0 * corr.G(i, i + 1).real() - 2.0 * corr.F(i, i + 1).real();
        total += 1.0 - zz;
    }
    if (total < 0.0 && total >= -1e-8) total = 0.0;
    return total;
}

double energy(const CorrelationPair& corr, const ChainSpec& chain, double s, double t) {
    const auto m = bdg_matrices(chain, s, t);
    const auto L = m.A.rows();
    double value = 0.0;
    for (Eigen::Index i = 0; i < L; ++i) {
        value -= 0.5 * m.A(i, i);  // constant term -Gamma_i
        for (Eigen::Index j = 0; j < L; ++j) {
            value += m.A(i, j) * corr.G(i, j).real();
            value += m.B(i, j) * std::conj(corr.F(j, i)).real();
        }
    }
    return value;
}

std::pair<ComplexMatrix, ComplexMatrix> apply_bdg_hamiltonian(const BdgMatrices& m,
                                                              const BdgModes& modes) {
    const ComplexMatrix A = m.A.cast<std::complex<double>>();
    const ComplexMatrix B = m.B.cast<std::complex<double>>();
    return {A * modes.U + B * modes.V, -B.conjugate() * modes.U - A.conjugate() * modes.V};
}

}  // namespace annealscale
