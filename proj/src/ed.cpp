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

#include "annealscale/ed.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <span>
#include <vector>

#include "annealscale/error.hpp"

namespace annealscale::ed {

namespace {

using Complex = std::complex<double>;

std::size_t dimension(std::size_t sites) { return std::size_t{1} << sites; }

void check_sites(std::size_t sites) {
    if (sites > max_sites) {
        throw CapacityError("dense simulation supports at most 12 sites, got " +
                            std::to_string(sites));
    }
    if (sites < 2) throw ParameterError("chain needs at least two sites");
}

inline double spin(std::size_t basis, std::size_t site) {
    return (basis >> site) & 1u ? -1.0 : 1.0;
}

double bond_sum(std::size_t basis, std::size_t sites) {
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < sites; ++i) sum += spin(basis, i) * spin(basis, i + 1);
    return sum;
}

std::vector<double> bond_sums(std::size_t sites) {
    std::vector<double> sums(dimension(sites));
    for (std::size_t x = 0; x < sums.size(); ++x) sums[x] = bond_sum(x, sites);
    return sums;
}

// (sz_j - i sy_j)/2 followed by the string of sx on lower sites.
Eigen::VectorXcd annihilate(const Eigen::VectorXcd& psi, std::size_t site) {
    const std::size_t dim = static_cast<std::size_t>(psi.size());
    const std::size_t mask = std::size_t{1} << site;
    const std::size_t string = mask - 1;
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(psi.size());
    for (std::size_t x = 0; x < dim; ++x) {
        const Complex a = psi(static_cast<Eigen::Index>(x));
        if (a == Complex(0.0)) continue;
        // up -> (up + down)/2, down -> -(up + down)/2
        const double sign = x & mask ? -0.5 : 0.5;
        const std::size_t up = x & ~mask;
        const std::size_t down = x | mask;
        out(static_cast<Eigen::Index>(up ^ string)) += sign * a;
        out(static_cast<Eigen::Index>(down ^ string)) += sign * a;
    }
    return out;
}

}  // namespace

DenseState all_up(std::size_t sites) {
    check_sites(sites);
    DenseState state{Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dimension(sites))), sites};
    state.amplitudes(0) = 1.0;
    return state;
}

DenseState x_polarized(std::size_t sites) {
    check_sites(sites);
    const auto dim = static_cast<Eigen::Index>(dimension(sites));
    return {Eigen::VectorXcd::Constant(dim, 1.0 / std::sqrt(static_cast<double>(dim))), sites};
}

Eigen::MatrixXd build_hamiltonian(const ChainSpec& chain, double s, double t) {
    const std::size_t L = chain.size();
    check_sites(L);
    const std::size_t dim = dimension(L);
    const double J = chain.bond(s);
    std::vector<double> gamma(L);
    chain.fields(s, t, gamma);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim),
                                              static_cast<Eigen::Index>(dim));
    for (std::size_t x = 0; x < dim; ++x) {
        const auto r = static_cast<Eigen::Index>(x);
        H(r, r) = -J * bond_sum(x, L);
        for (std::size_t i = 0; i < L; ++i) {
            H(r, static_cast<Eigen::Index>(x ^ (std::size_t{1} << i))) -= gamma[i];
        }
    }
    return H;
}

void apply_hamiltonian(const ChainSpec& chain, double s, double t, const Eigen::VectorXcd& in,
                       Eigen::VectorXcd& out) {
    const std::size_t L = chain.size();
    check_sites(L);
    const std::size_t dim = dimension(L);
    const double J = chain.bond(s);
    std::vector<double> gamma(L);
    chain.fields(s, t, gamma);
    out.resize(in.size());
    for (std::size_t x = 0; x < dim; ++x) {
        Complex acc = -J * bond_sum(x, L) * in(static_cast<Eigen::Index>(x));
        for (std::size_t i = 0; i < L; ++i) {
            acc -= gamma[i] * in(static_cast<Eigen::Index>(x ^ (std::size_t{1} << i)));
        }
        out(static_cast<Eigen::Index>(x)) = acc;
    }
}

Eigenpair ground_state(const ChainSpec& chain, double s, double t) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(build_hamiltonian(chain, s, t));
    if (solver.info() != Eigen::Success) throw Error("dense eigensolver failed");
    Eigenpair pair;
    pair.energy = solver.eigenvalues()(0);
    pair.state.sites = chain.size();
    pair.state.amplitudes = solver.eigenvectors().col(0).cast<Complex>();
    return pair;
}

Eigen::VectorXd spectrum(const ChainSpec& chain, double s, double t, std::size_t count) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(build_hamiltonian(chain, s, t),
                                                          Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw Error("dense eigensolver failed");
    const auto n = std::min<Eigen::Index>(static_cast<Eigen::Index>(count),
                                          solver.eigenvalues().size());
    return solver.eigenvalues().head(n);
}

double energy(const DenseState& state, const ChainSpec& chain, double s, double t) {
    Eigen::VectorXcd h;
    apply_hamiltonian(chain, s, t, state.amplitudes, h);
    return state.amplitudes.dot(h).real();
}

double energy_variance(const DenseState& state, const ChainSpec& chain, double s, double t) {
    Eigen::VectorXcd h;
    apply_hamiltonian(chain, s, t, state.amplitudes, h);
    const double mean = state.amplitudes.dot(h).real();
    return h.squaredNorm() - mean * mean;
}

StepperOptions default_exact_stepper() {
    StepperOptions options;
    options.rtol = 1e-11;
    options.atol = 1e-13;
    return options;
}

namespace {

// d psi / dt = -i H psi on interleaved (re, im) storage.
class Schrodinger {
  public:
    Schrodinger(const ChainSpec& chain, double T)
            : chain_(chain), T_(T), bonds_(bond_sums(chain.size())), gamma_(chain.size()) {}

    void operator()(double t, std::span<const double> y, std::span<double> dydt) {
        const std::size_t L = chain_.size();
        const double s = chain_.schedule().progress(t, T_);
        const double J = chain_.bond(s);
        chain_.fields(s, t, gamma_);
        const std::size_t dim = bonds_.size();
        for (std::size_t x = 0; x < dim; ++x) {
            double re = -J * bonds_[x] * y[2 * x];
            double im = -J * bonds_[x] * y[2 * x + 1];
            for (std::size_t i = 0; i < L; ++i) {
                const std::size_t z = x ^ (std::size_t{1} << i);
                re -= gamma_[i] * y[2 * z];
                im -= gamma_[i] * y[2 * z + 1];
            }
            // -i (re + i im) = im - i re
            dydt[2 * x] = im;
            dydt[2 * x + 1] = -re;
        }
    }

  private:
    const ChainSpec& chain_;
    double T_;
    std::vector<double> bonds_;
    std::vector<double> gamma_;
};

}  // namespace

DenseState evolve_exact_to(const DenseState& initial, const ChainSpec& chain, double T,
                           double t_end, const StepperOptions& stepper) {
    check_sites(chain.size());
    if (initial.sites != chain.size() ||
        static_cast<std::size_t>(initial.amplitudes.size()) != dimension(chain.size())) {
        throw ParameterError("state does not match the chain length");
    }
    if (!(T > 0.0)) throw ParameterError("annealing time must be positive");
    const std::size_t dim = dimension(chain.size());
    std::vector<double> y(2 * dim);
    for (std::size_t x = 0; x < dim; ++x) {
        y[2 * x] = initial.amplitudes(static_cast<Eigen::Index>(x)).real();
        y[2 * x + 1] = initial.amplitudes(static_cast<Eigen::Index>(x)).imag();
    }
    Schrodinger system(chain, T);
    DormandPrince<Schrodinger> integrator(y.size(), stepper);
    integrator.integrate(system, 0.0, t_end, y);
    DenseState out{Eigen::VectorXcd(static_cast<Eigen::Index>(dim)), chain.size()};
    for (std::size_t x = 0; x < dim; ++x) {
        out.amplitudes(static_cast<Eigen::Index>(x)) = Complex(y[2 * x], y[2 * x + 1]);
    }
    return out;
}

DenseState evolve_exact(const DenseState& initial, const ChainSpec& chain, double T,
                        const StepperOptions& stepper) {
    return evolve_exact_to(initial, chain, T, T, stepper);
}

ClassicalStats classical_stats(const DenseState& state) {
    const std::size_t L = state.sites;
    ClassicalStats stats;
    for (Eigen::Index x = 0; x < state.amplitudes.size(); ++x) {
        const double w = std::norm(state.amplitudes(x));
        if (w == 0.0) continue;
        const auto basis = static_cast<std::size_t>(x);
        stats.residual_energy += w * (static_cast<double>(L - 1) - bond_sum(basis, L));
        double m = 0.0;
        for (std::size_t i = 0; i < L; ++i) m += spin(basis, i);
        stats.magnetization_deficit += w * (static_cast<double>(L) - std::abs(m));
    }
    return stats;
}

CorrelationPair correlators(const DenseState& state) {
    const std::size_t L = state.sites;
    const auto Li = static_cast<Eigen::Index>(L);
    std::vector<Eigen::VectorXcd> lowered(L);
    for (std::size_t i = 0; i < L; ++i) lowered[i] = annihilate(state.amplitudes, i);
    CorrelationPair corr{ComplexMatrix(Li, Li), ComplexMatrix(Li, Li)};
    for (std::size_t i = 0; i < L; ++i) {
        for (std::size_t j = 0; j < L; ++j) {
            const auto r = static_cast<Eigen::Index>(i);
            const auto c = static_cast<Eigen::Index>(j);
            corr.G(r, c) = lowered[i].dot(lowered[j]);
            corr.F(r, c) = state.amplitudes.dot(annihilate(lowered[j], i));
        }
    }
    return corr;
}

}  // namespace annealscale::ed
