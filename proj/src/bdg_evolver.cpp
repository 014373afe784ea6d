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
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "annealscale/bdg.hpp"
#include "annealscale/error.hpp"

namespace annealscale {

namespace {

namespace gauss {
const double r15 = std::sqrt(15.0);
const double c[3] = {0.5 - r15 / 10.0, 0.5, 0.5 + r15 / 10.0};
const double a[3][3] = {
        {5.0 / 36, 2.0 / 9 - r15 / 15, 5.0 / 36 - r15 / 30},
        {5.0 / 36 + r15 / 24, 2.0 / 9, 5.0 / 36 - r15 / 24},
        {5.0 / 36 + r15 / 30, 2.0 / 9 + r15 / 15, 5.0 / 36},
};
constexpr double b[3] = {5.0 / 18, 4.0 / 9, 5.0 / 18};
}  // namespace gauss

using Block = std::array<double, 9>;  // row-major 3x3

// Block LU of the stage system I - h (a (x) H) for one Gauss step. With the
// stages of Majorana row a grouped into x_a, the system is block tridiagonal
//
//   lower_a x_{a-1} + x_a + upper_a x_{a+1} = r_a.
//
// Every leading block minor is the same kind of system for a shorter open
// chain, hence nonsingular, so no pivoting across blocks is needed.
using detail::StageFactor;

Block multiply(const Block& x, const Block& y) {
    Block z{};
    for (int r = 0; r < 3; ++r)
        for (int k = 0; k < 3; ++k)
            for (int c = 0; c < 3; ++c) z[3 * r + c] += x[3 * r + k] * y[3 * k + c];
    return z;
}

Block inverse(const Block& m) {
    Block inv{
            m[4] * m[8] - m[5] * m[7], m[2] * m[7] - m[1] * m[8], m[1] * m[5] - m[2] * m[4],
            m[5] * m[6] - m[3] * m[8], m[0] * m[8] - m[2] * m[6], m[2] * m[3] - m[0] * m[5],
            m[3] * m[7] - m[4] * m[6], m[1] * m[6] - m[0] * m[7], m[0] * m[4] - m[1] * m[3],
    };
    const double det = m[0] * inv[0] + m[1] * inv[3] + m[2] * inv[6];
    if (!(std::abs(det) > 0.0) || !std::isfinite(det)) {
        throw Error("singular stage system in implicit step");
    }
    for (double& v : inv) v /= det;
    return inv;
}

void factor_stage_system(const double* const e[3], std::size_t n, double h, StageFactor& f) {
    f.upper.resize(n);
    f.mult.resize(n);
    f.pivot_inv.resize(n);
    Block pivot{1, 0, 0, 0, 1, 0, 0, 0, 1};
    for (std::size_t a = 0; a < n; ++a) {
        Block lower{};
        Block& upper = f.upper[a];
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                upper[3 * i + j] = a + 1 < n ? -h * gauss::a[i][j] * e[i][a] : 0.0;
                lower[3 * i + j] = a > 0 ? h * gauss::a[i][j] * e[i][a - 1] : 0.0;
            }
        }
        if (a > 0) {
            f.mult[a] = multiply(lower, f.pivot_inv[a - 1]);
            const Block fill = multiply(f.mult[a], f.upper[a - 1]);
            pivot = Block{1, 0, 0, 0, 1, 0, 0, 0, 1};
            for (int k = 0; k < 9; ++k) pivot[k] -= fill[k];
        } else {
            f.mult[a] = Block{};
        }
        f.pivot_inv[a] = inverse(pivot);
    }
}

// x -= m y for 3-row groups of B-wide panels.
template <std::size_t B>
inline void subtract_block(double* x, const Block& m, const double* y) {
    for (int r = 0; r < 3; ++r) {
        double* xr = x + r * B;
        const double m0 = m[3 * r], m1 = m[3 * r + 1], m2 = m[3 * r + 2];
        for (std::size_t j = 0; j < B; ++j) xr[j] -= m0 * y[j] + m1 * y[B + j] + m2 * y[2 * B + j];
    }
}

// One Gauss-Legendre step on a panel of B columns: out = y + h sum_i b_i K_i.
// `out` may alias `y`.
template <std::size_t B>
void gauss_panel(const double* const e[3], const StageFactor& f, std::size_t n, double h,
                 const double* y, double* out, double* K) {
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t i = 0; i < 3; ++i) {
            double* k = K + (3 * a + i) * B;
            const double up = a + 1 < n ? e[i][a] : 0.0;
            const double down = a > 0 ? e[i][a - 1] : 0.0;
            const double* yu = a + 1 < n ? y + (a + 1) * B : y;
            const double* yd = a > 0 ? y + (a - 1) * B : y;
            for (std::size_t j = 0; j < B; ++j) k[j] = up * yu[j] - down * yd[j];
        }
    }
    for (std::size_t a = 1; a < n; ++a) subtract_block<B>(K + 3 * a * B, f.mult[a], K + 3 * (a - 1) * B);
    double tmp[3 * B];
    for (std::size_t a = n; a-- > 0;) {
        double* x = K + 3 * a * B;
        if (a + 1 < n) subtract_block<B>(x, f.upper[a], K + 3 * (a + 1) * B);
        std::copy_n(x, 3 * B, tmp);
        const Block& p = f.pivot_inv[a];
        for (int r = 0; r < 3; ++r) {
            double* xr = x + r * B;
            const double m0 = p[3 * r], m1 = p[3 * r + 1], m2 = p[3 * r + 2];
            for (std::size_t j = 0; j < B; ++j) xr[j] = m0 * tmp[j] + m1 * tmp[B + j] + m2 * tmp[2 * B + j];
        }
    }
    const double w0 = h * gauss::b[0], w1 = h * gauss::b[1], w2 = h * gauss::b[2];
    for (std::size_t a = 0; a < n; ++a) {
        const double* k = K + 3 * a * B;
        const double* ya = y + a * B;
        double* oa = out + a * B;
        for (std::size_t j = 0; j < B; ++j) {
            oa[j] = ya[j] + w0 * k[j] + w1 * k[B + j] + w2 * k[2 * B + j];
        }
    }
}

// out = h y on a panel, h the antisymmetric tridiagonal generator.
template <std::size_t B>
void apply_panel(const double* e, std::size_t n, const double* y, double* out) {
    for (std::size_t a = 0; a < n; ++a) {
        const double up = a + 1 < n ? e[a] : 0.0;
        const double down = a > 0 ? e[a - 1] : 0.0;
        const double* yu = a + 1 < n ? y + (a + 1) * B : y;
        const double* yd = a > 0 ? y + (a - 1) * B : y;
        double* o = out + a * B;
        for (std::size_t j = 0; j < B; ++j) o[j] = up * yu[j] - down * yd[j];
    }
}

}  // namespace

BdgStepper default_bdg_stepper() {
    BdgStepper stepper;
    stepper.options.rtol = 1e-8;
    stepper.options.atol = 1e-10;
    return stepper;
}

BdgMethod parse_bdg_method(const std::string& name) {
    if (name == "gauss-legendre") return BdgMethod::gauss_legendre;
    if (name == "dormand-prince") return BdgMethod::dormand_prince;
    throw ParameterError("unknown integration method '" + name +
                         "' (expected gauss-legendre or dormand-prince)");
}

const char* to_string(BdgMethod method) {
    return method == BdgMethod::gauss_legendre ? "gauss-legendre" : "dormand-prince";
}

BdgModes evolve(const BdgModes& modes, const ChainSpec& chain, double T,
                const BdgStepper& stepper) {
    BdgEvolver evolver(modes, chain, T, stepper);
    evolver.advance_to(T);
    return evolver.modes();
}

BdgEvolver::BdgEvolver(const BdgModes& initial, const ChainSpec& chain, double T,
                       const BdgStepper& stepper)
        : chain_(&chain), T_(T), stepper_(stepper), n_(2 * chain.size()) {
    stepper_.options.validate();
    const std::size_t L = chain.size();
    if (initial.size() != L || static_cast<std::size_t>(initial.U.cols()) != L ||
        static_cast<std::size_t>(initial.V.rows()) != L ||
        static_cast<std::size_t>(initial.V.cols()) != L) {
        throw ParameterError("mode matrices do not match the chain length");
    }
    if (!(T > 0.0) || !std::isfinite(T)) throw ParameterError("annealing time must be positive");

    blocks_ = (2 * L + block - 1) / block;
    const std::size_t panel = n_ * block;
    y_.assign(blocks_ * panel, 0.0);
    y_full_.assign(blocks_ * panel, 0.0);
    y_half_.assign(blocks_ * panel, 0.0);
    coeff_.assign(9 * n_, 0.0);
    work_.assign(std::max<std::size_t>(3 * n_, 8 * n_) * block, 0.0);

    // Y_{2i,k} = U_ik + V_ik,  Y_{2i+1,k} = -i (U_ik - V_ik)
    const std::complex<double> minus_i(0.0, -1.0);
    for (std::size_t k = 0; k < L; ++k) {
        for (std::size_t i = 0; i < L; ++i) {
            const auto u = initial.U(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
            const auto v = initial.V(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
            const auto even = u + v;
            const auto odd = minus_i * (u - v);
            at(y_, 2 * i, k) = even.real();
            at(y_, 2 * i, L + k) = even.imag();
            at(y_, 2 * i + 1, k) = odd.real();
            at(y_, 2 * i + 1, L + k) = odd.imag();
        }
    }
    h_ = stepper_.options.initial_step > 0.0
                 ? stepper_.options.initial_step
                 : (stepper_.method == BdgMethod::gauss_legendre ? 0.1 : 0.01);
}

double& BdgEvolver::at(std::vector<double>& y, std::size_t row, std::size_t col) const {
    return y[(col / block) * n_ * block + row * block + col % block];
}

double BdgEvolver::at(const std::vector<double>& y, std::size_t row, std::size_t col) const {
    return y[(col / block) * n_ * block + row * block + col % block];
}

void BdgEvolver::superdiagonal(double t, double* out) const {
    const std::size_t L = chain_->size();
    const double s = chain_->schedule().progress(t, T_);
    const double twoJ = 2.0 * chain_->bond(s);
    const double base = chain_->schedule().field(s);
    const double lambda = chain_->coupling();
    for (std::size_t i = 0; i < L; ++i) {
        const auto& signal = chain_->noise(i);
        out[2 * i] = 2.0 * (signal ? base + lambda * (*signal)(t) : base);
        out[2 * i + 1] = twoJ;
    }
    out[n_ - 1] = 0.0;
}

double BdgEvolver::gauss_attempt(double h) {
    const std::size_t n = n_;
    const double* e[3][3];
    const double starts[3] = {t_, t_, t_ + 0.5 * h};
    const double lengths[3] = {h, 0.5 * h, 0.5 * h};
    for (std::size_t step = 0; step < 3; ++step) {
        for (std::size_t i = 0; i < 3; ++i) {
            double* out = &coeff_[(3 * step + i) * n];
            superdiagonal(starts[step] + gauss::c[i] * lengths[step], out);
            e[step][i] = out;
        }
        factor_stage_system(e[step], n, lengths[step], factors_[step]);
    }
    stats_.evaluations += 9;

    const std::size_t panel = n * block;
    const double rtol = stepper_.options.rtol;
    const double atol = stepper_.options.atol;
    double sum = 0.0;
    for (std::size_t p = 0; p < blocks_; ++p) {
        const double* y = &y_[p * panel];
        double* full = &y_full_[p * panel];
        double* half = &y_half_[p * panel];
        gauss_panel<block>(e[0], factors_[0], n, h, y, full, work_.data());
        gauss_panel<block>(e[1], factors_[1], n, 0.5 * h, y, half, work_.data());
        gauss_panel<block>(e[2], factors_[2], n, 0.5 * h, half, half, work_.data());
        for (std::size_t k = 0; k < panel; ++k) {
            const double delta = (half[k] - full[k]) / 63.0;
            const double scale = atol + rtol * std::max(std::abs(y[k]), std::abs(half[k]));
            const double r = delta / scale;
            sum += r * r;
        }
    }
    return std::sqrt(sum / static_cast<double>(n * 2 * chain_->size()));
}

double BdgEvolver::dopri_attempt(double h) {
    namespace dp = dopri5;
    const std::size_t n = n_;
    double* e[7];
    for (std::size_t s = 0; s < 6; ++s) {
        e[s] = &coeff_[s * n];
        superdiagonal(t_ + dp::c[s] * h, e[s]);
    }
    e[6] = e[5];
    stats_.evaluations += 6;

    constexpr std::size_t B = block;
    const std::size_t panel = n * B;
    double* k[7];
    for (std::size_t s = 0; s < 7; ++s) k[s] = &work_[s * panel];
    double* tmp = &work_[7 * panel];
    const double rtol = stepper_.options.rtol;
    const double atol = stepper_.options.atol;
    double sum = 0.0;
    for (std::size_t p = 0; p < blocks_; ++p) {
        const double* y = &y_[p * panel];
        double* y1 = &y_full_[p * panel];
        apply_panel<B>(e[0], n, y, k[0]);
        for (std::size_t s = 1; s < 7; ++s) {
            double* target = s == 6 ? y1 : tmp;
            for (std::size_t x = 0; x < panel; ++x) {
                double acc = 0.0;
                for (std::size_t j = 0; j < s; ++j) acc += dp::a[s][j] * k[j][x];
                target[x] = y[x] + h * acc;
            }
            apply_panel<B>(e[s], n, target, k[s]);
        }
        for (std::size_t x = 0; x < panel; ++x) {
            double delta = 0.0;
            for (std::size_t j = 0; j < 7; ++j) delta += dp::e[j] * k[j][x];
            const double scale = atol + rtol * std::max(std::abs(y[x]), std::abs(y1[x]));
            const double r = h * delta / scale;
            sum += r * r;
        }
    }
    return std::sqrt(sum / static_cast<double>(n * 2 * chain_->size()));
}

void BdgEvolver::advance_to(double t_end) {
    const auto& options = stepper_.options;
    const bool implicit = stepper_.method == BdgMethod::gauss_legendre;
    while (t_ < t_end) {
        if (options.max_steps && stats_.accepted + stats_.rejected >= options.max_steps) {
            std::ostringstream msg;
            msg << "step budget exhausted at t=" << t_;
            throw IntegrationError(msg.str(), t_, last_error_);
        }
        if (options.max_step > 0.0) h_ = std::min(h_, options.max_step);
        double h = h_;
        bool last = false;
        if (t_ + 1.01 * h >= t_end) {
            h = t_end - t_;
            last = true;
        }
        if (h < options.min_step * std::max(1.0, std::abs(t_))) {
            throw_step_underflow(t_, h, last_error_);
        }

        const double err = implicit ? gauss_attempt(h) : dopri_attempt(h);
        last_error_ = err;
        double proposal = h;
        bool accepted;
        if (implicit) {
            // order-6 local error estimated by step doubling
            double fac = 5.0;
            if (!std::isfinite(err)) {
                fac = 0.1;
            } else if (err > 0.0) {
                fac = std::clamp(0.9 * std::pow(err, -1.0 / 7.0), 0.2, 5.0);
            }
            accepted = std::isfinite(err) && err <= 1.0;
            if (accepted && rejected_last_) fac = std::min(fac, 1.0);
            proposal = h * fac;
            rejected_last_ = !accepted;
        } else {
            accepted = dopri_control_.judge(err, proposal);
        }

        if (accepted) {
            ++stats_.accepted;
            t_ = last ? t_end : t_ + h;
            y_.swap(implicit ? y_half_ : y_full_);
            if (!last || proposal < h_) h_ = proposal;
        } else {
            ++stats_.rejected;
            h_ = proposal;
        }
    }
}

BdgModes BdgEvolver::modes() const {
    const std::size_t L = chain_->size();
    const auto Li = static_cast<Eigen::Index>(L);
    BdgModes out{ComplexMatrix(Li, Li), ComplexMatrix(Li, Li)};
    const std::complex<double> I(0.0, 1.0);
    for (std::size_t k = 0; k < L; ++k) {
        for (std::size_t i = 0; i < L; ++i) {
            const std::complex<double> even(at(y_, 2 * i, k), at(y_, 2 * i, L + k));
            const std::complex<double> odd(at(y_, 2 * i + 1, k), at(y_, 2 * i + 1, L + k));
            const auto r = static_cast<Eigen::Index>(i);
            const auto c = static_cast<Eigen::Index>(k);
            out.U(r, c) = 0.5 * (even + I * odd);
            out.V(r, c) = 0.5 * (even - I * odd);
        }
    }
    return out;
}

std::vector<double> BdgEvolver::bond_correlations() const {
    const std::size_t L = chain_->size();
    std::vector<double> zz(L - 1, 0.0);
    // <sz_i sz_{i+1}> = Im (Y Y^+)_{2i+1, 2i+2}
    for (std::size_t i = 0; i + 1 < L; ++i) {
        const std::size_t a = 2 * i + 1;
        const std::size_t b = 2 * i + 2;
        double acc = 0.0;
        for (std::size_t k = 0; k < L; ++k) {
            acc += at(y_, a, L + k) * at(y_, b, k) - at(y_, a, k) * at(y_, b, L + k);
        }
        zz[i] = acc;
    }
    return zz;
}

double BdgEvolver::residual_energy() const {
    double total = 0.0;
    for (double zz : bond_correlations()) total += 1.0 - zz;
    if (total < 0.0 && total >= -1e-8) total = 0.0;
    return total;
}

}  // namespace annealscale
