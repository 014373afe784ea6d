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

#include "annealscale/scalefit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/LU>

namespace annealscale {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double nan_value = std::numeric_limits<double>::quiet_NaN();

// Fills residuals r and, when J is given, the Jacobian dr/dtheta.
using Model = std::function<void(const VectorXd& theta, VectorXd& r, MatrixXd* J)>;

struct LmResult {
    VectorXd theta;
    MatrixXd log_covariance;
    double chi2 = 0.0;
    int iterations = 0;
    bool converged = false;
};

// A parameter whose column is identically zero (a term that cannot be seen in
// the data) is held fixed and reported with an infinite variance.
LmResult levenberg_marquardt(VectorXd theta, std::size_t n_residuals, const Model& model,
                             const FitOptions& options,
                             const std::function<std::vector<bool>(const VectorXd&)>& frozen_of) {
    const Eigen::Index p = theta.size();
    VectorXd r(n_residuals), r_trial(n_residuals);
    MatrixXd J(n_residuals, p);
    model(theta, r, &J);
    double chi2 = r.squaredNorm();
    double mu = 1e-3;
    LmResult out;
    std::vector<bool> frozen = frozen_of(theta);

    for (out.iterations = 0; out.iterations < options.max_iterations; ++out.iterations) {
        for (Eigen::Index j = 0; j < p; ++j) {
            if (frozen[j]) J.col(j).setZero();
        }
        const MatrixXd A = J.transpose() * J;
        const VectorXd g = J.transpose() * r;
        bool accepted = false;
        VectorXd delta;
        while (!accepted) {
            MatrixXd M = A;
            for (Eigen::Index j = 0; j < p; ++j) {
                M(j, j) = frozen[j] ? 1.0 : A(j, j) * (1.0 + mu);
                if (!frozen[j] && A(j, j) == 0.0) M(j, j) = mu;
            }
            delta = M.ldlt().solve(-g);
            for (Eigen::Index j = 0; j < p; ++j) {
                if (frozen[j]) delta(j) = 0.0;
            }
            const VectorXd trial = theta + delta;
            model(trial, r_trial, nullptr);
            const double chi2_trial = r_trial.squaredNorm();
            if (std::isfinite(chi2_trial) && chi2_trial <= chi2) {
                theta = trial;
                chi2 = chi2_trial;
                mu = std::max(mu / 3.0, 1e-12);
                accepted = true;
            } else {
                mu *= 4.0;
                if (mu > 1e16) break;
            }
        }
        if (!accepted) {
            // no representable improvement is left
            out.converged = true;
            break;
        }
        model(theta, r, &J);
        frozen = frozen_of(theta);
        if (delta.cwiseAbs().maxCoeff() < options.tolerance) {
            out.converged = true;
            ++out.iterations;
            break;
        }
    }

    out.theta = theta;
    out.chi2 = chi2;
    out.log_covariance = MatrixXd::Constant(p, p, nan_value);
    std::vector<Eigen::Index> active;
    for (Eigen::Index j = 0; j < p; ++j) {
        if (!frozen[j]) active.push_back(j);
    }
    if (!active.empty()) {
        const auto k = static_cast<Eigen::Index>(active.size());
        MatrixXd A(k, k);
        for (Eigen::Index i = 0; i < k; ++i) {
            for (Eigen::Index j = 0; j < k; ++j) {
                A(i, j) = J.col(active[i]).dot(J.col(active[j]));
            }
        }
        Eigen::FullPivLU<MatrixXd> lu(A);
        const MatrixXd inv = lu.isInvertible() ? MatrixXd(lu.inverse())
                                               : MatrixXd::Constant(k, k, nan_value);
        for (Eigen::Index i = 0; i < k; ++i) {
            for (Eigen::Index j = 0; j < k; ++j) out.log_covariance(active[i], active[j]) = inv(i, j);
        }
    }
    for (Eigen::Index j = 0; j < p; ++j) {
        if (frozen[j]) out.log_covariance(j, j) = std::numeric_limits<double>::infinity();
    }
    return out;
}

// least-squares slope of log f against log v
double log_slope(std::span<const FitPoint> pts) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(pts.size());
    for (const auto& p : pts) {
        const double x = std::log(p.v), y = std::log(p.f);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double den = n * sxx - sx * sx;
    return den > 0.0 ? (n * sxy - sx * sy) / den : 0.0;
}

std::vector<FitPoint> sorted_by_v(std::span<const FitPoint> points) {
    std::vector<FitPoint> s(points.begin(), points.end());
    std::sort(s.begin(), s.end(), [](const FitPoint& x, const FitPoint& y) { return x.v < y.v; });
    return s;
}

void check_points(std::span<const FitPoint> points) {
    if (points.size() < 5) throw ParameterError("a two-power-law fit needs at least 5 points");
    for (const auto& p : points) {
        if (!(p.v > 0.0) || !std::isfinite(p.v)) throw ParameterError("velocities must be positive");
        if (!(p.f > 0.0) || !std::isfinite(p.f)) throw ParameterError("values must be positive");
        if (!(p.sigma > 0.0) || !std::isfinite(p.sigma)) {
            throw ParameterError("error bars must be positive");
        }
    }
}

}  // namespace

double PowerLawFit::chi2_per_dof() const {
    return dof ? chi2 / static_cast<double>(dof) : nan_value;
}

double PowerLawFit::alpha_error() const { return std::sqrt(covariance(0, 0)); }
double PowerLawFit::beta_error() const { return std::sqrt(covariance(1, 1)); }

double PowerLawFit::a_error(std::size_t i) const {
    const auto k = static_cast<Eigen::Index>(2 + 2 * i);
    return std::sqrt(covariance(k, k));
}

double PowerLawFit::b_error(std::size_t i) const {
    const auto k = static_cast<Eigen::Index>(3 + 2 * i);
    return std::sqrt(covariance(k, k));
}

double PowerLawFit::evaluate(std::size_t i, double v) const {
    return a.at(i) * std::pow(v, alpha) + b.at(i) * std::pow(v, -beta);
}

std::size_t PowerLawFit::dataset_of(std::size_t L) const {
    const auto it = std::find(sizes.begin(), sizes.end(), L);
    if (it == sizes.end()) throw ParameterError("size " + std::to_string(L) + " was not fitted");
    return static_cast<std::size_t>(it - sizes.begin());
}

PowerLawFit fit_global(const std::vector<std::vector<FitPoint>>& datasets,
                       std::vector<std::size_t> sizes, const FitOptions& options) {
    if (datasets.empty()) throw ParameterError("no datasets to fit");
    if (sizes.size() != datasets.size()) throw ParameterError("one size label per dataset");
    const std::size_t m = datasets.size();
    std::size_t n = 0;
    for (const auto& d : datasets) {
        check_points(d);
        n += d.size();
    }

    // starting point: end slopes, then prefactors matched at the end points
    double alpha0 = 0.0, beta0 = 0.0;
    for (const auto& d : datasets) {
        const auto s = sorted_by_v(d);
        const std::span<const FitPoint> all(s);
        const double hi = log_slope(all.last(3));
        const double lo = -log_slope(all.first(3));
        alpha0 += (hi > 0.05 ? hi : 0.5) / static_cast<double>(m);
        beta0 += (lo > 0.05 ? lo : 1.0) / static_cast<double>(m);
    }
    VectorXd theta(static_cast<Eigen::Index>(2 + 2 * m));
    theta(0) = std::log(alpha0);
    theta(1) = std::log(beta0);
    for (std::size_t i = 0; i < m; ++i) {
        const auto s = sorted_by_v(datasets[i]);
        double a0 = s.back().f / std::pow(s.back().v, alpha0);
        double b0 = s.front().f * std::pow(s.front().v, beta0);
        // refine with the linear least-squares prefactors when they are positive
        double s11 = 0, s12 = 0, s22 = 0, t1 = 0, t2 = 0;
        for (const auto& p : s) {
            const double w = 1.0 / (p.sigma * p.sigma);
            const double x1 = std::pow(p.v, alpha0), x2 = std::pow(p.v, -beta0);
            s11 += w * x1 * x1;
            s12 += w * x1 * x2;
            s22 += w * x2 * x2;
            t1 += w * x1 * p.f;
            t2 += w * x2 * p.f;
        }
        const double det = s11 * s22 - s12 * s12;
        if (det > 0.0) {
            const double a1 = (s22 * t1 - s12 * t2) / det;
            const double b1 = (s11 * t2 - s12 * t1) / det;
            if (a1 > 0.0 && b1 > 0.0) {
                a0 = a1;
                b0 = b1;
            }
        }
        theta(static_cast<Eigen::Index>(2 + 2 * i)) = std::log(a0);
        theta(static_cast<Eigen::Index>(3 + 2 * i)) = std::log(b0);
    }

    const Model model = [&](const VectorXd& th, VectorXd& r, MatrixXd* J) {
        const double alpha = std::exp(th(0)), beta = std::exp(th(1));
        if (J) J->setZero();
        Eigen::Index row = 0;
        for (std::size_t i = 0; i < m; ++i) {
            const auto ka = static_cast<Eigen::Index>(2 + 2 * i), kb = ka + 1;
            const double a = std::exp(th(ka)), b = std::exp(th(kb));
            for (const auto& p : datasets[i]) {
                const double lv = std::log(p.v);
                const double ta = a * std::exp(alpha * lv);
                const double tb = b * std::exp(-beta * lv);
                r(row) = (ta + tb - p.f) / p.sigma;
                if (J) {
                    (*J)(row, 0) = alpha * ta * lv / p.sigma;
                    (*J)(row, 1) = -beta * tb * lv / p.sigma;
                    (*J)(row, ka) = ta / p.sigma;
                    (*J)(row, kb) = tb / p.sigma;
                }
                ++row;
            }
        }
    };
    // a prefactor whose term stays below 1e-6 error bars everywhere is unidentifiable
    const auto frozen_of = [&](const VectorXd& th) {
        std::vector<bool> frozen(static_cast<std::size_t>(th.size()), false);
        const double alpha = std::exp(th(0)), beta = std::exp(th(1));
        bool beta_seen = false, alpha_seen = false;
        for (std::size_t i = 0; i < m; ++i) {
            const auto ka = static_cast<Eigen::Index>(2 + 2 * i), kb = ka + 1;
            double ma = 0.0, mb = 0.0;
            for (const auto& p : datasets[i]) {
                ma = std::max(ma, std::exp(th(ka)) * std::pow(p.v, alpha) / p.sigma);
                mb = std::max(mb, std::exp(th(kb)) * std::pow(p.v, -beta) / p.sigma);
            }
            frozen[static_cast<std::size_t>(ka)] = ma < 1e-6;
            frozen[static_cast<std::size_t>(kb)] = mb < 1e-6;
            alpha_seen = alpha_seen || ma >= 1e-6;
            beta_seen = beta_seen || mb >= 1e-6;
        }
        frozen[0] = !alpha_seen;
        frozen[1] = !beta_seen;
        return frozen;
    };

    const LmResult lm = levenberg_marquardt(theta, n, model, options, frozen_of);

    PowerLawFit fit;
    fit.sizes = std::move(sizes);
    fit.alpha = std::exp(lm.theta(0));
    fit.beta = std::exp(lm.theta(1));
    for (std::size_t i = 0; i < m; ++i) {
        fit.a.push_back(std::exp(lm.theta(static_cast<Eigen::Index>(2 + 2 * i))));
        fit.b.push_back(std::exp(lm.theta(static_cast<Eigen::Index>(3 + 2 * i))));
    }
    fit.log_covariance = lm.log_covariance;
    const VectorXd natural = lm.theta.array().exp();
    fit.covariance = natural.asDiagonal() * lm.log_covariance * natural.asDiagonal();
    fit.chi2 = lm.chi2;
    const auto frozen = frozen_of(lm.theta);
    const auto active = static_cast<std::size_t>(std::count(frozen.begin(), frozen.end(), false));
    fit.dof = n > active ? n - active : 0;
    fit.iterations = lm.iterations;

    for (std::size_t k = 0; k < frozen.size(); ++k) {
        if (!frozen[k]) continue;
        static const char* names[] = {"alpha", "beta"};
        std::ostringstream msg;
        msg << "degenerate fit: ";
        if (k < 2) {
            msg << names[k] << " is not constrained by the data";
        } else {
            msg << (k % 2 == 0 ? "a" : "b") << " term of size " << fit.sizes[(k - 2) / 2]
                << " is negligible at every point";
        }
        fit.warnings.push_back(msg.str());
    }
    for (std::size_t i = 0; i < m; ++i) {
        const auto s = sorted_by_v(datasets[i]);
        if (!(fit.a[i] > 0 && fit.b[i] > 0 && std::isfinite(fit.a[i]) && std::isfinite(fit.b[i]))) {
            std::ostringstream msg;
            msg << "no interior minimum for size " << fit.sizes[i] << ": a=" << fit.a[i]
                << ", b=" << fit.b[i];
            fit.warnings.push_back(msg.str());
            continue;
        }
        const double v_min = optimum(fit.a[i], fit.b[i], fit.alpha, fit.beta).v_min;
        if (!(v_min > s.front().v && v_min < s.back().v)) {
            std::ostringstream msg;
            msg << "no interior minimum for size " << fit.sizes[i] << ": v_min=" << v_min
                << " lies outside [" << s.front().v << ", " << s.back().v << "]";
            fit.warnings.push_back(msg.str());
        }
    }
    if (fit.dof > 0 && fit.chi2_per_dof() > options.chi2_warning) {
        std::ostringstream msg;
        msg << "chi-square per degree of freedom is " << fit.chi2_per_dof() << " (above "
            << options.chi2_warning << ")";
        fit.warnings.push_back(msg.str());
    }
    if (!lm.converged) {
        std::ostringstream msg;
        msg << "fit did not converge in " << options.max_iterations << " iterations";
        throw FitError(msg.str(), std::move(fit));
    }
    return fit;
}

PowerLawFit fit_single(std::span<const FitPoint> points, const FitOptions& options) {
    return fit_global({std::vector<FitPoint>(points.begin(), points.end())}, {0}, options);
}

Optimum optimum(double a, double b, double alpha, double beta) {
    if (!(a > 0.0 && b > 0.0 && alpha > 0.0 && beta > 0.0)) {
        throw ParameterError("optimum needs positive a, b, alpha and beta");
    }
    Optimum o;
    o.v_min = std::pow(beta * b / (alpha * a), 1.0 / (alpha + beta));
    o.f_min = a * std::pow(o.v_min, alpha) + b * std::pow(o.v_min, -beta);
    return o;
}

Optimum optimum(const PowerLawFit& fit, std::size_t i) {
    Optimum o = optimum(fit.a.at(i), fit.b.at(i), fit.alpha, fit.beta);
    const double alpha = fit.alpha, beta = fit.beta, s = alpha + beta;
    const double lv = std::log(o.v_min);
    const double ta = fit.a[i] * std::pow(o.v_min, alpha);
    const double tb = fit.b[i] * std::pow(o.v_min, -beta);
    // gradients with respect to (log alpha, log beta, log a_i, log b_i)
    const std::array<Eigen::Index, 4> k{0, 1, static_cast<Eigen::Index>(2 + 2 * i),
                                        static_cast<Eigen::Index>(3 + 2 * i)};
    const std::array<double, 4> dlogv{-(1.0 + alpha * lv) / s, (1.0 - beta * lv) / s, -1.0 / s,
                                      1.0 / s};
    const std::array<double, 4> df{alpha * ta * lv, -beta * tb * lv, ta, tb};
    double var_lv = 0.0, var_f = 0.0;
    for (int x = 0; x < 4; ++x) {
        for (int y = 0; y < 4; ++y) {
            const double c = fit.log_covariance(k[x], k[y]);
            var_lv += dlogv[x] * c * dlogv[y];
            var_f += df[x] * c * df[y];
        }
    }
    o.v_min_error = o.v_min * std::sqrt(var_lv);
    o.f_min_error = std::sqrt(var_f);
    return o;
}

double master_curve(double u, double alpha, double beta) {
    return (beta * std::pow(u, alpha) + alpha * std::pow(u, -beta)) / (alpha + beta);
}

std::vector<RescaledPoint> rescale(std::span<const FitPoint> points, double v_min, double f_min) {
    if (!(v_min > 0.0 && f_min > 0.0)) throw ParameterError("rescaling needs positive v_min, f_min");
    std::vector<RescaledPoint> out;
    out.reserve(points.size());
    for (const auto& p : points) out.push_back({p.v / v_min, p.f / f_min, p.sigma / f_min});
    return out;
}

MasterFit fit_master(std::span<const RescaledPoint> points, const FitOptions& options) {
    if (points.size() < 3) throw ParameterError("a master-curve fit needs at least 3 points");
    for (const auto& p : points) {
        if (!(p.u > 0.0) || !(p.sigma > 0.0)) {
            throw ParameterError("rescaled points need positive u and sigma");
        }
    }
    std::vector<FitPoint> as_fit;
    for (const auto& p : points) as_fit.push_back({p.u, p.g, p.sigma});
    const auto s = sorted_by_v(as_fit);
    const std::span<const FitPoint> all(s);
    const std::size_t ends = std::min<std::size_t>(3, s.size());
    const double hi = log_slope(all.last(ends));
    const double lo = -log_slope(all.first(ends));
    VectorXd theta(2);
    theta << std::log(hi > 0.05 ? hi : 0.5), std::log(lo > 0.05 ? lo : 1.0);

    const Model model = [&](const VectorXd& th, VectorXd& r, MatrixXd* J) {
        const double alpha = std::exp(th(0)), beta = std::exp(th(1)), sum = alpha + beta;
        for (std::size_t i = 0; i < points.size(); ++i) {
            const auto& p = points[i];
            const double lu = std::log(p.u);
            const double ua = std::exp(alpha * lu), ub = std::exp(-beta * lu);
            const double g = (beta * ua + alpha * ub) / sum;
            const auto row = static_cast<Eigen::Index>(i);
            r(row) = (g - p.g) / p.sigma;
            if (J) {
                const double dga = ((beta * ua * lu + ub) - g) / sum;
                const double dgb = ((ua - alpha * ub * lu) - g) / sum;
                (*J)(row, 0) = alpha * dga / p.sigma;
                (*J)(row, 1) = beta * dgb / p.sigma;
            }
        }
    };
    const auto none_frozen = [](const VectorXd& th) {
        return std::vector<bool>(static_cast<std::size_t>(th.size()), false);
    };
    const LmResult lm = levenberg_marquardt(theta, points.size(), model, options, none_frozen);
    MasterFit fit;
    fit.alpha = std::exp(lm.theta(0));
    fit.beta = std::exp(lm.theta(1));
    fit.alpha_error = fit.alpha * std::sqrt(lm.log_covariance(0, 0));
    fit.beta_error = fit.beta * std::sqrt(lm.log_covariance(1, 1));
    fit.chi2 = lm.chi2;
    fit.dof = points.size() - 2;
    fit.iterations = lm.iterations;
    if (!lm.converged) throw Error("master-curve fit did not converge");
    return fit;
}

CollapseResult collapse(const std::vector<std::vector<FitPoint>>& datasets,
                        std::vector<std::size_t> sizes, const FitOptions& options) {
    CollapseResult c;
    c.fit = fit_global(datasets, std::move(sizes), options);
    c.alpha = c.fit.alpha;
    c.beta = c.fit.beta;
    for (std::size_t i = 0; i < datasets.size(); ++i) {
        c.optima.push_back(optimum(c.fit, i));
        c.points.push_back(rescale(datasets[i], c.optima.back().v_min, c.optima.back().f_min));
    }
    return c;
}

PowerLawSlope prefactor_scaling(std::span<const double> sizes, std::span<const double> values,
                                std::span<const double> errors) {
    const std::size_t n = sizes.size();
    if (n < 3) throw ParameterError("prefactor scaling needs at least 3 sizes");
    if (values.size() != n || (!errors.empty() && errors.size() != n)) {
        throw ParameterError("sizes, values and errors must have equal length");
    }
    std::vector<double> x(n), y(n), w(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(sizes[i] > 0.0) || !(values[i] > 0.0)) {
            throw ParameterError("prefactor scaling needs positive sizes and values");
        }
        x[i] = std::log(sizes[i]);
        y[i] = std::log(values[i]);
        if (!errors.empty()) {
            if (!(errors[i] > 0.0)) throw ParameterError("prefactor errors must be positive");
            const double s = errors[i] / values[i];
            w[i] = 1.0 / (s * s);
        }
    }
    double sw = 0, sx = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sw += w[i];
        sx += w[i] * x[i];
        sy += w[i] * y[i];
    }
    const double xm = sx / sw, ym = sy / sw;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += w[i] * (x[i] - xm) * (x[i] - xm);
        sxy += w[i] * (x[i] - xm) * (y[i] - ym);
    }
    if (!(sxx > 0.0)) throw ParameterError("prefactor scaling needs at least two distinct sizes");
    PowerLawSlope out;
    out.exponent = sxy / sxx;
    out.log_prefactor = ym - out.exponent * xm;
    if (!errors.empty()) {
        out.error = std::sqrt(1.0 / sxx);
    } else {
        double rss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double e = y[i] - out.log_prefactor - out.exponent * x[i];
            rss += e * e;
        }
        out.error = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
    }
    return out;
}

void KzmInput::validate() const {
    if (!(d > 0.0 && z > 0.0 && nu > 0.0 && kappa >= 0.0)) {
        throw ParameterError("KZM input needs d, z, nu > 0 and kappa >= 0");
    }
}

double kzm_exponent(const KzmInput& in) {
    in.validate();
    return (in.d + in.kappa / in.nu) / (in.z + 1.0 / in.nu);
}

double lzm_exponent(double z) {
    if (!(z > 0.0)) throw ParameterError("z must be positive");
    return 1.0 / (2.0 * z);
}

std::vector<FitPoint> select_points(const CurveTable& table, std::size_t L, Observable observable,
                                    const PointSelection& sel) {
    std::vector<FitPoint> out;
    for (const auto& row : table.rows) {
        if (row.L != L || row.v < sel.v_lo || (sel.v_hi > 0.0 && row.v > sel.v_hi)) continue;
        double f = row.delta_e_mean, s = row.delta_e_stderr;
        if (observable == Observable::magnetization) {
            if (!row.delta_m_mean) throw ParameterError("table has no delta_m columns");
            f = *row.delta_m_mean;
            s = row.delta_m_stderr.value_or(nan_value);
        }
        if (!std::isfinite(f)) continue;
        if (observable == Observable::energy && sel.plateau_fraction &&
            f > *sel.plateau_fraction * static_cast<double>(L - 1)) {
            continue;
        }
        if (!(s > 0.0) || !std::isfinite(s)) {
            std::ostringstream msg;
            msg << "point L=" << L << " v=" << format_double(row.v)
                << " has no positive error bar and cannot be weighted";
            throw ParameterError(msg.str());
        }
        out.push_back({row.v, f, s});
    }
    std::sort(out.begin(), out.end(), [](const FitPoint& a, const FitPoint& b) { return a.v < b.v; });
    return out;
}

std::vector<std::size_t> table_sizes(const CurveTable& table) {
    std::set<std::size_t> s;
    for (const auto& row : table.rows) s.insert(row.L);
    return {s.begin(), s.end()};
}

}  // namespace annealscale
