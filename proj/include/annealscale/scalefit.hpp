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

// Two-power-law fits  f(v) = a_L v^alpha + b_L v^-beta,  their optima, the
// rescaled master curve and exponent predictions.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "annealscale/error.hpp"
#include "annealscale/table.hpp"

namespace annealscale {

struct FitPoint {
    double v = 0.0;
    double f = 0.0;
    double sigma = 1.0;
};

struct FitOptions {
    int max_iterations = 500;
    double tolerance = 1e-8;      // largest relative parameter change at convergence
    double chi2_warning = 10.0;   // chi-square per dof above which a warning is raised
};

/// Parameters are ordered (alpha, beta, a_0, b_0, a_1, b_1, ...).
struct PowerLawFit {
    std::vector<std::size_t> sizes;  // one label per dataset
    double alpha = 0.0;
    double beta = 0.0;
    std::vector<double> a;
    std::vector<double> b;
    Eigen::MatrixXd covariance;      // natural parameters
    Eigen::MatrixXd log_covariance;  // log parameters, as fitted
    double chi2 = 0.0;
    std::size_t dof = 0;
    int iterations = 0;
    std::vector<std::string> warnings;

    double chi2_per_dof() const;
    double alpha_error() const;
    double beta_error() const;
    double a_error(std::size_t dataset) const;
    double b_error(std::size_t dataset) const;
    double evaluate(std::size_t dataset, double v) const;
    std::size_t dataset_of(std::size_t L) const;
};

/// Raised when the iteration limit is hit; carries the best iterate.
class FitError : public Error {
  public:
    FitError(const std::string& what, PowerLawFit best) : Error(what), best_(std::move(best)) {}
    const PowerLawFit& best() const { return best_; }

  private:
    PowerLawFit best_;
};

PowerLawFit fit_single(std::span<const FitPoint> points, const FitOptions& options = {});

/// Shared (alpha, beta), one (a_L, b_L) per dataset.
PowerLawFit fit_global(const std::vector<std::vector<FitPoint>>& datasets,
                       std::vector<std::size_t> sizes, const FitOptions& options = {});

struct Optimum {
    double v_min = 0.0;
    double f_min = 0.0;
    double v_min_error = 0.0;  // first-order propagation from the covariance
    double f_min_error = 0.0;
};

Optimum optimum(double a, double b, double alpha, double beta);
Optimum optimum(const PowerLawFit& fit, std::size_t dataset);

/// g(u) = (beta u^alpha + alpha u^-beta) / (alpha + beta).
double master_curve(double u, double alpha, double beta);

struct RescaledPoint {
    double u = 0.0;
    double g = 0.0;
    double sigma = 0.0;
};

std::vector<RescaledPoint> rescale(std::span<const FitPoint> points, double v_min, double f_min);

struct MasterFit {
    double alpha = 0.0;
    double beta = 0.0;
    double alpha_error = 0.0;
    double beta_error = 0.0;
    double chi2 = 0.0;
    std::size_t dof = 0;
    int iterations = 0;
};

/// Fits (alpha, beta) of the master curve to rescaled points.
MasterFit fit_master(std::span<const RescaledPoint> points, const FitOptions& options = {});

struct CollapseResult {
    PowerLawFit fit;
    std::vector<Optimum> optima;                     // per dataset
    std::vector<std::vector<RescaledPoint>> points;  // per dataset
    double alpha = 0.0;
    double beta = 0.0;
};

/// Global fit, per-size optima and the rescaled data.
CollapseResult collapse(const std::vector<std::vector<FitPoint>>& datasets,
                        std::vector<std::size_t> sizes, const FitOptions& options = {});

struct PowerLawSlope {
    double exponent = 0.0;
    double error = 0.0;
    double log_prefactor = 0.0;
};

/// Weighted regression of log(value) on log(L). Without errors the points are
/// weighted equally and the error comes from the scatter.
PowerLawSlope prefactor_scaling(std::span<const double> sizes, std::span<const double> values,
                                std::span<const double> errors = {});

struct KzmInput {
    double d = 1.0;
    double z = 1.0;
    double nu = 1.0;
    double kappa = 0.0;  // 0 for the energy, the order-parameter exponent for the magnetization

    void validate() const;
};

/// (d + kappa/nu) / (z + 1/nu).
double kzm_exponent(const KzmInput& input);

/// 1 / (2z).
double lzm_exponent(double z);

struct PointSelection {
    double v_lo = 0.0;
    double v_hi = 0.0;  // 0: no upper bound
    /// Drop points with f > fraction * (L - 1), the sudden-quench plateau of
    /// the chain energy. Unset keeps every point.
    std::optional<double> plateau_fraction = 0.8;
};

/// Fit points of one size taken from a result table.
std::vector<FitPoint> select_points(const CurveTable& table, std::size_t L, Observable observable,
                                    const PointSelection& selection = {});

/// Sizes present in a table, ascending.
std::vector<std::size_t> table_sizes(const CurveTable& table);

}  // namespace annealscale
