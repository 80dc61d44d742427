#pragma once

#include "cfeval/rng.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace cfeval::spline {

/// Normal critical values for central 50% and 90% intervals.
inline constexpr double kZ50 = 0.6744897501960817;
inline constexpr double kZ90 = 1.6448536269514722;

struct SplineSpec {
    /// Number of natural-cubic-spline knots, which is also the number of
    /// basis columns including the intercept.
    int basis_dim = 5;
    /// Adds a linear term in a per-observation covariate.
    bool include_covariate = false;
};

/// An unpenalized least-squares fit of
///
///   y ~ 1 + x + N_1(x) + ... + N_{K-2}(x) [+ covariate]
///
/// where N_k is the truncated-power natural cubic spline basis on K knots
/// placed at quantiles of the training x. The basis is linear beyond the
/// boundary knots.
struct FittedSpline {
    std::vector<double> knots;        // training-x quantiles, strictly increasing
    Eigen::VectorXd coefficients;     // intercept, x, spline terms, [covariate]
    Eigen::MatrixXd xtx_inverse;      // (X'X)^-1, zero rows/cols for pinned columns
    Eigen::MatrixXd coefficient_covariance;  // residual_sd^2 * xtx_inverse
    double residual_sd = 0.0;
    std::size_t n_obs = 0;
    std::size_t residual_dof = 0;
    double fit_lo = 0.0;              // min training x
    double fit_hi = 0.0;              // max training x
    bool has_covariate = false;
    /// True when the covariate column was identically zero and its
    /// coefficient is pinned to zero instead of estimated.
    bool covariate_pinned = false;

    std::size_t n_coefficients() const noexcept {
        return static_cast<std::size_t>(coefficients.size());
    }
};

struct Prediction {
    double mean = 0.0;
    double predictive_sd = 0.0;
    double leverage = 0.0;            // b' (X'X)^-1 b
    bool extrapolated = false;        // x outside [fit_lo, fit_hi]

    double lower(double z) const noexcept { return mean - z * predictive_sd; }
    double upper(double z) const noexcept { return mean + z * predictive_sd; }
};

/// Design row for x (and the covariate value, when the fit has one).
Eigen::VectorXd basis_row(const FittedSpline &fit, double x, std::optional<double> covariate);

/// Throws InsufficientDataError when n <= basis_dim + covariates + 1,
/// DomainError on length mismatch, all-identical x or non-finite input,
/// SingularFitError (naming the dependent columns) on a rank-deficient
/// design. A covariate column of all zeros is pinned to zero instead.
FittedSpline fit(std::span<const double> x, std::span<const double> y,
                 std::optional<std::span<const double>> covariate, const SplineSpec &spec);

/// Mean and predictive sd = residual_sd * sqrt(1 + leverage).
Prediction predict(const FittedSpline &fit, double x_new,
                   std::optional<double> covariate_new = std::nullopt);

/// n independent Normal(mean, predictive_sd) draws from `stream`.
std::vector<double> sample_predictive(const FittedSpline &fit, double x_new,
                                      std::optional<double> covariate_new, std::size_t n,
                                      Stream &stream);

/// Appends n draws from Normal(prediction.mean, prediction.predictive_sd).
void append_samples(const Prediction &prediction, std::size_t n, Stream &stream,
                    std::vector<double> &out);

} // namespace cfeval::spline
