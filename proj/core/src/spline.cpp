#include "cfeval/spline.hpp"

#include "cfeval/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cfeval::spline {

namespace {

/// Type-7 (linear interpolation) quantile of sorted data.
double sorted_quantile(const std::vector<double> &sorted, double p) {
    const double h = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<double> place_knots(std::span<const double> x, int basis_dim) {
    std::vector<double> sorted(x.begin(), x.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> knots;
    for (int j = 0; j < basis_dim; ++j) {
        const double q = sorted_quantile(sorted, static_cast<double>(j) / (basis_dim - 1));
        // Tied quantiles collapse into one knot.
        if (knots.empty() || q > knots.back()) knots.push_back(q);
    }
    return knots;
}

double cube_plus(double u) { return u > 0.0 ? u * u * u : 0.0; }

/// Spline columns on knots mapped to [0, 1]: 1, t, d_j(t) - d_{K-2}(t).
void fill_spline_columns(const std::vector<double> &knots, double x, Eigen::Ref<Eigen::VectorXd> out) {
    const std::size_t K = knots.size();
    const double lo = knots.front();
    const double width = knots.back() - lo;
    const double t = (x - lo) / width;
    auto scaled = [&](std::size_t j) { return (knots[j] - lo) / width; };
    auto d = [&](std::size_t j) {
        return (cube_plus(t - scaled(j)) - cube_plus(t - 1.0)) / (1.0 - scaled(j));
    };

    out(0) = 1.0;
    out(1) = t;
    if (K > 2) {
        const double last = d(K - 2);
        for (std::size_t j = 0; j + 2 < K; ++j) out(static_cast<Eigen::Index>(j + 2)) = d(j) - last;
    }
}

std::vector<std::string> column_names(std::size_t n_spline, bool covariate) {
    std::vector<std::string> names{"intercept", "x"};
    for (std::size_t j = 2; j < n_spline; ++j) names.push_back("spline_" + std::to_string(j - 1));
    if (covariate) names.emplace_back("covariate");
    return names;
}

void require_finite(std::span<const double> v, const char *what) {
    for (double e : v) {
        if (!std::isfinite(e)) throw DomainError(std::string{"spline fit: non-finite "} + what);
    }
}

} // namespace

Eigen::VectorXd basis_row(const FittedSpline &fit, double x, std::optional<double> covariate) {
    if (fit.has_covariate != covariate.has_value()) {
        throw DomainError(fit.has_covariate ? "spline predict: fit needs a covariate value"
                                            : "spline predict: fit has no covariate term");
    }
    if (!std::isfinite(x) || (covariate && !std::isfinite(*covariate))) {
        throw NumericalError("spline predict: non-finite input");
    }
    const auto p = static_cast<Eigen::Index>(fit.n_coefficients());
    Eigen::VectorXd row(p);
    const auto n_spline = static_cast<Eigen::Index>(fit.knots.size());
    fill_spline_columns(fit.knots, x, row.head(n_spline));
    if (fit.has_covariate) row(p - 1) = *covariate;
    if (!row.allFinite()) throw NumericalError("spline predict: non-finite basis evaluation");
    return row;
}

FittedSpline fit(std::span<const double> x, std::span<const double> y,
                 std::optional<std::span<const double>> covariate, const SplineSpec &spec) {
    if (spec.basis_dim < 4) throw DomainError("spline fit: basis_dim must be >= 4");
    if (spec.include_covariate != covariate.has_value()) {
        throw DomainError("spline fit: include_covariate disagrees with covariate argument");
    }
    const std::size_t n = x.size();
    if (y.size() != n || (covariate && covariate->size() != n)) {
        throw DomainError("spline fit: x, y and covariate lengths differ");
    }
    const std::size_t n_covariates = covariate ? 1 : 0;
    if (n <= static_cast<std::size_t>(spec.basis_dim) + n_covariates + 1) {
        throw InsufficientDataError("spline fit: " + std::to_string(n) +
                                    " observations is too few for basis_dim " +
                                    std::to_string(spec.basis_dim));
    }
    require_finite(x, "x");
    require_finite(y, "y");
    if (covariate) require_finite(*covariate, "covariate");

    FittedSpline out;
    out.knots = place_knots(x, spec.basis_dim);
    if (out.knots.size() < 2) throw DomainError("spline fit: all x values are identical");
    out.fit_lo = out.knots.front();
    out.fit_hi = out.knots.back();
    out.has_covariate = covariate.has_value();
    out.covariate_pinned =
        covariate && std::all_of(covariate->begin(), covariate->end(), [](double c) { return c == 0.0; });
    out.n_obs = n;

    const auto n_spline = static_cast<Eigen::Index>(out.knots.size());
    const Eigen::Index p_total = n_spline + (covariate ? 1 : 0);
    const Eigen::Index p = out.covariate_pinned ? n_spline : p_total;

    Eigen::MatrixXd X(static_cast<Eigen::Index>(n), p);
    Eigen::VectorXd Y(static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < n; ++r) {
        const auto row = static_cast<Eigen::Index>(r);
        Eigen::VectorXd b(n_spline);
        fill_spline_columns(out.knots, x[r], b);
        X.row(row).head(n_spline) = b.transpose();
        if (p > n_spline) X(row, p - 1) = (*covariate)[r];
        Y(row) = y[r];
    }

    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> pivoted{X};
    if (pivoted.rank() < p) {
        const auto names = column_names(static_cast<std::size_t>(n_spline), p > n_spline);
        std::vector<std::string> offending;
        const auto &perm = pivoted.colsPermutation().indices();
        for (Eigen::Index k = pivoted.rank(); k < p; ++k) {
            offending.push_back(names.at(static_cast<std::size_t>(perm(k))));
        }
        std::string list;
        for (const auto &c : offending) list += (list.empty() ? "" : ", ") + c;
        throw SingularFitError("spline fit: rank-deficient design (rank " +
                                   std::to_string(pivoted.rank()) + " of " + std::to_string(p) +
                                   "); dependent columns: " + list,
                               std::move(offending));
    }

    const Eigen::HouseholderQR<Eigen::MatrixXd> qr{X};
    const Eigen::VectorXd beta = qr.solve(Y);
    const Eigen::MatrixXd R = qr.matrixQR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd r_inv =
        R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));

    out.coefficients = Eigen::VectorXd::Zero(p_total);
    out.coefficients.head(p) = beta;
    out.xtx_inverse = Eigen::MatrixXd::Zero(p_total, p_total);
    out.xtx_inverse.topLeftCorner(p, p) = r_inv * r_inv.transpose();

    const Eigen::VectorXd resid = Y - X * beta;
    out.residual_dof = n - static_cast<std::size_t>(p);
    out.residual_sd = std::sqrt(resid.squaredNorm() / static_cast<double>(out.residual_dof));
    out.coefficient_covariance = out.residual_sd * out.residual_sd * out.xtx_inverse;
    if (!out.coefficients.allFinite() || !std::isfinite(out.residual_sd)) {
        throw NumericalError("spline fit: non-finite coefficients");
    }
    return out;
}

Prediction predict(const FittedSpline &fit, double x_new, std::optional<double> covariate_new) {
    const Eigen::VectorXd b = basis_row(fit, x_new, covariate_new);
    Prediction p;
    p.mean = b.dot(fit.coefficients);
    p.leverage = std::max(0.0, b.dot(fit.xtx_inverse * b));
    p.predictive_sd = fit.residual_sd * std::sqrt(1.0 + p.leverage);
    p.extrapolated = x_new < fit.fit_lo || x_new > fit.fit_hi;
    if (!std::isfinite(p.mean) || !std::isfinite(p.predictive_sd)) {
        throw NumericalError("spline predict: non-finite prediction");
    }
    return p;
}

void append_samples(const Prediction &prediction, std::size_t n, Stream &stream,
                    std::vector<double> &out) {
    out.reserve(out.size() + n);
    for (std::size_t k = 0; k < n; ++k) {
        out.push_back(stream.normal(prediction.mean, prediction.predictive_sd));
    }
}

std::vector<double> sample_predictive(const FittedSpline &fit, double x_new,
                                      std::optional<double> covariate_new, std::size_t n,
                                      Stream &stream) {
    if (n == 0) throw DomainError("sample_predictive: n must be >= 1");
    std::vector<double> out;
    append_samples(predict(fit, x_new, covariate_new), n, stream, out);
    return out;
}

} // namespace cfeval::spline
