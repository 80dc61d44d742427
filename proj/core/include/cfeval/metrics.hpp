#pragma once

#include <cstddef>
#include <span>

namespace cfeval {
struct ErrorDistribution;
}

namespace cfeval::metrics {

/// Observed deviation split into model calibration error and scenario
/// specification error, all on the final-size scale.
struct Decomposition {
    double observed_deviation = 0.0;   // P^m(y|x_i) - P*(y|x*)
    double calibration_error = 0.0;    // P^m(y|x_i) - P*(y|x_i)
    double scenario_spec_error = 0.0;  // P*(y|x_i) - P*(y|x*)
    double total_error = 0.0;          // |calibration| + |scenario_spec|
};

/// Throws DomainError on non-finite input.
Decomposition decompose(double projection, double observed_counterfactual, double observed_realized);

struct KsResult {
    double statistic = 0.0;       // D in [0, 1]
    std::size_t n = 0;
    std::size_t m = 0;
    double alpha = 0.05;
    double critical_value = 0.0;  // c(alpha) * sqrt((n + m) / (n m))
    bool significant = false;     // statistic > critical_value
};

/// c(alpha) = sqrt(-ln(alpha / 2) / 2), e.g. 1.358 at alpha = 0.05.
double ks_coefficient(double alpha);

/// Two-sample Kolmogorov-Smirnov statistic with the asymptotic critical
/// value. Both samples need at least 5 points.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b, double alpha = 0.05);

/// |mean(estimated samples) - mean(true errors)|.
double mae_of_means(const ErrorDistribution &estimated, std::span<const double> true_errors);
double mae_of_means(std::span<const double> estimated, std::span<const double> true_errors);

/// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> a, std::span<const double> b);

} // namespace cfeval::metrics
