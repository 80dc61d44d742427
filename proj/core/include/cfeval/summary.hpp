#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cfeval {

/// Median, central 50% and 90% intervals and mean of a sample.
struct Summary {
    double mean = 0.0;
    double median = 0.0;
    double q05 = 0.0;
    double q25 = 0.0;
    double q75 = 0.0;
    double q95 = 0.0;
    std::size_t n = 0;

    friend bool operator==(const Summary &, const Summary &) = default;
};

/// Type-7 quantile (linear interpolation between order statistics), p in [0,1].
double quantile(std::span<const double> sample, double p);

double mean(std::span<const double> sample);

double variance(std::span<const double> sample);  // population variance

/// Throws DomainError on an empty sample.
Summary summarize(std::span<const double> sample);

/// Ranks with ties given their average rank (1-based).
std::vector<double> average_ranks(std::span<const double> values);

} // namespace cfeval
