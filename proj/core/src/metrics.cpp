#include "cfeval/metrics.hpp"

#include "cfeval/approaches.hpp"
#include "cfeval/error.hpp"
#include "cfeval/summary.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace cfeval {

double quantile(std::span<const double> sample, double p) {
    if (sample.empty()) throw DomainError("quantile of an empty sample");
    std::vector<double> sorted(sample.begin(), sample.end());
    std::sort(sorted.begin(), sorted.end());
    const double h = std::clamp(p, 0.0, 1.0) * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double mean(std::span<const double> sample) {
    if (sample.empty()) throw DomainError("mean of an empty sample");
    return std::accumulate(sample.begin(), sample.end(), 0.0) / static_cast<double>(sample.size());
}

double variance(std::span<const double> sample) {
    const double mu = mean(sample);
    double ss = 0.0;
    for (double v : sample) ss += (v - mu) * (v - mu);
    return ss / static_cast<double>(sample.size());
}

Summary summarize(std::span<const double> sample) {
    if (sample.empty()) throw DomainError("summary of an empty sample");
    std::vector<double> sorted(sample.begin(), sample.end());
    std::sort(sorted.begin(), sorted.end());
    auto q = [&sorted](double p) {
        const double h = p * static_cast<double>(sorted.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(h));
        const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
        return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
    };
    Summary s;
    s.mean = mean(sample);
    s.median = q(0.5);
    s.q05 = q(0.05);
    s.q25 = q(0.25);
    s.q75 = q(0.75);
    s.q95 = q(0.95);
    s.n = sample.size();
    return s;
}

std::vector<double> average_ranks(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(values.size());
    for (std::size_t k = 0; k < order.size();) {
        std::size_t j = k;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[k]]) ++j;
        const double r = 0.5 * static_cast<double>(k + j) + 1.0;
        for (std::size_t t = k; t <= j; ++t) ranks[order[t]] = r;
        k = j + 1;
    }
    return ranks;
}

namespace metrics {

Decomposition decompose(double projection, double observed_counterfactual, double observed_realized) {
    if (!std::isfinite(projection) || !std::isfinite(observed_counterfactual) ||
        !std::isfinite(observed_realized)) {
        throw DomainError("decompose: non-finite input");
    }
    Decomposition d;
    d.observed_deviation = projection - observed_realized;
    d.calibration_error = projection - observed_counterfactual;
    d.scenario_spec_error = observed_counterfactual - observed_realized;
    d.total_error = std::abs(d.calibration_error) + std::abs(d.scenario_spec_error);
    return d;
}

double ks_coefficient(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("ks: alpha must lie in (0, 1)");
    return std::sqrt(-0.5 * std::log(alpha / 2.0));
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b, double alpha) {
    constexpr std::size_t kMinSample = 5;
    if (a.size() < kMinSample || b.size() < kMinSample) {
        throw DomainError("ks_two_sample: need at least 5 points per sample, got " +
                          std::to_string(a.size()) + " and " + std::to_string(b.size()));
    }
    auto finite = [](double v) { return std::isfinite(v); };
    if (!std::all_of(a.begin(), a.end(), finite) || !std::all_of(b.begin(), b.end(), finite)) {
        throw DomainError("ks_two_sample: non-finite sample value");
    }
    std::vector<double> sa(a.begin(), a.end());
    std::vector<double> sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());

    const double na = static_cast<double>(sa.size());
    const double nb = static_cast<double>(sb.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    // Step both ECDFs past every copy of the next pooled value before comparing.
    while (i < sa.size() && j < sb.size()) {
        const double x = std::min(sa[i], sb[j]);
        while (i < sa.size() && sa[i] == x) ++i;
        while (j < sb.size() && sb[j] == x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }

    KsResult r;
    r.statistic = d;
    r.n = sa.size();
    r.m = sb.size();
    r.alpha = alpha;
    r.critical_value = ks_coefficient(alpha) * std::sqrt((na + nb) / (na * nb));
    r.significant = r.statistic > r.critical_value;
    return r;
}

double mae_of_means(std::span<const double> estimated, std::span<const double> true_errors) {
    if (estimated.empty() || true_errors.empty()) {
        throw DomainError("mae_of_means: empty input");
    }
    return std::abs(mean(estimated) - mean(true_errors));
}

double mae_of_means(const ErrorDistribution &estimated, std::span<const double> true_errors) {
    return mae_of_means(std::span<const double>{estimated.samples}, true_errors);
}

double spearman(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) {
        throw DomainError("spearman: need two equal-length samples of size >= 2");
    }
    const auto ra = average_ranks(a);
    const auto rb = average_ranks(b);
    const double ma = mean(ra);
    const double mb = mean(rb);
    double sab = 0.0;
    double saa = 0.0;
    double sbb = 0.0;
    for (std::size_t k = 0; k < ra.size(); ++k) {
        sab += (ra[k] - ma) * (rb[k] - mb);
        saa += (ra[k] - ma) * (ra[k] - ma);
        sbb += (rb[k] - mb) * (rb[k] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) throw DomainError("spearman: constant input");
    return sab / std::sqrt(saa * sbb);
}

} // namespace metrics
} // namespace cfeval
