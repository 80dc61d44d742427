#pragma once

#include "cfeval/spline.hpp"
#include "cfeval/summary.hpp"
#include "cfeval/world.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cfeval {

enum class Approach {
    Plausible = 1,         // evaluate only the closest modeled scenario
    InferError = 2,        // regress realized-scenario error on coverage
    InferObservation = 3,  // regress observations on coverage, then subtract
};

enum class Variant { Plain, NoCovariate, Covariate };

std::string label(Approach a);  // "A1", "A2", "A3"
std::string label(Variant v);   // "plain", "no_covariate", "covariate"

/// location_id used for distributions pooled across locations.
inline constexpr int kPooled = -1;

/// A slice of a pooled sample drawn for a single location.
struct LocationSegment {
    std::size_t location_id = 0;
    std::size_t offset = 0;
    std::size_t count = 0;
    double predicted_mean = 0.0;  // mean of the distribution the slice was drawn from
    double predictive_sd = 0.0;
    bool extrapolated = false;
};

/// Empirical estimate of miscalibration error for one (model, scenario).
struct ErrorDistribution {
    Approach approach = Approach::Plausible;
    Variant variant = Variant::Plain;
    std::size_t model_id = 0;
    std::size_t scenario_index = 0;
    int location_id = kPooled;
    std::vector<double> samples;
    Summary summary{};             // n == 0 when flagged_empty
    bool flagged_empty = false;    // no location contributed (Approach 1 only)
    bool extrapolated = false;     // some prediction left the fitted x range
    std::vector<LocationSegment> segments;  // per-location slices, when available

    std::span<const double> segment_samples(const LocationSegment &s) const {
        return std::span<const double>{samples}.subspan(s.offset, s.count);
    }

    /// The distribution of a single segment, as a standalone per-location
    /// ErrorDistribution with its own summary.
    ErrorDistribution location_view(std::size_t segment) const;

    /// Recomputes the summary from `samples` and compares it exactly.
    bool summary_consistent() const;
};

// ---------------------------------------------------------------- Approach 1

struct PlausibleSelection {
    std::vector<std::size_t> chosen;     // x^P_l as a scenario index
    std::vector<double> deviation;       // |x*_l - x^P_l|
    std::optional<double> threshold;     // tau, when filtering is enabled
    std::vector<bool> included;          // deviation <= tau (all true without tau)
};

/// Distances within this tolerance count as ties, resolved toward the
/// lower scenario.
inline constexpr double kTieTolerance = 1e-12;

PlausibleSelection select_plausible(std::span<const double> realized,
                                    std::span<const double> scenarios,
                                    std::optional<double> threshold = std::nullopt);

struct Approach1Result {
    PlausibleSelection selection;
    std::vector<ErrorDistribution> distributions;  // index m * n_scenarios + i
    /// P^m_l(y | x^P_l) - P*_l(y | x*_l), index m * n_locations + l; NaN when
    /// the location is excluded by the threshold.
    std::vector<double> point_errors;
    std::size_t n_scenarios = 0;
    std::size_t n_locations = 0;

    const ErrorDistribution &at(std::size_t m, std::size_t i) const {
        return distributions.at(m * n_scenarios + i);
    }
    double point_error(std::size_t m, std::size_t l) const {
        return point_errors.at(m * n_locations + l);
    }
};

Approach1Result approach1(const TrueWorld &world, const ModelEnsemble &ensemble,
                          std::optional<double> threshold = std::nullopt);

// ------------------------------------------------------ Approaches 2 and 3

struct EstimationOptions {
    bool include_covariate = true;
    /// Draws per location for location-resolved distributions (Approach 2
    /// with covariate, Approach 3); total draws for Approach 2 without one.
    std::size_t n_samples = 10000;
    spline::SplineSpec spline{};
    std::uint64_t seed = 42;
    unsigned threads = 1;
};

struct Approach2Result {
    Variant variant = Variant::NoCovariate;
    std::vector<spline::FittedSpline> fits;        // one per model
    std::vector<ErrorDistribution> distributions;  // index m * n_scenarios + i
    std::size_t n_scenarios = 0;

    const ErrorDistribution &at(std::size_t m, std::size_t i) const {
        return distributions.at(m * n_scenarios + i);
    }
};

/// Realized-scenario errors e^m_l(x*) = P^m_l(y|x*_l) - P*_l(y|x*_l).
std::vector<double> realized_errors(const TrueWorld &world, const ModelEnsemble &ensemble,
                                    std::size_t model);

/// Fits error ~ spline(x*) [+ R0*] per model and samples the predictive
/// distribution at every scenario value. With the covariate each location
/// gets its own n_samples draws and the slices are concatenated; without
/// it n_samples location-generic draws are taken.
Approach2Result approach2(const TrueWorld &world, const ModelEnsemble &ensemble,
                          const EstimationOptions &options);

/// The per-model step of approach2 with an explicit stream key, so two
/// models can be evaluated on identical random streams.
std::vector<ErrorDistribution> approach2_model(const TrueWorld &world,
                                               const ModelEnsemble &ensemble, std::size_t model,
                                               const EstimationOptions &options,
                                               std::uint64_t stream_key,
                                               spline::FittedSpline *fit_out = nullptr);

/// Observations each Approach 2 model implies at scenario i: projection
/// minus sampled error. Slices use their own location's projection;
/// location-generic samples are paired with locations round-robin.
std::vector<double> implied_observations(const ErrorDistribution &errors,
                                         const ModelEnsemble &ensemble);

struct Approach3Result {
    Variant variant = Variant::NoCovariate;
    spline::FittedSpline fit;                                // shared observation model
    std::vector<spline::Prediction> observation_predictions; // index l * n_scenarios + i
    std::vector<std::vector<double>> inferred_observations;  // per scenario, L * n_samples
    std::vector<ErrorDistribution> distributions;            // index m * n_scenarios + i
    std::size_t n_scenarios = 0;

    const ErrorDistribution &at(std::size_t m, std::size_t i) const {
        return distributions.at(m * n_scenarios + i);
    }
    const spline::Prediction &observation(std::size_t l, std::size_t i) const {
        return observation_predictions.at(l * n_scenarios + i);
    }
};

/// Fits one observation model y* ~ spline(x*) [+ R0*] across locations,
/// draws n_samples inferred observations per location and scenario (the
/// same draws for every model) and subtracts them from each projection.
Approach3Result approach3(const TrueWorld &world, const ModelEnsemble &ensemble,
                          const EstimationOptions &options);

} // namespace cfeval
