#include "cfeval/approaches.hpp"

#include "cfeval/error.hpp"
#include "cfeval/parallel.hpp"
#include "cfeval/rng.hpp"

#include <cmath>
#include <limits>

namespace cfeval {

namespace {

// Stream path components: approach, variant, model (or kShared), scenario, location.
constexpr std::uint64_t kShared = ~std::uint64_t{0};
constexpr std::uint64_t kGeneric = ~std::uint64_t{0} - 1;

std::uint64_t variant_key(Variant v) { return static_cast<std::uint64_t>(v); }

void check_shapes(const TrueWorld &world, const ModelEnsemble &ensemble) {
    if (ensemble.n_locations() != world.n_locations()) {
        throw StructuralError("approach: world has " + std::to_string(world.n_locations()) +
                              " locations but ensemble has " +
                              std::to_string(ensemble.n_locations()));
    }
    for (std::size_t m = 0; m < ensemble.n_models(); ++m) {
        for (std::size_t l = 0; l < world.n_locations(); ++l) {
            if (ensemble.cell(m, l).projections.size() != world.n_scenarios()) {
                throw StructuralError("approach: missing projections for model " +
                                      std::to_string(m));
            }
        }
    }
}

void finish(ErrorDistribution &d) {
    if (d.samples.empty()) {
        d.flagged_empty = true;
        d.summary = Summary{};
        return;
    }
    d.summary = summarize(d.samples);
}

std::vector<double> column(const TrueWorld &world, double LocationTruth::*field) {
    std::vector<double> out;
    out.reserve(world.n_locations());
    for (const auto &loc : world.locations) out.push_back(loc.*field);
    return out;
}

spline::SplineSpec spec_for(const EstimationOptions &o) {
    spline::SplineSpec s = o.spline;
    s.include_covariate = o.include_covariate;
    return s;
}

std::optional<double> covariate_of(const EstimationOptions &o, const LocationTruth &loc) {
    return o.include_covariate ? std::optional<double>{loc.r0_true} : std::nullopt;
}

} // namespace

std::string label(Approach a) {
    switch (a) {
    case Approach::Plausible: return "A1";
    case Approach::InferError: return "A2";
    case Approach::InferObservation: return "A3";
    }
    return "?";
}

std::string label(Variant v) {
    switch (v) {
    case Variant::Plain: return "plain";
    case Variant::NoCovariate: return "no_covariate";
    case Variant::Covariate: return "covariate";
    }
    return "?";
}

ErrorDistribution ErrorDistribution::location_view(std::size_t segment) const {
    const LocationSegment &seg = segments.at(segment);
    ErrorDistribution out;
    out.approach = approach;
    out.variant = variant;
    out.model_id = model_id;
    out.scenario_index = scenario_index;
    out.location_id = static_cast<int>(seg.location_id);
    const auto slice = segment_samples(seg);
    out.samples.assign(slice.begin(), slice.end());
    out.extrapolated = seg.extrapolated;
    LocationSegment whole = seg;
    whole.offset = 0;
    out.segments.push_back(whole);
    finish(out);
    return out;
}

bool ErrorDistribution::summary_consistent() const {
    if (samples.empty()) return flagged_empty && summary == Summary{};
    return summarize(samples) == summary;
}

// ---------------------------------------------------------------- Approach 1

PlausibleSelection select_plausible(std::span<const double> realized,
                                    std::span<const double> scenarios,
                                    std::optional<double> threshold) {
    if (scenarios.empty()) throw DomainError("select_plausible: no scenarios");
    PlausibleSelection sel;
    sel.threshold = threshold;
    for (double x : realized) {
        std::size_t best = 0;
        double best_dist = std::abs(x - scenarios[0]);
        for (std::size_t i = 1; i < scenarios.size(); ++i) {
            const double d = std::abs(x - scenarios[i]);
            if (d < best_dist - kTieTolerance) {
                best = i;
                best_dist = d;
            }
        }
        sel.chosen.push_back(best);
        sel.deviation.push_back(best_dist);
        sel.included.push_back(!threshold || best_dist <= *threshold);
    }
    return sel;
}

Approach1Result approach1(const TrueWorld &world, const ModelEnsemble &ensemble,
                          std::optional<double> threshold) {
    check_shapes(world, ensemble);
    const std::size_t L = world.n_locations();
    const std::size_t I = world.n_scenarios();
    const std::size_t M = ensemble.n_models();

    Approach1Result out;
    out.n_scenarios = I;
    out.n_locations = L;
    out.selection = select_plausible(column(world, &LocationTruth::x_realized),
                                     world.scenario_values, threshold);
    out.point_errors.assign(M * L, std::numeric_limits<double>::quiet_NaN());
    out.distributions.resize(M * I);

    for (std::size_t m = 0; m < M; ++m) {
        for (std::size_t i = 0; i < I; ++i) {
            auto &d = out.distributions[m * I + i];
            d.approach = Approach::Plausible;
            d.variant = Variant::Plain;
            d.model_id = m;
            d.scenario_index = i;
        }
        for (std::size_t l = 0; l < L; ++l) {
            if (!out.selection.included[l]) continue;
            const std::size_t i = out.selection.chosen[l];
            const double e = ensemble.cell(m, l).projections[i] - world.locations[l].y_observed;
            out.point_errors[m * L + l] = e;
            auto &d = out.distributions[m * I + i];
            d.segments.push_back({.location_id = l, .offset = d.samples.size(), .count = 1,
                                  .predicted_mean = e, .predictive_sd = 0.0,
                                  .extrapolated = false});
            d.samples.push_back(e);
        }
        for (std::size_t i = 0; i < I; ++i) finish(out.distributions[m * I + i]);
    }
    return out;
}

// ---------------------------------------------------------------- Approach 2

std::vector<double> realized_errors(const TrueWorld &world, const ModelEnsemble &ensemble,
                                    std::size_t model) {
    std::vector<double> e(world.n_locations());
    for (std::size_t l = 0; l < world.n_locations(); ++l) {
        e[l] = ensemble.cell(model, l).reprojection - world.locations[l].y_observed;
    }
    return e;
}

std::vector<ErrorDistribution> approach2_model(const TrueWorld &world,
                                               const ModelEnsemble &ensemble, std::size_t model,
                                               const EstimationOptions &options,
                                               std::uint64_t stream_key,
                                               spline::FittedSpline *fit_out) {
    if (options.n_samples == 0) throw DomainError("approach2: n_samples must be >= 1");
    const std::size_t L = world.n_locations();
    const std::size_t I = world.n_scenarios();
    const Variant variant = options.include_covariate ? Variant::Covariate : Variant::NoCovariate;

    const auto x = column(world, &LocationTruth::x_realized);
    const auto r0 = column(world, &LocationTruth::r0_true);
    const auto errors = realized_errors(world, ensemble, model);

    spline::FittedSpline fit;
    try {
        fit = spline::fit(x, errors,
                          options.include_covariate ? std::optional<std::span<const double>>{r0}
                                                    : std::nullopt,
                          spec_for(options));
    } catch (const SingularFitError &e) {
        throw SingularFitError("approach2, model " + std::to_string(model) + ": " + e.what(),
                               e.columns());
    } catch (const InsufficientDataError &e) {
        throw InsufficientDataError("approach2, model " + std::to_string(model) + ": " + e.what());
    } catch (const DomainError &e) {
        throw DomainError("approach2, model " + std::to_string(model) + ": " + e.what());
    }

    std::vector<ErrorDistribution> out(I);
    for (std::size_t i = 0; i < I; ++i) {
        auto &d = out[i];
        d.approach = Approach::InferError;
        d.variant = variant;
        d.model_id = model;
        d.scenario_index = i;
        const double xi = world.scenario_values[i];
        if (options.include_covariate) {
            d.samples.reserve(L * options.n_samples);
            for (std::size_t l = 0; l < L; ++l) {
                const auto p = spline::predict(fit, xi, world.locations[l].r0_true);
                Stream s{options.seed, StreamKind::Approach,
                         {2, variant_key(variant), stream_key, i, l}};
                d.segments.push_back({.location_id = l, .offset = d.samples.size(),
                                      .count = options.n_samples, .predicted_mean = p.mean,
                                      .predictive_sd = p.predictive_sd,
                                      .extrapolated = p.extrapolated});
                spline::append_samples(p, options.n_samples, s, d.samples);
                d.extrapolated = d.extrapolated || p.extrapolated;
            }
        } else {
            const auto p = spline::predict(fit, xi);
            Stream s{options.seed, StreamKind::Approach,
                     {2, variant_key(variant), stream_key, i, kGeneric}};
            spline::append_samples(p, options.n_samples, s, d.samples);
            d.extrapolated = p.extrapolated;
        }
        finish(d);
    }
    if (fit_out) *fit_out = std::move(fit);
    return out;
}

Approach2Result approach2(const TrueWorld &world, const ModelEnsemble &ensemble,
                          const EstimationOptions &options) {
    check_shapes(world, ensemble);
    const std::size_t M = ensemble.n_models();
    const std::size_t I = world.n_scenarios();

    Approach2Result out;
    out.variant = options.include_covariate ? Variant::Covariate : Variant::NoCovariate;
    out.n_scenarios = I;
    out.fits.resize(M);
    std::vector<std::vector<ErrorDistribution>> per_model(M);
    parallel_for(M, options.threads, [&](std::size_t m) {
        per_model[m] = approach2_model(world, ensemble, m, options, m, &out.fits[m]);
    });
    out.distributions.reserve(M * I);
    for (auto &block : per_model) {
        for (auto &d : block) out.distributions.push_back(std::move(d));
    }
    return out;
}

std::vector<double> implied_observations(const ErrorDistribution &errors,
                                         const ModelEnsemble &ensemble) {
    const std::size_t m = errors.model_id;
    const std::size_t i = errors.scenario_index;
    std::vector<double> out;
    out.reserve(errors.samples.size());
    if (!errors.segments.empty()) {
        for (const auto &seg : errors.segments) {
            const double proj = ensemble.cell(m, seg.location_id).projections.at(i);
            for (double e : errors.segment_samples(seg)) out.push_back(proj - e);
        }
        return out;
    }
    const std::size_t L = ensemble.n_locations();
    for (std::size_t k = 0; k < errors.samples.size(); ++k) {
        out.push_back(ensemble.cell(m, k % L).projections.at(i) - errors.samples[k]);
    }
    return out;
}

// ---------------------------------------------------------------- Approach 3

Approach3Result approach3(const TrueWorld &world, const ModelEnsemble &ensemble,
                          const EstimationOptions &options) {
    check_shapes(world, ensemble);
    if (options.n_samples == 0) throw DomainError("approach3: n_samples must be >= 1");
    const std::size_t L = world.n_locations();
    const std::size_t I = world.n_scenarios();
    const std::size_t M = ensemble.n_models();
    const std::size_t n = options.n_samples;

    Approach3Result out;
    out.variant = options.include_covariate ? Variant::Covariate : Variant::NoCovariate;
    out.n_scenarios = I;

    const auto x = column(world, &LocationTruth::x_realized);
    const auto y = column(world, &LocationTruth::y_observed);
    const auto r0 = column(world, &LocationTruth::r0_true);
    try {
        out.fit = spline::fit(x, y,
                              options.include_covariate ? std::optional<std::span<const double>>{r0}
                                                        : std::nullopt,
                              spec_for(options));
    } catch (const SingularFitError &e) {
        throw SingularFitError(std::string{"approach3 observation model: "} + e.what(), e.columns());
    } catch (const InsufficientDataError &e) {
        throw InsufficientDataError(std::string{"approach3 observation model: "} + e.what());
    } catch (const DomainError &e) {
        throw DomainError(std::string{"approach3 observation model: "} + e.what());
    }

    out.observation_predictions.resize(L * I);
    for (std::size_t l = 0; l < L; ++l) {
        for (std::size_t i = 0; i < I; ++i) {
            out.observation_predictions[l * I + i] = spline::predict(
                out.fit, world.scenario_values[i], covariate_of(options, world.locations[l]));
        }
    }

    // Inferred observations are model-independent: one stream per (scenario, location).
    out.inferred_observations.assign(I, std::vector<double>(L * n));
    parallel_for(I * L, options.threads, [&](std::size_t k) {
        const std::size_t i = k / L;
        const std::size_t l = k % L;
        Stream s{options.seed, StreamKind::Approach, {3, variant_key(out.variant), kShared, i, l}};
        const auto &p = out.observation(l, i);
        double *dst = out.inferred_observations[i].data() + l * n;
        for (std::size_t j = 0; j < n; ++j) dst[j] = s.normal(p.mean, p.predictive_sd);
    });

    out.distributions.resize(M * I);
    parallel_for(M, options.threads, [&](std::size_t m) {
        for (std::size_t i = 0; i < I; ++i) {
            auto &d = out.distributions[m * I + i];
            d.approach = Approach::InferObservation;
            d.variant = out.variant;
            d.model_id = m;
            d.scenario_index = i;
            d.samples.resize(L * n);
            const auto &obs = out.inferred_observations[i];
            for (std::size_t l = 0; l < L; ++l) {
                const double proj = ensemble.cell(m, l).projections[i];
                const auto &p = out.observation(l, i);
                for (std::size_t j = 0; j < n; ++j) d.samples[l * n + j] = proj - obs[l * n + j];
                d.segments.push_back({.location_id = l, .offset = l * n, .count = n,
                                      .predicted_mean = proj - p.mean,
                                      .predictive_sd = p.predictive_sd,
                                      .extrapolated = p.extrapolated});
                d.extrapolated = d.extrapolated || p.extrapolated;
            }
            finish(d);
        }
    });
    return out;
}

} // namespace cfeval
