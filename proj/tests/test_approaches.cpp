#include "cfeval/approaches.hpp"
#include "cfeval/error.hpp"
#include "cfeval/rng.hpp"
#include "cfeval/sir.hpp"
#include "cfeval/world.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace cfeval;

namespace {

ExperimentConfig config(std::size_t models = 3, std::size_t locations = 50) {
    ExperimentConfig c;
    c.n_models = models;
    c.n_locations = locations;
    return c;
}

// A world whose realized coverages are overridden before solving.
Experiment with_coverages(const ExperimentConfig &c, const std::vector<double> &xs) {
    Experiment ex = draw_parameters(c);
    for (std::size_t l = 0; l < xs.size(); ++l) ex.world.locations[l].x_realized = xs[l];
    compute_outcomes(c, ex);
    return ex;
}

EstimationOptions options(bool covariate, std::size_t n = 2000) {
    EstimationOptions o;
    o.include_covariate = covariate;
    o.n_samples = n;
    return o;
}

const Experiment &default_experiment() {
    static const Experiment ex = generate(config());
    return ex;
}

} // namespace

TEST(Plausible, NearestScenarioWithLowerTieBreak) {
    const std::vector<double> scenarios{0.30, 0.50};
    const auto sel = select_plausible(std::vector<double>{0.31, 0.40, 0.49, 0.3}, scenarios);
    EXPECT_EQ(sel.chosen, (std::vector<std::size_t>{0, 0, 1, 0}));
    EXPECT_NEAR(sel.deviation[0], 0.01, 1e-15);
    EXPECT_NEAR(sel.deviation[1], 0.10, 1e-15);
    EXPECT_EQ(sel.included, (std::vector<bool>{true, true, true, true}));
}

TEST(Plausible, ThresholdFilters) {
    const auto sel =
        select_plausible(std::vector<double>{0.31, 0.36, 0.45}, std::vector<double>{0.3, 0.5}, 0.05);
    EXPECT_EQ(sel.included, (std::vector<bool>{true, false, true}));
    EXPECT_THROW(select_plausible(std::vector<double>{0.3}, std::vector<double>{}), DomainError);
}

TEST(Plausible, InvariantUnderIncreasingAffineMaps) {
    Stream s{21};
    const std::vector<double> scenarios{0.3, 0.37, 0.5};
    std::vector<double> xs(200);
    for (double &x : xs) x = s.uniform(0.25, 0.55);
    const auto base = select_plausible(xs, scenarios);
    for (auto [a, b] : {std::pair{3.0, -1.0}, std::pair{0.5, 10.0}, std::pair{100.0, 0.0}}) {
        std::vector<double> tx, ts;
        for (double x : xs) tx.push_back(a * x + b);
        for (double x : scenarios) ts.push_back(a * x + b);
        EXPECT_EQ(select_plausible(tx, ts).chosen, base.chosen);
    }
}

TEST(Approach1, PerfectModelStillPicksUpScenarioDeviation) {
    const auto c = config(2, 10);
    std::vector<double> xs(10, 0.45);
    xs[0] = 0.35;
    const auto ex = with_coverages(c, xs);
    const auto perfect = perfect_ensemble(c, ex.world);
    const auto a1 = approach1(ex.world, perfect);
    const auto &loc = ex.world.locations[0];
    const double at_scenario =
        sir::final_size({.r0 = loc.r0_true, .alpha = loc.alpha_true, .v = 0.30});
    const double at_realized =
        sir::final_size({.r0 = loc.r0_true, .alpha = loc.alpha_true, .v = 0.35});
    EXPECT_EQ(a1.point_error(0, 0), at_scenario - at_realized);
    EXPECT_GT(std::abs(a1.point_error(0, 0)), 1e-3);
    EXPECT_EQ(a1.at(1, 0).samples.size(), 1u);
}

TEST(Approach1, EmptyBucketIsFlagged) {
    const auto c = config(2, 10);
    const auto ex = with_coverages(c, std::vector<double>(10, 0.32));
    const auto a1 = approach1(ex.world, ex.ensemble);
    for (std::size_t m = 0; m < 2; ++m) {
        EXPECT_FALSE(a1.at(m, 0).flagged_empty);
        EXPECT_EQ(a1.at(m, 0).samples.size(), 10u);
        EXPECT_TRUE(a1.at(m, 1).flagged_empty);
        EXPECT_EQ(a1.at(m, 1).summary.n, 0u);
        EXPECT_TRUE(a1.at(m, 1).summary_consistent());
    }
}

TEST(Approach1, RealizedOnScenarioGivesTrueErrors) {
    const auto c = config(3, 12);
    const auto ex = with_coverages(c, std::vector<double>(12, 0.5));
    const auto a1 = approach1(ex.world, ex.ensemble);
    const auto te = true_errors(ex.world, ex.ensemble);
    for (std::size_t m = 0; m < 3; ++m) {
        EXPECT_EQ(a1.at(m, 1).samples, te.across_locations(m, 1));
    }
}

TEST(Approach1, ThresholdMarksExcludedLocationsNaN) {
    const auto &ex = default_experiment();
    const auto a1 = approach1(ex.world, ex.ensemble, 0.03);
    std::size_t pooled = 0;
    for (std::size_t l = 0; l < ex.world.n_locations(); ++l) {
        const bool in = a1.selection.included[l];
        EXPECT_EQ(std::isnan(a1.point_error(0, l)), !in);
        pooled += in;
    }
    EXPECT_EQ(a1.at(0, 0).samples.size() + a1.at(0, 1).samples.size(), pooled);
}

TEST(Approach2, PerfectModelEstimatesZero) {
    const auto c = config(2);
    const auto ex = generate(c);
    const auto perfect = perfect_ensemble(c, ex.world);
    for (bool cov : {false, true}) {
        const auto a2 = approach2(ex.world, perfect, options(cov));
        for (const auto &d : a2.distributions) EXPECT_LT(std::abs(d.summary.mean), 1e-6);
    }
}

TEST(Approach2, SampleLayout) {
    const auto &ex = default_experiment();
    const auto with = approach2(ex.world, ex.ensemble, options(true, 100));
    const auto without = approach2(ex.world, ex.ensemble, options(false, 100));
    EXPECT_EQ(with.variant, Variant::Covariate);
    for (const auto &d : with.distributions) {
        EXPECT_EQ(d.samples.size(), 100u * 50u);
        ASSERT_EQ(d.segments.size(), 50u);
        EXPECT_EQ(d.segments[7].location_id, 7u);
        EXPECT_EQ(d.segments[7].offset, 700u);
        EXPECT_TRUE(d.summary_consistent());
        const auto view = d.location_view(7);
        EXPECT_EQ(view.location_id, 7);
        EXPECT_EQ(view.samples.size(), 100u);
        EXPECT_TRUE(view.summary_consistent());
    }
    for (const auto &d : without.distributions) {
        EXPECT_EQ(d.samples.size(), 100u);
        EXPECT_TRUE(d.segments.empty());
        EXPECT_EQ(d.location_id, kPooled);
    }
    EXPECT_EQ(with.fits.size(), 3u);
    EXPECT_TRUE(with.fits[0].has_covariate);
}

TEST(Approach2, SamplesComeOnlyFromTheFittedModel) {
    const auto &ex = default_experiment();
    const auto o = options(true, 50);
    spline::FittedSpline f;
    const auto ds = approach2_model(ex.world, ex.ensemble, 1, o, 1, &f);
    // The fit itself is a regression of realized errors on coverage and R0.
    std::vector<double> x, r0;
    for (const auto &loc : ex.world.locations) {
        x.push_back(loc.x_realized);
        r0.push_back(loc.r0_true);
    }
    const auto ref = spline::fit(x, realized_errors(ex.world, ex.ensemble, 1),
                                 std::span<const double>{r0}, {.include_covariate = true});
    EXPECT_EQ(f.coefficients, ref.coefficients);
    for (const auto &d : ds) {
        for (const auto &seg : d.segments) {
            const auto p = spline::predict(ref, ex.world.scenario_values[d.scenario_index],
                                           ex.world.locations[seg.location_id].r0_true);
            EXPECT_EQ(seg.predicted_mean, p.mean);
            EXPECT_EQ(seg.predictive_sd, p.predictive_sd);
        }
    }
}

TEST(Approach2, IdenticalModelsGiveIdenticalDistributions) {
    auto ex = generate(config(2));
    for (std::size_t l = 0; l < ex.world.n_locations(); ++l) {
        ex.ensemble.cell(1, l) = ex.ensemble.cell(0, l);
    }
    for (bool cov : {false, true}) {
        const auto a = approach2_model(ex.world, ex.ensemble, 0, options(cov), 77);
        const auto b = approach2_model(ex.world, ex.ensemble, 1, options(cov), 77);
        for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].samples, b[i].samples);
    }
}

TEST(Approach2, ErrorsNameTheModel) {
    const auto c = config(2, 6);
    const auto ex = generate(c);
    try {
        approach2(ex.world, ex.ensemble, options(false));
        FAIL();
    } catch (const InsufficientDataError &e) {
        EXPECT_NE(std::string{e.what()}.find("approach2, model 0"), std::string::npos) << e.what();
    }
}

TEST(Approach2, ImpliedObservations) {
    const auto &ex = default_experiment();
    const auto with = approach2(ex.world, ex.ensemble, options(true, 10));
    const auto &d = with.at(2, 1);
    const auto implied = implied_observations(d, ex.ensemble);
    ASSERT_EQ(implied.size(), d.samples.size());
    EXPECT_EQ(implied[35], ex.ensemble.cell(2, 3).projections[1] - d.samples[35]);

    const auto without = approach2(ex.world, ex.ensemble, options(false, 120));
    const auto &g = without.at(1, 0);
    const auto generic = implied_observations(g, ex.ensemble);
    EXPECT_EQ(generic[53], ex.ensemble.cell(1, 3).projections[0] - g.samples[53]);
}

TEST(Approach3, EstimateMinusTruthIsSharedAcrossModels) {
    const auto &ex = default_experiment();
    const auto te = true_errors(ex.world, ex.ensemble);
    for (bool cov : {false, true}) {
        const auto a3 = approach3(ex.world, ex.ensemble, options(cov));
        for (std::size_t i = 0; i < 2; ++i) {
            const double ref = a3.at(0, i).summary.mean - oracle::mean(te.across_locations(0, i));
            for (std::size_t m = 1; m < 3; ++m) {
                const double gap =
                    a3.at(m, i).summary.mean - oracle::mean(te.across_locations(m, i));
                EXPECT_NEAR(gap, ref, 1e-10);
            }
        }
    }
}

TEST(Approach3, ErrorSamplesAreProjectionMinusInferredObservation) {
    const auto &ex = default_experiment();
    const auto a3 = approach3(ex.world, ex.ensemble, options(true, 20));
    for (std::size_t m = 0; m < 3; ++m) {
        const auto &d = a3.at(m, 1);
        for (std::size_t l = 0; l < 50; l += 7) {
            for (std::size_t j = 0; j < 20; ++j) {
                EXPECT_EQ(d.samples[l * 20 + j],
                          ex.ensemble.cell(m, l).projections[1] -
                              a3.inferred_observations[1][l * 20 + j]);
            }
        }
        EXPECT_TRUE(d.summary_consistent());
    }
}

TEST(Approach3, InSampleCoverage) {
    const auto &ex = default_experiment();
    const auto a3 = approach3(ex.world, ex.ensemble, options(true, 10));
    std::size_t inside = 0;
    for (const auto &loc : ex.world.locations) {
        const auto p = spline::predict(a3.fit, loc.x_realized, loc.r0_true);
        inside += std::abs(p.mean - loc.y_observed) <= 2 * p.predictive_sd;
    }
    EXPECT_GE(inside, 45u);
}

// The shared offset at a scenario is the gap between the mean counterfactual
// observation and the mean inferred observation, whatever its sign.
TEST(Approach3, OffsetIsTheObservationModelGap) {
    const auto &ex = default_experiment();
    const auto te = true_errors(ex.world, ex.ensemble);
    const auto a3 = approach3(ex.world, ex.ensemble, options(true));
    for (std::size_t i = 0; i < 2; ++i) {
        std::vector<double> cf;
        for (const auto &loc : ex.world.locations) cf.push_back(loc.y_counterfactual[i]);
        const double offset = a3.at(0, i).summary.mean - oracle::mean(te.across_locations(0, i));
        EXPECT_NEAR(offset, oracle::mean(cf) - oracle::mean(a3.inferred_observations[i]), 1e-12);
        EXPECT_GT(std::abs(offset), 0.0);
        EXPECT_LT(std::abs(offset), 0.05);
    }
}

TEST(Approach3, DeterministicAcrossThreads) {
    const auto &ex = default_experiment();
    auto o = options(true, 100);
    const auto a = approach3(ex.world, ex.ensemble, o);
    o.threads = 3;
    const auto b = approach3(ex.world, ex.ensemble, o);
    for (std::size_t k = 0; k < a.distributions.size(); ++k) {
        EXPECT_EQ(a.distributions[k].samples, b.distributions[k].samples);
    }
    const auto c2 = approach2(ex.world, ex.ensemble, options(true, 100));
    auto o2 = options(true, 100);
    o2.threads = 4;
    const auto d2 = approach2(ex.world, ex.ensemble, o2);
    for (std::size_t k = 0; k < c2.distributions.size(); ++k) {
        EXPECT_EQ(c2.distributions[k].samples, d2.distributions[k].samples);
    }
}

// Realized coverage squeezed into a narrow band at the low scenario: every
// approach then targets (nearly) the error it is scored against.
TEST(Approaches, NarrowBandAtScenarioRecoversTrueMeans) {
    const auto c = config(3, 50);
    Stream s{31};
    std::vector<double> xs(50);
    for (double &x : xs) x = 0.30 + s.uniform(0.0, 0.002);
    const auto ex = with_coverages(c, xs);
    const auto te = true_errors(ex.world, ex.ensemble);
    const auto a2 = approach2(ex.world, ex.ensemble, options(true));
    const auto a3 = approach3(ex.world, ex.ensemble, options(true));
    for (std::size_t m = 0; m < 3; ++m) {
        const double truth = oracle::mean(te.across_locations(m, 0));
        for (const auto *d : {&a2.at(m, 0), &a3.at(m, 0)}) {
            double sd = 0;
            for (const auto &seg : d->segments) sd += seg.predictive_sd;
            sd /= static_cast<double>(d->segments.size());
            EXPECT_LE(std::abs(d->summary.mean - truth), spline::kZ90 * sd)
                << label(d->approach) << " model " << m;
        }
    }
}

TEST(Approaches, Labels) {
    EXPECT_EQ(label(Approach::Plausible), "A1");
    EXPECT_EQ(label(Approach::InferObservation), "A3");
    EXPECT_EQ(label(Variant::NoCovariate), "no_covariate");
    EXPECT_EQ(label(Variant::Covariate), "covariate");
    EXPECT_EQ(label(Variant::Plain), "plain");
}

TEST(Approaches, ShapeMismatchIsStructural) {
    const auto a = generate(config(1, 8));
    const auto b = generate(config(1, 9));
    EXPECT_THROW(approach1(a.world, b.ensemble), StructuralError);
    EXPECT_THROW(approach3(a.world, b.ensemble, {}), StructuralError);
}
