#include "cfeval/csv.hpp"
#include "cfeval/error.hpp"
#include "cfeval/sir.hpp"
#include "cfeval/world.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace cfeval;

namespace {

ExperimentConfig small(std::size_t models = 3, std::size_t locations = 12) {
    ExperimentConfig c;
    c.n_models = models;
    c.n_locations = locations;
    return c;
}

void expect_same(const Experiment &a, const Experiment &b) {
    ASSERT_EQ(a.world.n_locations(), b.world.n_locations());
    for (std::size_t l = 0; l < a.world.n_locations(); ++l) {
        const auto &x = a.world.locations[l];
        const auto &y = b.world.locations[l];
        EXPECT_EQ(x.r0_true, y.r0_true);
        EXPECT_EQ(x.alpha_true, y.alpha_true);
        EXPECT_EQ(x.x_realized, y.x_realized);
        EXPECT_EQ(x.y_observed, y.y_observed);
        EXPECT_EQ(x.y_counterfactual, y.y_counterfactual);
    }
    ASSERT_EQ(a.ensemble.n_models(), b.ensemble.n_models());
    for (std::size_t m = 0; m < a.ensemble.n_models(); ++m) {
        EXPECT_EQ(a.ensemble.model(m).global_bias, b.ensemble.model(m).global_bias);
        for (std::size_t l = 0; l < a.world.n_locations(); ++l) {
            const auto &x = a.ensemble.cell(m, l);
            const auto &y = b.ensemble.cell(m, l);
            EXPECT_EQ(x.r0, y.r0);
            EXPECT_EQ(x.alpha, y.alpha);
            EXPECT_EQ(x.projections, y.projections);
            EXPECT_EQ(x.reprojection, y.reprojection);
        }
    }
}

} // namespace

TEST(World, DeterministicForSeedAndThreadCount) {
    const auto c = small();
    const auto a = generate(c, 1);
    expect_same(a, generate(c, 1));
    expect_same(a, generate(c, 4));
    auto other = c;
    other.seed = 43;
    EXPECT_NE(generate(other).world.locations[0].r0_true, a.world.locations[0].r0_true);
}

TEST(World, DrawsRespectRangesAndDefinitions) {
    const auto c = small(4, 30);
    const auto ex = generate(c);
    for (std::size_t l = 0; l < c.n_locations; ++l) {
        const auto &loc = ex.world.locations[l];
        EXPECT_GE(loc.r0_true, 2.0);
        EXPECT_LE(loc.r0_true, 3.0);
        EXPECT_GE(loc.x_realized, 0.3);
        EXPECT_LE(loc.x_realized, 0.5);
        EXPECT_EQ(loc.y_observed, sir::final_size({.r0 = loc.r0_true, .alpha = loc.alpha_true,
                                                   .v = loc.x_realized}));
        for (std::size_t i = 0; i < c.n_scenarios(); ++i) {
            EXPECT_GE(loc.y_counterfactual[i], 0.0);
            EXPECT_LE(loc.y_counterfactual[i], 1.0);
        }
        for (std::size_t m = 0; m < c.n_models; ++m) {
            const auto &cell = ex.ensemble.cell(m, l);
            EXPECT_GT(cell.r0, 0.0);
            EXPECT_EQ(cell.r0, loc.r0_true + ex.ensemble.model(m).global_bias + cell.local_bias);
            // Reprojection uses the same parameters as the scenario projections.
            EXPECT_EQ(cell.reprojection,
                      sir::final_size({.r0 = cell.r0, .alpha = cell.alpha, .v = loc.x_realized}));
            EXPECT_EQ(cell.projections[1],
                      sir::final_size({.r0 = cell.r0, .alpha = cell.alpha, .v = 0.5}));
        }
    }
}

TEST(World, DefaultConfigSampleMeans) {
    const auto ex = draw_parameters(ExperimentConfig{});
    std::vector<double> r0, x;
    for (const auto &loc : ex.world.locations) {
        r0.push_back(loc.r0_true);
        x.push_back(loc.x_realized);
    }
    EXPECT_GE(oracle::mean(r0), 2.3);
    EXPECT_LE(oracle::mean(r0), 2.7);
    EXPECT_GE(oracle::mean(x), 0.37);
    EXPECT_LE(oracle::mean(x), 0.43);
}

TEST(World, DefaultTrueErrorsAreCentred) {
    const auto ex = generate(ExperimentConfig{});
    const auto te = true_errors(ex.world, ex.ensemble);
    std::vector<double> all;
    for (std::size_t m = 0; m < te.n_models(); ++m) {
        for (std::size_t l = 0; l < te.n_locations(); ++l) {
            for (std::size_t i = 0; i < te.n_scenarios(); ++i) {
                EXPECT_EQ(te.at(m, l, i), ex.ensemble.cell(m, l).projections[i] -
                                              ex.world.locations[l].y_counterfactual[i]);
                all.push_back(te.at(m, l, i));
            }
        }
    }
    EXPECT_LE(std::abs(oracle::mean(all)), 0.2);
    EXPECT_EQ(te.across_locations(2, 1).size(), ex.world.n_locations());
    EXPECT_EQ(te.across_locations(2, 1)[7], te.at(2, 7, 1));
}

TEST(World, PerfectEnsembleHasZeroErrors) {
    const auto c = small();
    const auto ex = generate(c);
    const auto perfect = perfect_ensemble(c, ex.world);
    const auto te = true_errors(ex.world, perfect);
    for (std::size_t m = 0; m < c.n_models; ++m) {
        for (std::size_t l = 0; l < c.n_locations; ++l) {
            EXPECT_EQ(perfect.cell(m, l).reprojection, ex.world.locations[l].y_observed);
            for (std::size_t i = 0; i < c.n_scenarios(); ++i) EXPECT_EQ(te.at(m, l, i), 0.0);
        }
    }
}

TEST(World, StreamsAreIndependentOfEntityCounts) {
    const auto few = draw_parameters(small(2, 10));
    const auto many = draw_parameters(small(5, 20));
    for (std::size_t l = 0; l < 10; ++l) {
        EXPECT_EQ(few.world.locations[l].r0_true, many.world.locations[l].r0_true);
        EXPECT_EQ(few.world.locations[l].x_realized, many.world.locations[l].x_realized);
        for (std::size_t m = 0; m < 2; ++m) {
            EXPECT_EQ(few.ensemble.cell(m, l).r0, many.ensemble.cell(m, l).r0);
            EXPECT_EQ(few.ensemble.cell(m, l).alpha, many.ensemble.cell(m, l).alpha);
        }
    }
}

TEST(World, NonPositiveModelR0IsRedrawn) {
    auto c = small(3, 20);
    c.ranges.global_bias_sd = 0.0;
    c.ranges.local_bias_sd = 3.0;
    const auto ex = draw_parameters(c);
    EXPECT_GT(ex.ensemble.total_redraws(), 0);
    for (std::size_t m = 0; m < c.n_models; ++m) {
        for (std::size_t l = 0; l < c.n_locations; ++l) EXPECT_GT(ex.ensemble.cell(m, l).r0, 0.0);
    }
}

TEST(World, ConfigValidation) {
    auto bad = [](auto mutate) {
        ExperimentConfig c;
        mutate(c);
        return c;
    };
    EXPECT_THROW(generate(bad([](auto &c) { c.n_locations = 1; })), DomainError);
    EXPECT_THROW(generate(bad([](auto &c) { c.n_models = 0; })), DomainError);
    EXPECT_THROW(generate(bad([](auto &c) { c.scenario_values = {0.5, 0.3}; })), DomainError);
    EXPECT_THROW(generate(bad([](auto &c) { c.scenario_values = {0.3, 1.0}; })), DomainError);
    EXPECT_THROW(generate(bad([](auto &c) { c.scenario_values.clear(); })), DomainError);
}

TEST(World, MismatchedShapesAreStructuralErrors) {
    const auto a = generate(small(2, 5));
    const auto b = generate(small(2, 6));
    EXPECT_THROW(true_errors(a.world, b.ensemble), StructuralError);
}

TEST(World, ProjectionsCsvLayout) {
    const auto c = small(2, 4);
    const auto ex = generate(c);
    std::ostringstream out;
    write_projections_csv(out, ex.world, ex.ensemble);
    std::istringstream in{out.str()};
    const auto t = csv::Table::read(in);
    EXPECT_EQ(t.columns(), (std::vector<std::string>{"model_id", "location_id", "x_kind", "x_value",
                                                     "y_projected",
                                                     "y_observed_or_counterfactual"}));
    ASSERT_EQ(t.rows(), 2u * 4u * 3u);
    for (std::size_t r = 0; r < t.rows(); ++r) {
        const auto m = static_cast<std::size_t>(t.integer(r, "model_id"));
        const auto l = static_cast<std::size_t>(t.integer(r, "location_id"));
        const auto &kind = t.text(r, "x_kind");
        const auto &cell = ex.ensemble.cell(m, l);
        const auto &loc = ex.world.locations[l];
        if (kind == "realized") {
            EXPECT_EQ(t.number(r, "y_projected"), cell.reprojection);
            EXPECT_EQ(t.number(r, "y_observed_or_counterfactual"), loc.y_observed);
        } else {
            const std::size_t i = kind == "scenario_low" ? 0 : 1;
            EXPECT_EQ(kind, scenario_kind(i, 2));
            EXPECT_EQ(t.number(r, "x_value"), c.scenario_values[i]);
            EXPECT_EQ(t.number(r, "y_projected"), cell.projections[i]);
            EXPECT_EQ(t.number(r, "y_observed_or_counterfactual"), loc.y_counterfactual[i]);
        }
    }
    EXPECT_EQ(scenario_kind(1, 3), "scenario_1");
}

TEST(World, WorldCsvCarriesParameters) {
    const auto ex = generate(small(2, 4));
    std::ostringstream out;
    write_world_csv(out, ex.world, ex.ensemble);
    std::istringstream in{out.str()};
    const auto t = csv::Table::read(in);
    EXPECT_EQ(t.rows(), 4u + 2u * 4u);
    for (std::size_t r = 0; r < t.rows(); ++r) {
        const auto m = t.integer(r, "model_id");
        const auto l = static_cast<std::size_t>(t.integer(r, "location_id"));
        if (m < 0) {
            EXPECT_EQ(t.number(r, "r0"), ex.world.locations[l].r0_true);
        } else {
            EXPECT_EQ(t.number(r, "r0"), ex.ensemble.cell(static_cast<std::size_t>(m), l).r0);
        }
    }
}
