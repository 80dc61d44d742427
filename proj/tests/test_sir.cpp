#include "cfeval/error.hpp"
#include "cfeval/rng.hpp"
#include "cfeval/sir.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <array>

using cfeval::sir::final_size;
using cfeval::sir::simulate;
using cfeval::sir::SirParams;

TEST(Sir, NoTransmissionLeavesSusceptiblesUntouched) {
    SirParams p{.r0 = 0.0, .alpha = 1.0, .v = 0.3};
    const auto traj = simulate(p);
    for (double s : traj.s) EXPECT_EQ(s, traj.s.front());
    EXPECT_LT(traj.i.back(), 1e-20);
    EXPECT_EQ(final_size(p), 0.0);
}

TEST(Sir, MatchesFixedPointAndFineStepOracles) {
    SirParams p{.r0 = 2.5, .alpha = 1.0, .v = 0.3};
    const double fs = final_size(p);
    EXPECT_NEAR(fs, oracle::final_size_fixed_point(2.5, 0.3), 1e-3);
    EXPECT_NEAR(fs, oracle::final_size_rk4(2.5, 1.0, 0.3, 548.0, 0.0025), 1e-6);
}

TEST(Sir, SubcriticalOutbreakStaysMinor) {
    SirParams p{.r0 = 2.0, .alpha = 1.0, .v = 0.6};
    const double s0 = 1.0 - p.v;
    const double r_eff = p.r0 * s0;
    // Branching bound on cumulative infections, relative to S(0).
    const double bound = p.i0 / (1.0 - r_eff) / s0;
    const double fs = final_size(p);
    EXPECT_LT(fs, 0.05);
    EXPECT_LE(fs, bound);
}

TEST(Sir, HigherCoverageShrinksOutbreak) {
    EXPECT_LT(final_size({.r0 = 3.0, .alpha = 1.0, .v = 0.5}),
              final_size({.r0 = 3.0, .alpha = 1.0, .v = 0.3}));
}

// With N = 1 the infected fraction is below one, so I^alpha grows as alpha
// falls; the ordering is read off the independent integrator.
TEST(Sir, AlphaOrderingMatchesReferenceIntegrator) {
    const double low = final_size({.r0 = 2.5, .alpha = 0.95, .v = 0.3});
    const double high = final_size({.r0 = 2.5, .alpha = 1.0, .v = 0.3});
    const double ref_low = oracle::final_size_rk4(2.5, 0.95, 0.3, 548.0, 0.0025);
    const double ref_high = oracle::final_size_rk4(2.5, 1.0, 0.3, 548.0, 0.0025);
    EXPECT_NEAR(low, ref_low, 1e-6);
    EXPECT_NEAR(high, ref_high, 1e-6);
    EXPECT_EQ(low < high, ref_low < ref_high);
    EXPECT_GT(std::abs(low - high), 1e-3);
}

TEST(Sir, FinalSizeEqualsTrajectoryExtraction) {
    SirParams p{.r0 = 2.5, .alpha = 1.0, .v = 0.3};
    EXPECT_EQ(final_size(p), final_size(simulate(p)));
}

TEST(Sir, TrajectoryEndsExactlyOnHorizon) {
    const auto traj = simulate({}, 10.1, 0.25);
    EXPECT_DOUBLE_EQ(traj.times.back(), 10.1);
    EXPECT_EQ(traj.times.front(), 0.0);
    EXPECT_EQ(traj.times.size(), traj.s.size());
}

TEST(Sir, InitialState) {
    const auto traj = simulate({.r0 = 2.0, .alpha = 1.0, .v = 0.4, .i0 = 0.002});
    EXPECT_DOUBLE_EQ(traj.s[0], 0.6);
    EXPECT_DOUBLE_EQ(traj.i[0], 0.002);
    EXPECT_DOUBLE_EQ(traj.r[0], 0.398);
}

TEST(Sir, RejectsInvalidParameters) {
    using cfeval::DomainError;
    EXPECT_THROW(final_size({.r0 = -0.1}), DomainError);
    EXPECT_THROW(final_size({.alpha = 0.0}), DomainError);
    EXPECT_THROW(final_size({.v = 1.0}), DomainError);
    EXPECT_THROW(final_size({.v = -0.1}), DomainError);
    EXPECT_THROW(final_size({.infectious_period = 0.0}), DomainError);
    EXPECT_THROW(final_size({.v = 0.5, .i0 = 0.5}), DomainError);
    EXPECT_THROW(final_size({.i0 = 0.0}), DomainError);
    EXPECT_THROW(final_size({}, 0.0), DomainError);
    EXPECT_THROW(final_size({}, 10.0, -1.0), DomainError);
}

TEST(Sir, NonFiniteStateIsReported) {
    // A huge transmission rate with a coarse step overshoots into NaN.
    EXPECT_THROW(final_size({.r0 = 1e200, .alpha = 1.0, .v = 0.0}, 10.0, 5.0),
                 cfeval::NumericalError);
}

class SirDraws : public ::testing::TestWithParam<int> {};

TEST_P(SirDraws, ConservationBoundsAndMonotoneCompartments) {
    cfeval::Stream rng{static_cast<std::uint64_t>(GetParam())};
    for (int k = 0; k < 20; ++k) {
        SirParams p{.r0 = rng.uniform(1.8, 3.2), .alpha = rng.normal(0.975, 0.02),
                    .v = rng.uniform(0.25, 0.55)};
        const auto traj = simulate(p);
        for (std::size_t t = 0; t < traj.times.size(); ++t) {
            ASSERT_LE(std::abs(traj.s[t] + traj.i[t] + traj.r[t] - 1.0), 1e-6);
            if (t > 0) {
                ASSERT_LE(traj.s[t], traj.s[t - 1]);
                ASSERT_GE(traj.r[t], traj.r[t - 1]);
            }
        }
        const double fs = final_size(traj);
        EXPECT_GE(fs, 0.0);
        EXPECT_LE(fs, 1.0);
    }
}

TEST_P(SirDraws, StepHalvingChangesLittle) {
    cfeval::Stream rng{1000 + static_cast<std::uint64_t>(GetParam())};
    for (int k = 0; k < 5; ++k) {
        SirParams p{.r0 = rng.uniform(2, 3), .alpha = rng.uniform(0.95, 1.0),
                    .v = rng.uniform(0.3, 0.5)};
        EXPECT_LE(std::abs(final_size(p, 548, 0.25) - final_size(p, 548, 0.125)), 1e-4);
    }
}

INSTANTIATE_TEST_SUITE_P(Seeds, SirDraws, ::testing::Values(1, 2, 3, 4, 5));

TEST(Sir, GridMonotonicityInCoverageAndR0) {
    const std::array<double, 5> r0s{2.0, 2.25, 2.5, 2.75, 3.0};
    const std::array<double, 5> vs{0.3, 0.35, 0.4, 0.45, 0.5};
    const std::array<double, 5> alphas{0.95, 0.9625, 0.975, 0.9875, 1.0};
    for (double a : alphas) {
        for (std::size_t i = 0; i < r0s.size(); ++i) {
            for (std::size_t j = 0; j < vs.size(); ++j) {
                if (r0s[i] * (1 - vs[j]) <= 1.2) continue;
                const double here = final_size({.r0 = r0s[i], .alpha = a, .v = vs[j]});
                if (j + 1 < vs.size() && r0s[i] * (1 - vs[j + 1]) > 1.2) {
                    EXPECT_GT(here, final_size({.r0 = r0s[i], .alpha = a, .v = vs[j + 1]}));
                }
                if (i + 1 < r0s.size()) {
                    EXPECT_LT(here, final_size({.r0 = r0s[i + 1], .alpha = a, .v = vs[j]}));
                }
            }
        }
    }
}

TEST(Sir, AgreesWithFixedPointOnceEpidemicHasEnded) {
    for (double r0 : {2.0, 2.5, 3.0}) {
        for (double v : {0.3, 0.4, 0.5}) {
            EXPECT_NEAR(final_size({.r0 = r0, .alpha = 1.0, .v = v}, 2000.0),
                        oracle::final_size_fixed_point(r0, v), 1e-5)
                << "r0=" << r0 << " v=" << v;
        }
    }
}
