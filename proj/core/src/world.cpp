#include "cfeval/world.hpp"

#include "cfeval/csv.hpp"
#include "cfeval/error.hpp"
#include "cfeval/parallel.hpp"
#include "cfeval/rng.hpp"

#include <cmath>
#include <ostream>
#include <string>

namespace cfeval {

namespace {

// Bounded so an absurd configuration fails loudly instead of spinning.
constexpr int kMaxRedraws = 1000;

sir::SirParams sir_params(const ExperimentConfig &c, double r0, double alpha, double v) {
    return {.r0 = r0, .alpha = alpha, .v = v, .infectious_period = c.infectious_period, .i0 = c.i0};
}

double solve(const ExperimentConfig &c, double r0, double alpha, double v) {
    return sir::final_size(sir_params(c, r0, alpha, v), c.horizon, c.step);
}

/// Fills the projections and reprojection of one cell from its r0/alpha.
void project(const ExperimentConfig &c, const TrueWorld &world, std::size_t l, ModelCell &cell) {
    cell.projections.resize(world.n_scenarios());
    for (std::size_t i = 0; i < world.n_scenarios(); ++i) {
        cell.projections[i] = solve(c, cell.r0, cell.alpha, world.scenario_values[i]);
    }
    cell.reprojection = solve(c, cell.r0, cell.alpha, world.locations[l].x_realized);
}

void observe(const ExperimentConfig &c, const TrueWorld &world, LocationTruth &loc) {
    loc.y_observed = solve(c, loc.r0_true, loc.alpha_true, loc.x_realized);
    loc.y_counterfactual.resize(world.n_scenarios());
    for (std::size_t i = 0; i < world.n_scenarios(); ++i) {
        loc.y_counterfactual[i] = solve(c, loc.r0_true, loc.alpha_true, world.scenario_values[i]);
    }
}

} // namespace

void ExperimentConfig::validate() const {
    auto fail = [](const std::string &what) { throw DomainError("invalid experiment config: " + what); };
    if (n_locations < 2) fail("n_locations must be >= 2");
    if (n_models < 1) fail("n_models must be >= 1");
    if (scenario_values.empty()) fail("scenario_values must not be empty");
    for (std::size_t i = 0; i < scenario_values.size(); ++i) {
        const double x = scenario_values[i];
        if (!(x >= 0.0 && x < 1.0)) fail("scenario values must lie in [0, 1)");
        if (i > 0 && !(x > scenario_values[i - 1])) fail("scenario_values must be strictly increasing");
    }
    const auto &r = ranges;
    if (!(r.x_realized_lo >= 0.0 && r.x_realized_lo < r.x_realized_hi && r.x_realized_hi < 1.0)) {
        fail("realized coverage range must satisfy 0 <= lo < hi < 1");
    }
    if (!(r.r0_lo > 0.0 && r.r0_lo < r.r0_hi)) fail("r0 range must satisfy 0 < lo < hi");
    if (!(r.alpha_center_lo > 0.0 && r.alpha_center_lo <= r.alpha_center_hi)) {
        fail("alpha centre range must satisfy 0 < lo <= hi");
    }
    for (double sd : {r.alpha_true_sd, r.global_bias_sd, r.local_bias_sd, r.alpha_model_sd}) {
        if (!(sd >= 0.0) || !std::isfinite(sd)) fail("standard deviations must be finite and >= 0");
    }
    if (!(horizon > 0.0) || !(step > 0.0)) fail("horizon and step must be positive");
    if (!(infectious_period > 0.0)) fail("infectious_period must be positive");
    if (!(i0 > 0.0 && i0 < 1.0 - scenario_values.back() && i0 < 1.0 - r.x_realized_hi)) {
        fail("i0 must be positive and below 1 - max coverage");
    }
}

int ModelEnsemble::total_redraws() const noexcept {
    int total = 0;
    for (const auto &c : cells_) total += c.redraws;
    return total;
}

std::vector<double> TrueErrors::across_locations(std::size_t m, std::size_t i) const {
    std::vector<double> out(n_locations_);
    for (std::size_t l = 0; l < n_locations_; ++l) out[l] = at(m, l, i);
    return out;
}

Experiment draw_parameters(const ExperimentConfig &config) {
    config.validate();
    const auto &r = config.ranges;
    const std::size_t L = config.n_locations;
    const std::size_t M = config.n_models;

    Experiment ex;
    ex.world.scenario_values = config.scenario_values;
    ex.world.locations.resize(L);
    for (std::size_t l = 0; l < L; ++l) {
        Stream s{config.seed, StreamKind::Location, {l}};
        auto &loc = ex.world.locations[l];
        loc.x_realized = s.uniform(r.x_realized_lo, r.x_realized_hi);
        loc.r0_true = s.uniform(r.r0_lo, r.r0_hi);
        loc.alpha_true = s.normal(r.alpha_true_mean, r.alpha_true_sd);
        if (!(loc.alpha_true > 0.0)) {
            throw DomainError("drawn alpha_true <= 0 at location " + std::to_string(l));
        }
    }

    ex.ensemble = ModelEnsemble{M, L};
    for (std::size_t m = 0; m < M; ++m) {
        Stream s{config.seed, StreamKind::Model, {m}};
        auto &model = ex.ensemble.model(m);
        model.global_bias = s.normal(0.0, r.global_bias_sd);
        model.alpha_center = s.uniform(r.alpha_center_lo, r.alpha_center_hi);
        for (std::size_t l = 0; l < L; ++l) {
            Stream pair{config.seed, StreamKind::ModelLocation, {m, l}};
            auto &cell = ex.ensemble.cell(m, l);
            cell.alpha = pair.normal(model.alpha_center, r.alpha_model_sd);
            if (!(cell.alpha > 0.0)) {
                throw DomainError("drawn model alpha <= 0 at (model " + std::to_string(m) +
                                  ", location " + std::to_string(l) + ")");
            }
            const double base = ex.world.locations[l].r0_true + model.global_bias;
            cell.local_bias = pair.normal(0.0, r.local_bias_sd);
            cell.r0 = base + cell.local_bias;
            while (!(cell.r0 > 0.0)) {
                if (++cell.redraws > kMaxRedraws) {
                    throw DomainError("could not draw a positive model r0 at (model " +
                                      std::to_string(m) + ", location " + std::to_string(l) + ")");
                }
                cell.local_bias = pair.normal(0.0, r.local_bias_sd);
                cell.r0 = base + cell.local_bias;
            }
        }
    }
    return ex;
}

void compute_outcomes(const ExperimentConfig &config, Experiment &ex, unsigned threads) {
    auto &world = ex.world;
    auto &ensemble = ex.ensemble;
    const std::size_t L = world.n_locations();
    if (ensemble.n_locations() != L) {
        throw StructuralError("compute_outcomes: ensemble/world location count mismatch");
    }
    // One task per location for the truth, then one per (model, location).
    parallel_for(L, threads, [&](std::size_t l) { observe(config, world, world.locations[l]); });
    parallel_for(ensemble.n_models() * L, threads, [&](std::size_t k) {
        const std::size_t m = k / L;
        const std::size_t l = k % L;
        project(config, world, l, ensemble.cell(m, l));
    });
}

Experiment generate(const ExperimentConfig &config, unsigned threads) {
    Experiment ex = draw_parameters(config);
    compute_outcomes(config, ex, threads);
    return ex;
}

ModelEnsemble perfect_ensemble(const ExperimentConfig &config, const TrueWorld &world,
                               unsigned threads) {
    const std::size_t L = world.n_locations();
    ModelEnsemble ensemble{config.n_models, L};
    for (std::size_t m = 0; m < config.n_models; ++m) {
        ensemble.model(m) = ModelParams{.global_bias = 0.0, .alpha_center = 0.0};
        for (std::size_t l = 0; l < L; ++l) {
            auto &cell = ensemble.cell(m, l);
            cell.r0 = world.locations[l].r0_true;
            cell.alpha = world.locations[l].alpha_true;
        }
    }
    parallel_for(config.n_models * L, threads, [&](std::size_t k) {
        project(config, world, k % L, ensemble.cell(k / L, k % L));
    });
    return ensemble;
}

TrueErrors true_errors(const TrueWorld &world, const ModelEnsemble &ensemble) {
    const std::size_t L = world.n_locations();
    const std::size_t I = world.n_scenarios();
    if (ensemble.n_locations() != L) {
        throw StructuralError("true_errors: world has " + std::to_string(L) +
                              " locations, ensemble has " + std::to_string(ensemble.n_locations()));
    }
    TrueErrors out{ensemble.n_models(), L, I};
    for (std::size_t m = 0; m < ensemble.n_models(); ++m) {
        for (std::size_t l = 0; l < L; ++l) {
            const auto &cell = ensemble.cell(m, l);
            const auto &loc = world.locations[l];
            if (cell.projections.size() != I || loc.y_counterfactual.size() != I) {
                throw StructuralError("true_errors: scenario count mismatch at (model " +
                                      std::to_string(m) + ", location " + std::to_string(l) + ")");
            }
            for (std::size_t i = 0; i < I; ++i) {
                out.at(m, l, i) = cell.projections[i] - loc.y_counterfactual[i];
            }
        }
    }
    return out;
}

std::string scenario_kind(std::size_t i, std::size_t n_scenarios) {
    if (i == 0) return "scenario_low";
    if (i + 1 == n_scenarios) return "scenario_high";
    return "scenario_" + std::to_string(i);
}

void write_projections_csv(std::ostream &out, const TrueWorld &world,
                           const ModelEnsemble &ensemble) {
    csv::Writer w{out};
    w.header({"model_id", "location_id", "x_kind", "x_value", "y_projected",
              "y_observed_or_counterfactual"});
    const std::size_t I = world.n_scenarios();
    for (std::size_t m = 0; m < ensemble.n_models(); ++m) {
        for (std::size_t l = 0; l < world.n_locations(); ++l) {
            const auto &cell = ensemble.cell(m, l);
            const auto &loc = world.locations[l];
            for (std::size_t i = 0; i < I; ++i) {
                w.row(m, l, scenario_kind(i, I), world.scenario_values[i], cell.projections[i],
                      loc.y_counterfactual[i]);
            }
            w.row(m, l, "realized", loc.x_realized, cell.reprojection, loc.y_observed);
        }
    }
}

void write_world_csv(std::ostream &out, const TrueWorld &world, const ModelEnsemble &ensemble) {
    csv::Writer w{out};
    w.header({"model_id", "location_id", "r0", "alpha", "global_bias", "local_bias",
              "alpha_center", "x_realized", "redraws"});
    // model_id -1 carries the true location parameters.
    for (std::size_t l = 0; l < world.n_locations(); ++l) {
        const auto &loc = world.locations[l];
        w.row(-1, l, loc.r0_true, loc.alpha_true, 0.0, 0.0, 0.0, loc.x_realized, 0);
    }
    for (std::size_t m = 0; m < ensemble.n_models(); ++m) {
        const auto &model = ensemble.model(m);
        for (std::size_t l = 0; l < world.n_locations(); ++l) {
            const auto &cell = ensemble.cell(m, l);
            w.row(static_cast<long long>(m), l, cell.r0, cell.alpha, model.global_bias,
                  cell.local_bias, model.alpha_center, world.locations[l].x_realized,
                  cell.redraws);
        }
    }
}

} // namespace cfeval
