#pragma once

#include "cfeval/sir.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace cfeval {

/// Hyper-parameters of the sampling distributions. Normal spreads are
/// standard deviations.
struct DistributionRanges {
    double x_realized_lo = 0.3;
    double x_realized_hi = 0.5;
    double r0_lo = 2.0;
    double r0_hi = 3.0;
    double alpha_true_mean = 0.975;
    double alpha_true_sd = 0.01;
    double global_bias_sd = 0.05;
    double local_bias_sd = 0.05;
    double alpha_center_lo = 0.95;
    double alpha_center_hi = 1.0;
    double alpha_model_sd = 0.01;
};

struct ExperimentConfig {
    std::size_t n_locations = 50;
    std::size_t n_models = 10;
    std::vector<double> scenario_values{0.30, 0.50};
    std::uint64_t seed = 42;
    DistributionRanges ranges{};
    double horizon = sir::kDefaultHorizonDays;
    double step = sir::kDefaultStepDays;
    double infectious_period = 10.0;
    double i0 = 0.001;

    /// Throws DomainError on an unusable configuration.
    void validate() const;

    std::size_t n_scenarios() const noexcept { return scenario_values.size(); }
};

struct LocationTruth {
    double r0_true = 0.0;
    double alpha_true = 0.0;
    double x_realized = 0.0;
    double y_observed = 0.0;                   // P*_l(y | x*_l)
    std::vector<double> y_counterfactual;      // P*_l(y | x_i), one per scenario
};

struct TrueWorld {
    std::vector<double> scenario_values;
    std::vector<LocationTruth> locations;

    std::size_t n_locations() const noexcept { return locations.size(); }
    std::size_t n_scenarios() const noexcept { return scenario_values.size(); }
};

struct ModelParams {
    double global_bias = 0.0;   // b^m
    double alpha_center = 1.0;  // model-level alpha centre
};

/// One projection model's view of one location.
struct ModelCell {
    double local_bias = 0.0;          // b^m_l
    double alpha = 1.0;               // alpha^m_l
    double r0 = 0.0;                  // R0*_l + b^m + b^m_l
    int redraws = 0;                  // times b^m_l was redrawn to keep r0 > 0
    std::vector<double> projections;  // P^m_l(y | x_i)
    double reprojection = 0.0;        // P^m_l(y | x*_l)
};

class ModelEnsemble {
  public:
    ModelEnsemble() = default;
    ModelEnsemble(std::size_t n_models, std::size_t n_locations)
        : models_(n_models), cells_(n_models * n_locations), n_locations_{n_locations} {}

    std::size_t n_models() const noexcept { return models_.size(); }
    std::size_t n_locations() const noexcept { return n_locations_; }

    ModelParams &model(std::size_t m) { return models_.at(m); }
    const ModelParams &model(std::size_t m) const { return models_.at(m); }

    ModelCell &cell(std::size_t m, std::size_t l) { return cells_.at(index(m, l)); }
    const ModelCell &cell(std::size_t m, std::size_t l) const { return cells_.at(index(m, l)); }

    int total_redraws() const noexcept;

  private:
    std::size_t index(std::size_t m, std::size_t l) const noexcept { return m * n_locations_ + l; }

    std::vector<ModelParams> models_;
    std::vector<ModelCell> cells_;
    std::size_t n_locations_ = 0;
};

struct Experiment {
    TrueWorld world;
    ModelEnsemble ensemble;
};

/// Signed errors e^m_l(x_i) = P^m_l(y|x_i) - P*_l(y|x_i), laid out [m][l][i].
class TrueErrors {
  public:
    TrueErrors(std::size_t n_models, std::size_t n_locations, std::size_t n_scenarios)
        : values_(n_models * n_locations * n_scenarios), n_models_{n_models},
          n_locations_{n_locations}, n_scenarios_{n_scenarios} {}

    double &at(std::size_t m, std::size_t l, std::size_t i) { return values_.at(index(m, l, i)); }
    double at(std::size_t m, std::size_t l, std::size_t i) const {
        return values_.at(index(m, l, i));
    }

    /// Errors of model m at scenario i across all locations.
    std::vector<double> across_locations(std::size_t m, std::size_t i) const;

    std::size_t n_models() const noexcept { return n_models_; }
    std::size_t n_locations() const noexcept { return n_locations_; }
    std::size_t n_scenarios() const noexcept { return n_scenarios_; }

  private:
    std::size_t index(std::size_t m, std::size_t l, std::size_t i) const noexcept {
        return (m * n_locations_ + l) * n_scenarios_ + i;
    }

    std::vector<double> values_;
    std::size_t n_models_;
    std::size_t n_locations_;
    std::size_t n_scenarios_;
};

/// Draws every random parameter of the experiment without solving any SIR
/// system. Location draws come from stream (seed, Location, l), model draws
/// from (seed, Model, m) and per-pair draws from (seed, ModelLocation, m, l).
Experiment draw_parameters(const ExperimentConfig &config);

/// Fills every final size (observations, counterfactuals, projections and
/// reprojections) from the parameters already present in `experiment`.
void compute_outcomes(const ExperimentConfig &config, Experiment &experiment,
                      unsigned threads = 1);

/// draw_parameters followed by compute_outcomes.
Experiment generate(const ExperimentConfig &config, unsigned threads = 1);

/// An ensemble whose every model reproduces the true parameters exactly.
ModelEnsemble perfect_ensemble(const ExperimentConfig &config, const TrueWorld &world,
                               unsigned threads = 1);

TrueErrors true_errors(const TrueWorld &world, const ModelEnsemble &ensemble);

/// Label of scenario i in serialized output: scenario_low, scenario_high,
/// or scenario_<i> for interior scenarios of a longer list.
std::string scenario_kind(std::size_t i, std::size_t n_scenarios);

/// One row per (model, location, scenario point) with columns
/// model_id,location_id,x_kind,x_value,y_projected,y_observed_or_counterfactual
void write_projections_csv(std::ostream &out, const TrueWorld &world,
                           const ModelEnsemble &ensemble);

/// Per-location truth and per-(model, location) parameters.
void write_world_csv(std::ostream &out, const TrueWorld &world, const ModelEnsemble &ensemble);

} // namespace cfeval
