#pragma once

#include "cfeval/approaches.hpp"
#include "cfeval/config.hpp"
#include "cfeval/error.hpp"
#include "cfeval/metrics.hpp"
#include "cfeval/world.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace cfeval {

inline constexpr const char *kVersion = "0.1.0";

/// A failure inside one stage of a run, tagged with the stage name
/// (world_gen, approach1, approach2, approach3, metrics, output).
class RunError : public Error {
  public:
    RunError(std::string stage, const std::string &what)
        : Error{stage + ": " + what}, stage_{std::move(stage)} {}

    const std::string &stage() const noexcept { return stage_; }

  private:
    std::string stage_;
};

/// One line of report.csv.
struct ReportRow {
    Approach approach = Approach::Plausible;
    Variant variant = Variant::Plain;
    std::size_t model_id = 0;
    std::size_t scenario_index = 0;
    double mae_of_means = 0.0;           // NaN for an empty Approach 1 bucket
    std::optional<metrics::KsResult> ks;  // unset when a sample has < 5 points
    double estimated_mean = 0.0;
    double true_mean = 0.0;
    std::size_t n_samples = 0;
};

struct DecompositionRow {
    std::size_t model_id = 0;
    std::size_t location_id = 0;
    std::size_t scenario_index = 0;
    metrics::Decomposition parts;
};

/// Approach 1 estimate against the true error at the chosen scenario.
struct DeviationRow {
    std::size_t model_id = 0;
    std::size_t location_id = 0;
    std::size_t chosen_scenario = 0;
    double deviation = 0.0;        // |x* - x^P|
    double estimated_error = 0.0;  // P^m(y|x^P) - P*(y|x*)
    double true_error = 0.0;       // P^m(y|x^P) - P*(y|x^P)
    bool included = true;
};

/// Observations implied by one Approach 2 model against the true
/// counterfactual observations.
struct ImpliedObservationRow {
    Variant variant = Variant::NoCovariate;
    std::size_t model_id = 0;
    std::size_t scenario_index = 0;
    double implied_mean = 0.0;
    double true_mean = 0.0;
    metrics::KsResult ks;
};

/// Per-location estimate against the per-location true error.
struct LocationMaeRow {
    Approach approach = Approach::Plausible;
    Variant variant = Variant::Plain;
    std::size_t model_id = 0;
    std::size_t scenario_index = 0;
    std::size_t location_id = 0;
    double estimated_mean = 0.0;
    double true_error = 0.0;
};

struct EvaluationReport {
    RunConfig config;
    std::vector<ReportRow> rows;
    std::vector<DecompositionRow> decomposition;
    std::vector<DeviationRow> deviation;
    std::vector<ImpliedObservationRow> implied_observations;
    std::vector<LocationMaeRow> location_mae;
    int total_redraws = 0;
    std::vector<std::string> files;  // emitted files, relative to the output dir

    /// Rows of one approach variant, in (model, scenario) order.
    std::vector<const ReportRow *> select(Approach a, Variant v) const;
};

struct RunOptions {
    unsigned threads = 1;
    std::size_t histogram_bins = 40;
    bool write_manifest = true;
};

/// Runs the full experiment and, when `out_dir` is set, writes world.csv,
/// projections.csv, approach_estimates.csv, report.csv, decomposition.csv,
/// a1_deviation.csv, implied_observations.csv, location_mae.csv,
/// densities.csv and manifest.json into it. Stage failures surface as
/// RunError; configuration problems as ConfigError.
EvaluationReport run(const RunConfig &config,
                     const std::optional<std::filesystem::path> &out_dir,
                     const RunOptions &options = {});

/// Lower-case hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);

/// Renders density.svg, assessment.svg and decomposition.svg from the CSV
/// files of a finished run. Returns the written paths. Missing inputs
/// raise ConfigError naming the file.
std::vector<std::filesystem::path> plot(const std::filesystem::path &report_dir,
                                        std::size_t model_id = 0);

} // namespace cfeval
