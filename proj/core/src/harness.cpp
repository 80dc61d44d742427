#include "cfeval/harness.hpp"

#include "cfeval/csv.hpp"
#include "cfeval/summary.hpp"

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <limits>
#include <sstream>

namespace cfeval {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <typename Fn>
auto stage(const char *name, Fn &&fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const ConfigError &) {
        throw;
    } catch (const RunError &) {
        throw;
    } catch (const std::exception &e) {
        throw RunError(name, e.what());
    }
}

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct Histogram {
    double lo = 0.0;
    double hi = 1.0;
    std::vector<double> density;
};

Histogram histogram(std::span<const double> sample, double lo, double hi, std::size_t bins) {
    Histogram h{lo, hi, std::vector<double>(bins, 0.0)};
    if (sample.empty() || !(hi > lo)) return h;
    const double width = (hi - lo) / static_cast<double>(bins);
    for (double v : sample) {
        if (v < lo || v > hi) continue;
        auto k = static_cast<std::size_t>((v - lo) / width);
        h.density[std::min(k, bins - 1)] += 1.0;
    }
    const double scale = 1.0 / (static_cast<double>(sample.size()) * width);
    for (double &d : h.density) d *= scale;
    return h;
}

/// Accumulates the output tables while the approaches run one at a time.
class Tables {
  public:
    Tables(const TrueWorld &world, const ModelEnsemble &ensemble, const TrueErrors &truth,
           const RunOptions &options, EvaluationReport &report)
        : world_{world}, ensemble_{ensemble}, truth_{truth}, options_{options}, report_{report},
          estimates_{estimates_text_}, densities_{densities_text_} {
        estimates_.header({"approach", "variant", "model_id", "scenario", "location_id", "median",
                           "q25", "q75", "q05", "q95", "n_samples", "mean", "extrapolated"});
        densities_.header({"approach", "variant", "model_id", "scenario", "bin_lo", "bin_hi",
                           "density"});
        const std::size_t I = world.n_scenarios();
        ranges_.resize(I);
        for (std::size_t i = 0; i < I; ++i) {
            double lo = std::numeric_limits<double>::infinity();
            double hi = -lo;
            for (std::size_t m = 0; m < truth.n_models(); ++m) {
                for (std::size_t l = 0; l < truth.n_locations(); ++l) {
                    lo = std::min(lo, truth.at(m, l, i));
                    hi = std::max(hi, truth.at(m, l, i));
                }
            }
            const double pad = std::max(hi - lo, 0.05);
            ranges_[i] = {lo - pad, hi + pad};
        }
        for (std::size_t m = 0; m < truth.n_models(); ++m) {
            for (std::size_t i = 0; i < I; ++i) {
                write_density("true", "true", m, i, truth.across_locations(m, i));
            }
        }
    }

    void add(const ErrorDistribution &d) {
        const auto true_errors = truth_.across_locations(d.model_id, d.scenario_index);
        ReportRow row;
        row.approach = d.approach;
        row.variant = d.variant;
        row.model_id = d.model_id;
        row.scenario_index = d.scenario_index;
        row.true_mean = mean(true_errors);
        row.n_samples = d.samples.size();
        if (d.flagged_empty) {
            row.mae_of_means = kNaN;
            row.estimated_mean = kNaN;
        } else {
            row.mae_of_means = metrics::mae_of_means(d, true_errors);
            row.estimated_mean = d.summary.mean;
            if (d.samples.size() >= 5) {
                row.ks = metrics::ks_two_sample(d.samples, true_errors,
                                                report_.config.approaches.ks_alpha);
            }
        }
        report_.rows.push_back(row);

        write_estimate(d);
        write_density(label(d.approach), label(d.variant), d.model_id, d.scenario_index, d.samples);
        if (d.approach == Approach::Plausible) return;
        for (std::size_t k = 0; k < d.segments.size(); ++k) {
            const auto view = d.location_view(k);
            write_estimate(view);
            const std::size_t l = d.segments[k].location_id;
            report_.location_mae.push_back({d.approach, d.variant, d.model_id, d.scenario_index, l,
                                            view.summary.mean,
                                            truth_.at(d.model_id, l, d.scenario_index)});
        }
    }

    void add_approach1(const Approach1Result &a1) {
        for (const auto &d : a1.distributions) add(d);
        const auto &sel = a1.selection;
        for (std::size_t m = 0; m < ensemble_.n_models(); ++m) {
            for (std::size_t l = 0; l < world_.n_locations(); ++l) {
                const std::size_t i = sel.chosen[l];
                const double est = ensemble_.cell(m, l).projections[i] -
                                   world_.locations[l].y_observed;
                report_.deviation.push_back({m, l, i, sel.deviation[l], est, truth_.at(m, l, i),
                                             sel.included[l]});
                if (sel.included[l]) {
                    report_.location_mae.push_back({Approach::Plausible, Variant::Plain, m, i, l,
                                                    a1.point_error(m, l), truth_.at(m, l, i)});
                }
            }
        }
    }

    void add_implied(const ErrorDistribution &d) {
        const auto implied = implied_observations(d, ensemble_);
        std::vector<double> truth(world_.n_locations());
        for (std::size_t l = 0; l < truth.size(); ++l) {
            truth[l] = world_.locations[l].y_counterfactual[d.scenario_index];
        }
        report_.implied_observations.push_back(
            {d.variant, d.model_id, d.scenario_index, mean(implied), mean(truth),
             metrics::ks_two_sample(implied, truth, report_.config.approaches.ks_alpha)});
    }

    std::string estimates() const { return estimates_text_.str(); }
    std::string densities() const { return densities_text_.str(); }

  private:
    void write_estimate(const ErrorDistribution &d) {
        const auto &s = d.summary;
        const bool empty = d.flagged_empty;
        estimates_.row(label(d.approach), label(d.variant), d.model_id,
                       scenario_kind(d.scenario_index, world_.n_scenarios()), d.location_id,
                       empty ? kNaN : s.median, empty ? kNaN : s.q25, empty ? kNaN : s.q75,
                       empty ? kNaN : s.q05, empty ? kNaN : s.q95, d.samples.size(),
                       empty ? kNaN : s.mean, d.extrapolated);
    }

    void write_density(const std::string &approach, const std::string &variant, std::size_t m,
                       std::size_t i, std::span<const double> sample) {
        const auto [lo, hi] = ranges_[i];
        const auto h = histogram(sample, lo, hi, options_.histogram_bins);
        const double width = (hi - lo) / static_cast<double>(h.density.size());
        const auto kind = scenario_kind(i, world_.n_scenarios());
        for (std::size_t k = 0; k < h.density.size(); ++k) {
            densities_.row(approach, variant, m, kind, lo + width * static_cast<double>(k),
                           lo + width * static_cast<double>(k + 1), h.density[k]);
        }
    }

    const TrueWorld &world_;
    const ModelEnsemble &ensemble_;
    const TrueErrors &truth_;
    const RunOptions &options_;
    EvaluationReport &report_;
    std::ostringstream estimates_text_;
    std::ostringstream densities_text_;
    csv::Writer estimates_;
    csv::Writer densities_;
    std::vector<std::pair<double, double>> ranges_;
};

std::string report_csv(const EvaluationReport &r, std::size_t n_scenarios) {
    std::ostringstream out;
    csv::Writer w{out};
    w.header({"approach", "variant", "model_id", "scenario", "mae_of_means", "ks_D", "ks_critical",
              "significant", "estimated_mean", "true_mean", "n_samples"});
    for (const auto &row : r.rows) {
        const auto kind = scenario_kind(row.scenario_index, n_scenarios);
        if (row.ks) {
            w.row(label(row.approach), label(row.variant), row.model_id, kind, row.mae_of_means,
                  row.ks->statistic, row.ks->critical_value, row.ks->significant,
                  row.estimated_mean, row.true_mean, row.n_samples);
        } else {
            w.row(label(row.approach), label(row.variant), row.model_id, kind, row.mae_of_means,
                  kNaN, kNaN, "NA", row.estimated_mean, row.true_mean, row.n_samples);
        }
    }
    return out.str();
}

std::string decomposition_csv(const EvaluationReport &r, const TrueWorld &world,
                              const ModelEnsemble &ensemble) {
    std::ostringstream out;
    csv::Writer w{out};
    w.header({"model_id", "location_id", "scenario", "projection", "obs_counterfactual",
              "obs_realized", "observed_deviation", "calibration_error", "scenario_spec_error",
              "total_error"});
    for (const auto &d : r.decomposition) {
        const auto &loc = world.locations[d.location_id];
        w.row(d.model_id, d.location_id, scenario_kind(d.scenario_index, world.n_scenarios()),
              ensemble.cell(d.model_id, d.location_id).projections[d.scenario_index],
              loc.y_counterfactual[d.scenario_index], loc.y_observed, d.parts.observed_deviation,
              d.parts.calibration_error, d.parts.scenario_spec_error, d.parts.total_error);
    }
    return out.str();
}

std::string deviation_csv(const EvaluationReport &r, const TrueWorld &world) {
    std::ostringstream out;
    csv::Writer w{out};
    w.header({"model_id", "location_id", "x_realized", "chosen_scenario", "deviation",
              "estimated_error", "true_error", "abs_difference", "included"});
    for (const auto &d : r.deviation) {
        w.row(d.model_id, d.location_id, world.locations[d.location_id].x_realized,
              scenario_kind(d.chosen_scenario, world.n_scenarios()), d.deviation,
              d.estimated_error, d.true_error, std::abs(d.estimated_error - d.true_error),
              d.included);
    }
    return out.str();
}

std::string implied_csv(const EvaluationReport &r, std::size_t n_scenarios) {
    std::ostringstream out;
    csv::Writer w{out};
    w.header({"variant", "model_id", "scenario", "implied_mean", "true_mean", "ks_D",
              "ks_critical", "significant"});
    for (const auto &d : r.implied_observations) {
        w.row(label(d.variant), d.model_id, scenario_kind(d.scenario_index, n_scenarios),
              d.implied_mean, d.true_mean, d.ks.statistic, d.ks.critical_value, d.ks.significant);
    }
    return out.str();
}

std::string location_mae_csv(const EvaluationReport &r, std::size_t n_scenarios) {
    std::ostringstream out;
    csv::Writer w{out};
    w.header({"approach", "variant", "model_id", "scenario", "location_id", "estimated_mean",
              "true_error", "abs_error"});
    for (const auto &d : r.location_mae) {
        w.row(label(d.approach), label(d.variant), d.model_id,
              scenario_kind(d.scenario_index, n_scenarios), d.location_id, d.estimated_mean,
              d.true_error, std::abs(d.estimated_mean - d.true_error));
    }
    return out.str();
}

} // namespace

std::vector<const ReportRow *> EvaluationReport::select(Approach a, Variant v) const {
    std::vector<const ReportRow *> out;
    for (const auto &row : rows) {
        if (row.approach == a && row.variant == v) out.push_back(&row);
    }
    return out;
}

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("sha256: digest failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int k = 0; k < len; ++k) {
        out += hex[digest[k] >> 4];
        out += hex[digest[k] & 0xF];
    }
    return out;
}

EvaluationReport run(const RunConfig &config, const std::optional<std::filesystem::path> &out_dir,
                     const RunOptions &options) {
    config.validate();
    const std::string started = utc_now();
    const unsigned threads = std::max(1U, options.threads);

    EvaluationReport report;
    report.config = config;
    const auto &ac = config.approaches;

    Experiment ex = stage("world_gen", [&] { return generate(config.experiment, threads); });
    const auto &world = ex.world;
    const auto &ensemble = ex.ensemble;
    report.total_redraws = ensemble.total_redraws();
    const TrueErrors truth = stage("world_gen", [&] { return true_errors(world, ensemble); });

    stage("metrics", [&] {
        for (std::size_t m = 0; m < ensemble.n_models(); ++m) {
            for (std::size_t l = 0; l < world.n_locations(); ++l) {
                for (std::size_t i = 0; i < world.n_scenarios(); ++i) {
                    report.decomposition.push_back(
                        {m, l, i,
                         metrics::decompose(ensemble.cell(m, l).projections[i],
                                            world.locations[l].y_counterfactual[i],
                                            world.locations[l].y_observed)});
                }
            }
        }
    });

    Tables tables{world, ensemble, truth, options, report};

    if (ac.approach1) {
        stage("approach1", [&] {
            tables.add_approach1(approach1(world, ensemble, ac.plausibility_threshold));
        });
    }

    auto estimation = [&](bool covariate) {
        EstimationOptions o;
        o.include_covariate = covariate;
        o.n_samples = ac.n_samples;
        o.spline.basis_dim = ac.basis_dim;
        o.seed = config.experiment.seed;
        o.threads = threads;
        return o;
    };
    for (bool covariate : {false, true}) {
        if (!(covariate ? ac.approach2_covariate : ac.approach2_no_covariate)) continue;
        stage("approach2", [&] {
            const auto a2 = approach2(world, ensemble, estimation(covariate));
            for (const auto &d : a2.distributions) {
                tables.add(d);
                tables.add_implied(d);
            }
        });
    }
    for (bool covariate : {false, true}) {
        if (!(covariate ? ac.approach3_covariate : ac.approach3_no_covariate)) continue;
        stage("approach3", [&] {
            const auto a3 = approach3(world, ensemble, estimation(covariate));
            for (const auto &d : a3.distributions) tables.add(d);
        });
    }

    if (!out_dir) return report;

    stage("output", [&] {
        namespace fs = std::filesystem;
        fs::create_directories(*out_dir);
        const std::size_t I = world.n_scenarios();
        std::vector<std::pair<std::string, std::string>> files;

        std::ostringstream world_text;
        write_world_csv(world_text, world, ensemble);
        files.emplace_back("world.csv", world_text.str());
        std::ostringstream projections_text;
        write_projections_csv(projections_text, world, ensemble);
        files.emplace_back("projections.csv", projections_text.str());
        files.emplace_back("approach_estimates.csv", tables.estimates());
        files.emplace_back("report.csv", report_csv(report, I));
        files.emplace_back("decomposition.csv", decomposition_csv(report, world, ensemble));
        files.emplace_back("a1_deviation.csv", deviation_csv(report, world));
        files.emplace_back("implied_observations.csv", implied_csv(report, I));
        files.emplace_back("location_mae.csv", location_mae_csv(report, I));
        files.emplace_back("densities.csv", tables.densities());

        nlohmann::ordered_json manifest;
        const std::string config_text = to_text(config);
        manifest["version"] = kVersion;
        manifest["seed"] = config.experiment.seed;
        manifest["config_sha256"] = sha256_hex(config_text);
        manifest["config"] = config_text;
        manifest["threads"] = threads;
        manifest["total_redraws"] = report.total_redraws;
        manifest["started_utc"] = started;
        auto &listed = manifest["files"] = nlohmann::ordered_json::array();

        for (const auto &[name, text] : files) {
            std::ofstream f{*out_dir / name, std::ios::binary};
            f << text;
            if (!f) throw Error("cannot write " + (*out_dir / name).string());
            listed.push_back({{"name", name}, {"sha256", sha256_hex(text)}, {"bytes", text.size()}});
            report.files.push_back(name);
        }
        if (options.write_manifest) {
            manifest["finished_utc"] = utc_now();
            std::ofstream f{*out_dir / "manifest.json"};
            f << manifest.dump(2) << '\n';
            if (!f) throw Error("cannot write manifest.json");
            report.files.push_back("manifest.json");
        }
    });
    return report;
}

} // namespace cfeval
