#pragma once

#include "cfeval/world.hpp"

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>

namespace cfeval {

/// Which approach variants a run evaluates, plus their shared settings.
struct ApproachToggles {
    bool approach1 = true;
    bool approach2_no_covariate = true;
    bool approach2_covariate = true;
    bool approach3_no_covariate = true;
    bool approach3_covariate = true;
    std::size_t n_samples = 10000;
    int basis_dim = 5;
    std::optional<double> plausibility_threshold;  // tau; unset means plain argmin
    double ks_alpha = 0.05;

    std::size_t n_variants() const noexcept {
        return static_cast<std::size_t>(approach1) + approach2_no_covariate + approach2_covariate +
               approach3_no_covariate + approach3_covariate;
    }
};

struct RunConfig {
    ExperimentConfig experiment{};
    ApproachToggles approaches{};

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

/// Parses `key = value` lines grouped under [experiment], [distributions],
/// [sir] and [approaches]. '#' and ';' start comments. Unknown sections or
/// keys, malformed values and duplicates raise ConfigError with the line
/// number and field name. Missing keys keep their defaults.
RunConfig parse_config(std::istream &in);
RunConfig load_config(const std::string &path);

/// Canonical text of every field, in the format parse_config reads. Two
/// configs with the same values always produce the same text.
std::string to_text(const RunConfig &config);

} // namespace cfeval
