#include "cfeval/config.hpp"

#include "cfeval/csv.hpp"
#include "cfeval/error.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <set>
#include <sstream>
#include <vector>

namespace cfeval {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string{s.substr(first, last - first + 1)};
}

struct ParseFailure {
    std::string reason;
};

double parse_double(const std::string &text) {
    double v = 0.0;
    const auto *end = text.data() + text.size();
    const auto [p, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || p != end) throw ParseFailure{"expected a number, got '" + text + "'"};
    return v;
}

template <typename Int>
Int parse_int(const std::string &text) {
    Int v{};
    const auto *end = text.data() + text.size();
    const auto [p, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || p != end) {
        throw ParseFailure{"expected a non-negative integer, got '" + text + "'"};
    }
    return v;
}

bool parse_bool(const std::string &text) {
    std::string t = text;
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
    if (t == "true" || t == "yes" || t == "on" || t == "1") return true;
    if (t == "false" || t == "no" || t == "off" || t == "0") return false;
    throw ParseFailure{"expected true or false, got '" + text + "'"};
}

std::vector<double> parse_list(const std::string &text) {
    std::vector<double> out;
    std::stringstream ss{text};
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(trim(item)));
    if (out.empty()) throw ParseFailure{"expected a comma-separated list of numbers"};
    return out;
}

std::string list_text(const std::vector<double> &v) {
    std::string out;
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (k) out += ", ";
        out += csv::format(v[k]);
    }
    return out;
}

struct Field {
    std::string section;
    std::string key;
    std::function<void(RunConfig &, const std::string &)> set;
    std::function<std::string(const RunConfig &)> get;
};

Field number(std::string section, std::string key, double ExperimentConfig::*member) {
    return {std::move(section), std::move(key),
            [member](RunConfig &c, const std::string &t) { c.experiment.*member = parse_double(t); },
            [member](const RunConfig &c) { return csv::format(c.experiment.*member); }};
}

Field range(std::string key, double DistributionRanges::*member) {
    return {"distributions", std::move(key),
            [member](RunConfig &c, const std::string &t) {
                c.experiment.ranges.*member = parse_double(t);
            },
            [member](const RunConfig &c) { return csv::format(c.experiment.ranges.*member); }};
}

Field toggle(std::string key, bool ApproachToggles::*member) {
    return {"approaches", std::move(key),
            [member](RunConfig &c, const std::string &t) { c.approaches.*member = parse_bool(t); },
            [member](const RunConfig &c) {
                return std::string{c.approaches.*member ? "true" : "false"};
            }};
}

const std::vector<Field> &fields() {
    static const std::vector<Field> table = [] {
        std::vector<Field> f;
        f.push_back({"experiment", "n_locations",
                     [](RunConfig &c, const std::string &t) {
                         c.experiment.n_locations = parse_int<std::size_t>(t);
                     },
                     [](const RunConfig &c) { return std::to_string(c.experiment.n_locations); }});
        f.push_back({"experiment", "n_models",
                     [](RunConfig &c, const std::string &t) {
                         c.experiment.n_models = parse_int<std::size_t>(t);
                     },
                     [](const RunConfig &c) { return std::to_string(c.experiment.n_models); }});
        f.push_back({"experiment", "scenario_values",
                     [](RunConfig &c, const std::string &t) {
                         c.experiment.scenario_values = parse_list(t);
                     },
                     [](const RunConfig &c) { return list_text(c.experiment.scenario_values); }});
        f.push_back({"experiment", "seed",
                     [](RunConfig &c, const std::string &t) {
                         c.experiment.seed = parse_int<std::uint64_t>(t);
                     },
                     [](const RunConfig &c) { return std::to_string(c.experiment.seed); }});

        f.push_back(range("x_realized_lo", &DistributionRanges::x_realized_lo));
        f.push_back(range("x_realized_hi", &DistributionRanges::x_realized_hi));
        f.push_back(range("r0_lo", &DistributionRanges::r0_lo));
        f.push_back(range("r0_hi", &DistributionRanges::r0_hi));
        f.push_back(range("alpha_true_mean", &DistributionRanges::alpha_true_mean));
        f.push_back(range("alpha_true_sd", &DistributionRanges::alpha_true_sd));
        f.push_back(range("global_bias_sd", &DistributionRanges::global_bias_sd));
        f.push_back(range("local_bias_sd", &DistributionRanges::local_bias_sd));
        f.push_back(range("alpha_center_lo", &DistributionRanges::alpha_center_lo));
        f.push_back(range("alpha_center_hi", &DistributionRanges::alpha_center_hi));
        f.push_back(range("alpha_model_sd", &DistributionRanges::alpha_model_sd));

        f.push_back(number("sir", "horizon", &ExperimentConfig::horizon));
        f.push_back(number("sir", "step", &ExperimentConfig::step));
        f.push_back(number("sir", "infectious_period", &ExperimentConfig::infectious_period));
        f.push_back(number("sir", "i0", &ExperimentConfig::i0));

        f.push_back(toggle("approach1", &ApproachToggles::approach1));
        f.push_back(toggle("approach2_no_covariate", &ApproachToggles::approach2_no_covariate));
        f.push_back(toggle("approach2_covariate", &ApproachToggles::approach2_covariate));
        f.push_back(toggle("approach3_no_covariate", &ApproachToggles::approach3_no_covariate));
        f.push_back(toggle("approach3_covariate", &ApproachToggles::approach3_covariate));
        f.push_back({"approaches", "n_samples",
                     [](RunConfig &c, const std::string &t) {
                         c.approaches.n_samples = parse_int<std::size_t>(t);
                     },
                     [](const RunConfig &c) { return std::to_string(c.approaches.n_samples); }});
        f.push_back({"approaches", "basis_dim",
                     [](RunConfig &c, const std::string &t) {
                         c.approaches.basis_dim = parse_int<int>(t);
                     },
                     [](const RunConfig &c) { return std::to_string(c.approaches.basis_dim); }});
        f.push_back({"approaches", "plausibility_threshold",
                     [](RunConfig &c, const std::string &t) {
                         if (t == "none") {
                             c.approaches.plausibility_threshold.reset();
                         } else {
                             c.approaches.plausibility_threshold = parse_double(t);
                         }
                     },
                     [](const RunConfig &c) {
                         const auto &tau = c.approaches.plausibility_threshold;
                         return tau ? csv::format(*tau) : std::string{"none"};
                     }});
        f.push_back({"approaches", "ks_alpha",
                     [](RunConfig &c, const std::string &t) {
                         c.approaches.ks_alpha = parse_double(t);
                     },
                     [](const RunConfig &c) { return csv::format(c.approaches.ks_alpha); }});
        return f;
    }();
    return table;
}

} // namespace

void RunConfig::validate() const {
    try {
        experiment.validate();
    } catch (const DomainError &e) {
        throw ConfigError(std::string{"invalid experiment settings: "} + e.what());
    }
    if (approaches.n_variants() == 0) {
        throw ConfigError("no approach variant is enabled", 0, "approaches");
    }
    if (approaches.n_samples == 0) throw ConfigError("n_samples must be >= 1", 0, "n_samples");
    if (approaches.basis_dim < 4) throw ConfigError("basis_dim must be >= 4", 0, "basis_dim");
    const bool without = approaches.approach2_no_covariate || approaches.approach3_no_covariate;
    const bool with = approaches.approach2_covariate || approaches.approach3_covariate;
    const std::size_t needed = static_cast<std::size_t>(approaches.basis_dim) + (with ? 2 : 1) + 1;
    if ((with || without) && experiment.n_locations < needed) {
        throw ConfigError("the spline approaches need n_locations >= " + std::to_string(needed) +
                              " with basis_dim = " + std::to_string(approaches.basis_dim) +
                              "; disable them or add locations",
                          0, "n_locations");
    }
    if (approaches.plausibility_threshold && !(*approaches.plausibility_threshold >= 0.0)) {
        throw ConfigError("plausibility_threshold must be >= 0", 0, "plausibility_threshold");
    }
    if (!(approaches.ks_alpha > 0.0 && approaches.ks_alpha < 1.0)) {
        throw ConfigError("ks_alpha must lie in (0, 1)", 0, "ks_alpha");
    }
}

RunConfig parse_config(std::istream &in) {
    RunConfig config;
    std::string section;
    std::set<std::string> seen;
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto comment = raw.find_first_of("#;");
        const std::string line = trim(std::string_view{raw}.substr(0, comment));
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("unterminated section header", line_no);
            section = trim(std::string_view{line}.substr(1, line.size() - 2));
            const bool known = std::any_of(fields().begin(), fields().end(),
                                           [&](const Field &f) { return f.section == section; });
            if (!known) throw ConfigError("unknown section [" + section + "]", line_no, section);
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line_no);
        const std::string key = trim(std::string_view{line}.substr(0, eq));
        const std::string value = trim(std::string_view{line}.substr(eq + 1));
        if (section.empty()) throw ConfigError("key outside of any section", line_no, key);

        const auto it = std::find_if(fields().begin(), fields().end(), [&](const Field &f) {
            return f.section == section && f.key == key;
        });
        if (it == fields().end()) {
            throw ConfigError("unknown key '" + key + "' in [" + section + "]", line_no, key);
        }
        if (!seen.insert(section + "." + key).second) {
            throw ConfigError("duplicate key '" + key + "'", line_no, key);
        }
        if (value.empty()) throw ConfigError("missing value for '" + key + "'", line_no, key);
        try {
            it->set(config, value);
        } catch (const ParseFailure &f) {
            throw ConfigError(key + ": " + f.reason, line_no, key);
        }
    }
    config.validate();
    return config;
}

RunConfig load_config(const std::string &path) {
    std::ifstream in{path};
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in);
}

std::string to_text(const RunConfig &config) {
    std::string out;
    std::string section;
    for (const auto &f : fields()) {
        if (f.section != section) {
            if (!section.empty()) out += '\n';
            section = f.section;
            out += "[" + section + "]\n";
        }
        out += f.key + " = " + f.get(config) + "\n";
    }
    return out;
}

} // namespace cfeval
