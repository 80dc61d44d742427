// Command-line front end: `cfeval run` executes an experiment, `cfeval plot`
// renders SVG figures from the CSV files of a finished run.

#include "cfeval/config.hpp"
#include "cfeval/error.hpp"
#include "cfeval/harness.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

int run_command(const std::string &config_path, std::string out_dir,
                std::optional<std::uint64_t> seed, unsigned threads) {
    cfeval::RunConfig config = cfeval::load_config(config_path);
    if (seed) {
        config.experiment.seed = *seed;
        config.validate();
    }
    const auto report = cfeval::run(config, out_dir, {.threads = threads});
    std::cout << "wrote " << report.files.size() << " files to " << out_dir << " ("
              << report.rows.size() << " report rows, " << report.total_redraws
              << " r0 redraws)\n";
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Counterfactual scenario-projection error evaluation"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
    auto *run = app.add_subcommand("run", "Run the simulation experiment and write CSV tables");
    run->add_option("--config", config_path, "Config file (key = value with sections)")
        ->required()
        ->check(CLI::ExistingFile);
    run->add_option("--out", out_dir, "Output directory (or set CFEVAL_OUT_DIR)");
    run->add_option("--seed", seed, "Override the experiment seed");
    run->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

    std::string in_dir;
    std::size_t model = 0;
    auto *plot = app.add_subcommand("plot", "Render SVG plots from a finished run");
    plot->add_option("--in", in_dir, "Directory written by `run`")->required();
    plot->add_option("--model", model, "Model shown in the density plot");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*run) {
            if (out_dir.empty()) {
                if (const char *env = std::getenv("CFEVAL_OUT_DIR")) out_dir = env;
            }
            if (out_dir.empty()) {
                std::cerr << "error: no output directory; pass --out or set CFEVAL_OUT_DIR\n";
                return kExitConfig;
            }
            return run_command(config_path, out_dir, seed, threads);
        }
        for (const auto &path : cfeval::plot(in_dir, model)) std::cout << path.string() << '\n';
        return 0;
    } catch (const cfeval::ConfigError &e) {
        std::cerr << "config error";
        if (e.line() > 0) std::cerr << " at line " << e.line();
        if (!e.field().empty()) std::cerr << " (field '" << e.field() << "')";
        std::cerr << ": " << e.what() << '\n';
        return kExitConfig;
    } catch (const cfeval::RunError &e) {
        std::cerr << "error in " << e.stage() << ": " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
