#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "ibex/errors.hpp"
#include "ibex/runner.hpp"
#include "ibex/version.hpp"

namespace {

int default_workers() {
    if (const char* env = std::getenv("IBEX_WORKERS")) {
        const long n = std::strtol(env, nullptr, 10);
        if (n >= 1 && n <= 1024) return static_cast<int>(n);
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exit-time survival and moments of iterated Brownian "
                 "processes, with inequality verification."};
    app.set_version_flag("--version", std::string("ibex ") + ibex::version);

    std::string config_path;
    app.add_option("--config", config_path, "experiment description (JSON)")
        ->required();
    std::optional<std::uint64_t> seed;
    app.add_option("--seed", seed, "override the config's master seed");
    std::optional<std::string> out;
    app.add_option("--out", out, "override the config's output path");
    int workers = default_workers();
    app.add_option("--workers", workers,
                   "worker threads (never affects values); default "
                   "$IBEX_WORKERS or 1")
        ->check(CLI::Range(1, 1024));

    CLI11_PARSE(app, argc, argv);

    ibex::ExperimentConfig cfg;
    try {
        cfg = ibex::parse_config_file(config_path);
    } catch (const ibex::ConfigError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return ibex::exit_config_error;
    }

    ibex::RunOptions opts;
    opts.workers = workers;
    opts.seed_override = seed;
    opts.output_override = out;

    const ibex::RunResult result = ibex::run_experiment(std::move(cfg), opts);
    std::fprintf(result.status == ibex::exit_ok ? stdout : stderr, "%s\n",
                 result.message.c_str());
    return result.status;
}
