#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "ibex/config.hpp"

namespace ibex {

// Process exit statuses of the batch front-end.
inline constexpr int exit_ok = 0;
inline constexpr int exit_runtime_failure = 1;   // estimator/series failure
inline constexpr int exit_config_error = 2;      // parse or validation problem
inline constexpr int exit_confirmed_flag = 3;    // verify found a confirmed
                                                 // inequality violation

struct RunOptions {
    int workers = 1;
    std::optional<std::uint64_t> seed_override;
    std::optional<std::string> output_override;
};

struct RunResult {
    int status = exit_ok;
    std::string output_path;
    std::string message;  // one-line outcome for the terminal
};

// Renders the command's CSV artifact.  The text depends only on the config
// (worker count changes scheduling, never values).  The first line is a
// comment embedding the software version, the config hash, and the seed.
// For verify, *confirmed reports whether any flag survived confirmation.
//
// Stochastic commands assign stream `i` of the master seed to z_grid[i];
// verify derives its streams from stream 0 as documented in verify.hpp.
std::string render_csv(const ExperimentConfig& cfg, int workers,
                       bool* confirmed = nullptr);

// Applies overrides, renders, writes cfg.output, and maps the outcome to an
// exit status.  Never throws: failures come back as a status and message.
RunResult run_experiment(ExperimentConfig cfg, const RunOptions& opts);

}  // namespace ibex
