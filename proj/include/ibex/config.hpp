#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ibex/domain.hpp"
#include "ibex/interval_exit.hpp"
#include "ibex/iterated.hpp"
#include "ibex/verify.hpp"

namespace ibex {

enum class Command { survival, moments, verify, sign_scan, crosscheck };

std::string command_name(Command c);

enum class EstimatorMethod { conditional, quadrature, pathwise };

std::string estimator_method_name(EstimatorMethod m);

struct EstimatorConfig {
    EstimatorMethod method = EstimatorMethod::conditional;
    std::size_t count = 100000;
    double dt = 0.0;     // inner walker step; 0 picks the domain default
    double dt_y = 1e-3;  // outer path step for the pathwise estimator
    int order = 32;
    int refined_order = 48;
};

struct VerificationConfig {
    double k = 3.0;
    std::size_t confirm_factor = 4;
    double dt_scale = 1e-4;
};

// A fully parsed and validated experiment description.  parse_config_text
// rejects anything a command could not run with, so holders of a value can
// assume per-command required fields are present and well-formed.
struct ExperimentConfig {
    Command command = Command::survival;
    ProcessKind process = ProcessKind::ibm;
    std::optional<Domain> domain;
    std::optional<Comparison> comparison;  // verify only
    std::vector<std::vector<double>> z_grid;
    std::vector<double> t_grid;
    std::vector<double> p_grid;
    std::vector<double> u_grid;  // sign-scan only
    std::vector<double> v_grid;  // sign-scan only
    EstimatorConfig estimator;
    VerificationConfig verification;
    SeriesParams series;
    std::optional<std::uint64_t> master_seed;
    std::uint64_t chunk_size = 4096;
    std::string output;  // may stay empty when the caller overrides it
};

// True when the command consumes random streams and therefore needs a seed.
bool is_stochastic(const ExperimentConfig& cfg);

// Parses and validates a JSON experiment description.  Throws ConfigError
// naming the offending field (or "<json>" with a byte offset for syntax
// errors).
ExperimentConfig parse_config_text(const std::string& text);

ExperimentConfig parse_config_file(const std::string& path);

// Canonical single-line JSON rendering: sorted keys, defaults made explicit,
// shortest round-trip numbers.  parse(serialize(cfg)) reproduces cfg.
std::string serialize_config(const ExperimentConfig& cfg);

// FNV-1a (64-bit) over the canonical serialization.
std::uint64_t config_hash(const ExperimentConfig& cfg);

}  // namespace ibex
