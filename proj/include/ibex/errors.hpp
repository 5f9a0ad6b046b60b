#pragma once

#include <stdexcept>
#include <string>

namespace ibex {

// Invalid argument values: nonpositive widths, points outside domains,
// dimension mismatches, malformed geometry.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Requested method is not available for the given shape/settings
// (e.g. closed-form survival for a polygon).
class CapabilityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Series or inversion could not reach the requested tolerance within the
// configured term budget.  Carries the bound that was achieved.
class AccuracyError : public std::runtime_error {
public:
    AccuracyError(const std::string& what, double achieved)
        : std::runtime_error(what), achieved_bound(achieved) {}

    double achieved_bound;
};

// Configuration file problems; `field` names the offending entry.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& field_, const std::string& what)
        : std::runtime_error("config field '" + field_ + "': " + what),
          field(field_) {}

    std::string field;
};

}  // namespace ibex
