#pragma once

#include <cmath>
#include <cstdint>
#include <string>

namespace ibex {

// Value with its Monte Carlo (or refinement) uncertainty.
// std_error = 0 is reserved for deterministic methods.
struct EstimateWithError {
    double value = 0.0;
    double std_error = 0.0;
    std::uint64_t n_samples = 0;
    std::string method;
};

// Streaming mean/variance accumulator (Welford).  merge() uses the parallel
// combination rule, so chunk results merged in a fixed order reproduce the
// same bits regardless of how many workers filled the chunks.
struct Accumulator {
    std::uint64_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }

    void merge(const Accumulator& other) {
        if (other.n == 0) return;
        if (n == 0) {
            *this = other;
            return;
        }
        const double na = static_cast<double>(n);
        const double nb = static_cast<double>(other.n);
        const double d = other.mean - mean;
        const double nt = na + nb;
        mean += d * nb / nt;
        m2 += other.m2 + d * d * na * nb / nt;
        n += other.n;
    }

    double variance() const {
        return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0;
    }

    double std_error() const {
        return n > 1 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0;
    }

    EstimateWithError to_estimate(const std::string& method) const {
        return {mean, std_error(), n, method};
    }
};

}  // namespace ibex
