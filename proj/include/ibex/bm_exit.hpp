#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ibex/domain.hpp"
#include "ibex/estimate.hpp"
#include "ibex/interval_exit.hpp"
#include "ibex/parallel.hpp"
#include "ibex/rng.hpp"

namespace ibex {

// Randomness is addressed, never stateful: (master_seed, stream) key a
// Philox stream family, and each sample index within a batch owns its own
// substream.  Identical seed info reproduces identical batches for any
// worker count.
struct SeedInfo {
    std::uint64_t master_seed = 0;
    std::uint64_t stream = 0;
};

struct ExitTimeSampleBatch {
    std::vector<double> times;
    std::string domain_label;
    std::vector<double> start;
    std::string scheme;  // "exact-inversion" or "euler-bridge"
    SeedInfo seed;
    double dt = 0.0;     // step size; 0 for exact inversion
};

// Empirical survival on a grid plus a normalized histogram density.
struct EmpiricalLaw {
    std::vector<double> grid;
    std::vector<double> survival;
    std::vector<double> bin_edges;  // bins.size() + 1 edges
    std::vector<double> density;
};

// One-draw exit-time sampler bound to a (domain, start) pair.  `exact`
// inverts the closed-form exit law (throws CapabilityError when there is
// none); `euler` runs the step scheme below; `automatic` prefers exact and
// falls back to Euler with the given step (0 picks the default).  The caller
// owns the generator, so estimators that need several draws per sample index
// stay deterministic.
class ExitSampler {
  public:
    static ExitSampler exact(const Domain& d, const std::vector<double>& z,
                             const SeriesParams& sp = {});
    static ExitSampler euler(const Domain& d, const std::vector<double>& z,
                             double dt);
    static ExitSampler automatic(const Domain& d, const std::vector<double>& z,
                                 double dt = 0.0, const SeriesParams& sp = {});

    double draw(CounterRng& rng) const { return draw_(rng); }
    bool is_exact() const { return step_ == 0.0; }
    double step() const { return step_; }  // 0 for exact inversion
    const char* scheme() const {
        return is_exact() ? "exact-inversion" : "euler-bridge";
    }

  private:
    ExitSampler(std::function<double(CounterRng&)> draw, double step)
        : draw_(std::move(draw)), step_(step) {}
    std::function<double(CounterRng&)> draw_;
    double step_;
};

// Exit times of one-dimensional Brownian motion from (a, b) started at z,
// drawn by inverting the exit-law CDF (accuracy 1e-10 in probability).
ExitTimeSampleBatch sample_exit_interval(double a, double b, double z,
                                         std::size_t count, SeedInfo seed,
                                         const SeriesParams& sp = {},
                                         const ParallelConfig& par = {});

// Default Euler step for a domain: 1e-4 * inradius^2.
double default_step_size(const Domain& d);

// Exit times of n-dimensional Brownian motion from d started at z: Euler
// increments of step dt with a Brownian-bridge crossing check against every
// bounding half-plane (tangent plane for circular arcs); the recorded exit
// time is the midpoint of the crossing step.
ExitTimeSampleBatch sample_exit_domain(const Domain& d,
                                       const std::vector<double>& z, double dt,
                                       std::size_t count, SeedInfo seed,
                                       const ParallelConfig& par = {});

// True when the exit law of d admits exact inversion sampling and a series
// survival function (interval, rectangle, slab, one-dimensional ball).
bool has_exact_exit_law(const Domain& d);

// Exact-inversion exit-time sampler for the shapes above.
ExitTimeSampleBatch sample_exit_exact(const Domain& d,
                                      const std::vector<double>& z,
                                      std::size_t count, SeedInfo seed,
                                      const SeriesParams& sp = {},
                                      const ParallelConfig& par = {});

// P[exit > t] by series (throws CapabilityError when no closed form exists).
EstimateWithError bm_survival_analytic(const Domain& d,
                                       const std::vector<double>& z, double t,
                                       const SeriesParams& sp = {});

// P[exit > t] as the fraction of sampled exit times above t.
EstimateWithError bm_survival_mc(const Domain& d, const std::vector<double>& z,
                                 double t, std::size_t count, double dt,
                                 SeedInfo seed, const ParallelConfig& par = {});

// Empirical survival at the grid points and a Freedman-Diaconis histogram
// (bins > 0 overrides the rule).
EmpiricalLaw empirical_exit_law(const ExitTimeSampleBatch& batch,
                                const std::vector<double>& grid, int bins = 0);

// Closed-form exit law of d from z: survival, density, and quantile.  These
// back the analytic survival and the quadrature estimators; each throws
// CapabilityError when the shape has no closed form.
double exit_law_survival(const Domain& d, const std::vector<double>& z,
                         double t, const SeriesParams& sp = {});
double exit_law_density(const Domain& d, const std::vector<double>& z, double t,
                        const SeriesParams& sp = {});
double exit_law_quantile(const Domain& d, const std::vector<double>& z,
                         double prob, const SeriesParams& sp = {});

}  // namespace ibex
