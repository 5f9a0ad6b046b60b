#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ibex/bm_exit.hpp"
#include "ibex/domain.hpp"
#include "ibex/estimate.hpp"
#include "ibex/interval_exit.hpp"
#include "ibex/parallel.hpp"

namespace ibex {

// The two time-changed processes.  Iterated Brownian motion (ibm) runs an
// outer two-sided Brownian motion at an inner Brownian clock, so its exit
// from a domain is decided by two independent outer exit times, one per side
// of the clock.  Brownian-time Brownian motion (btbm) runs a single outer
// motion at the reflected clock and is decided by one exit time.
enum class ProcessKind { ibm, btbm };

std::string process_name(ProcessKind kind);

// A survival or moment query: domain, interior start point, process.
struct IteratedQuery {
    Domain domain;
    std::vector<double> start;
    ProcessKind process = ProcessKind::ibm;
};

// Settings for the conditional (Rao-Blackwellized) estimator: sample outer
// exit times, then average the closed-form inner survival or moment over the
// draws.  dt = 0 uses exact inversion when the domain admits it and the
// default Euler step otherwise; force_euler always steps.
struct ConditionalSettings {
    std::size_t count = 100000;
    SeedInfo seed;
    double dt = 0.0;
    bool force_euler = false;
    SeriesParams series;
    ParallelConfig parallel;
};

// Settings for deterministic quadrature over the outer exit density
// (domains with a closed-form exit law only).  The integral is evaluated at
// both orders on panels split at exit-law quantiles; the reported std_error
// is the difference between the two evaluations plus the truncation bound
// for cutting the integral at the 1 - 1e-10 quantile.
struct QuadratureSettings {
    int order = 32;
    int refined_order = 48;
    SeriesParams series;
};

// Settings for the pathwise estimator: simulate the inner clock on [0, t]
// with step dt_y and test whether it stays between the sampled outer exit
// times.  By default each step contributes the exact Brownian-bridge
// non-crossing probability as a multiplicative weight, which is unbiased for
// the fixed barriers sampled here; discrete_extrema = true instead uses the
// literal indicator on the discrete running extrema (biased O(sqrt(dt_y)),
// kept as a diagnostic).
struct PathwiseSettings {
    std::size_t count = 100000;
    SeedInfo seed;
    double dt_y = 1e-3;
    double dt = 0.0;
    bool discrete_extrema = false;
    SeriesParams series;
    ParallelConfig parallel;
};

// Outer exit-time draws for one (domain, start, process), reusable across
// evaluation times and moment orders.  ibm stores pairs (lower[i],
// upper[i]); btbm stores single draws in lower and leaves upper empty.
struct OuterExitBatch {
    ProcessKind process = ProcessKind::ibm;
    std::vector<double> lower;
    std::vector<double> upper;
    SeedInfo seed;
    std::string scheme;
};

OuterExitBatch draw_outer_exits(const IteratedQuery& q,
                                const ConditionalSettings& s);

// Average of the inner-interval survival (at time t) or moment (order p)
// over a batch of outer draws.
EstimateWithError survival_from_batch(const OuterExitBatch& b, double t,
                                      const SeriesParams& sp = {},
                                      const ParallelConfig& par = {});
EstimateWithError moment_from_batch(const OuterExitBatch& b, double p,
                                    const SeriesParams& sp = {},
                                    const ParallelConfig& par = {});

// P_z[exit of the iterated process > t] by each estimator.
EstimateWithError ibm_survival(const IteratedQuery& q, double t,
                               const ConditionalSettings& s);
EstimateWithError ibm_survival(const IteratedQuery& q, double t,
                               const QuadratureSettings& s);
EstimateWithError ibm_survival(const IteratedQuery& q, double t,
                               const PathwiseSettings& s);

// P_z[exit of the reflected-clock process > t].
EstimateWithError btbm_survival(const IteratedQuery& q, double t,
                                const ConditionalSettings& s);
EstimateWithError btbm_survival(const IteratedQuery& q, double t,
                                const QuadratureSettings& s);

// E_z[(exit time)^p], p >= 1, for either process.
EstimateWithError iterated_moment(const IteratedQuery& q, double p,
                                  const ConditionalSettings& s);

// A nondecreasing function tabulated on a time grid, read as its
// piecewise-linear interpolant (constant outside the knot range).
struct TabulatedPhi {
    std::vector<double> t;
    std::vector<double> value;
};

// E_z[phi(exit time)] = phi(0) + integral of phi'(t) * survival(t), with the
// integral discretized on the knot intervals at their midpoints.
EstimateWithError iterated_phi_moment(const IteratedQuery& q,
                                      const TabulatedPhi& phi,
                                      const ConditionalSettings& s);

// The four quadrature representations of the iterated-process survival for
// an interval domain: the direct double integral against the outer exit
// density on both axes, the two single integration-by-parts forms (density
// on one axis, survival and an inner partial derivative on the other), and
// the double integration-by-parts form (outer survival on both axes against
// the inner mixed partial).  All four agree analytically; max_discrepancy
// is the largest pairwise gap.
struct RepresentationReport {
    double direct = 0.0;
    double parts_upper = 0.0;
    double parts_lower = 0.0;
    double parts_both = 0.0;
    double max_discrepancy = 0.0;
};

RepresentationReport representation_crosscheck(const Domain& d,
                                               const std::vector<double>& z,
                                               double t,
                                               const QuadratureSettings& qs = {});

}  // namespace ibex
