#pragma once

namespace ibex {

// Exit of a standard one-dimensional Brownian motion, started at 0, from the
// interval (-u, v).  All quantities are functions of (u, v, t) only.
struct IntervalExitQuery {
    double u;  // distance to the left endpoint, > 0
    double v;  // distance to the right endpoint, > 0
    double t;  // time, >= 0
};

struct SeriesParams {
    int max_terms = 1000;        // cap on series terms / image rings
    double abs_tol = 1e-12;      // target bound on the truncation tail
    double regime_ratio = 0.16;  // crossover threshold on t/(u+v)^2
};

enum class Side { left, right };  // left = u-side boundary, right = v-side

// P[exit time > t].  Eigenfunction form for t/(u+v)^2 >= regime_ratio,
// reflection (image) form below; clamped to [0,1].
double interval_survival(const IntervalExitQuery& q, const SeriesParams& sp = {});

// -d/dt of the survival (exit-time density), t > 0.
double interval_density(const IntervalExitQuery& q, const SeriesParams& sp = {});

// d/du (Side::left) or d/dv (Side::right) of the survival, t > 0.
// Nonnegative up to abs_tol: widening the interval can only help survival.
double interval_partial(const IntervalExitQuery& q, Side side,
                        const SeriesParams& sp = {});

// d^2/(du dv) of the survival, t > 0.  Sign unconstrained.
double interval_mixed_partial(const IntervalExitQuery& q,
                              const SeriesParams& sp = {});

// E[(exit time)^p] for p >= 1, by termwise closed-form integration of the
// survival: the eigenfunction piece integrates to upper incomplete gamma
// terms on [T0, inf) and the image piece to erfc/gamma terms on [0, T0],
// T0 = regime_ratio*(u+v)^2.  E[exit] = u*v exactly.
double interval_exit_moment(double u, double v, double p,
                            const SeriesParams& sp = {});

// Smallest t with P[exit <= t] = prob, resolved to 1e-10 in probability
// (bracketing, then bisection with Newton polishing).  prob in (0, 1).
double interval_exit_quantile(double u, double v, double prob,
                              const SeriesParams& sp = {});

namespace detail {

// Single-regime evaluations, exposed for the regime-agreement tests.
double survival_eigen(double u, double v, double t, const SeriesParams& sp);
double survival_images(double u, double v, double t, const SeriesParams& sp);

}  // namespace detail

}  // namespace ibex
