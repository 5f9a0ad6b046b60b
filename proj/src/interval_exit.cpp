#include "ibex/interval_exit.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_gamma.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "ibex/errors.hpp"

namespace ibex {

namespace {

constexpr double pi = 3.14159265358979323846;

// GSL's default handler aborts the process; special-function failures are
// handled through status codes instead.
void quiet_gsl() {
    static const bool done = [] {
        gsl_set_error_handler_off();
        return true;
    }();
    (void)done;
}

void validate(const IntervalExitQuery& q) {
    if (!(q.u > 0.0) || !std::isfinite(q.u) || !(q.v > 0.0) ||
        !std::isfinite(q.v) || !(q.t >= 0.0) || !std::isfinite(q.t)) {
        throw DomainError("interval exit query requires u > 0, v > 0, t >= 0, all finite");
    }
}

void validate_params(const SeriesParams& sp) {
    if (sp.max_terms < 1 || !(sp.abs_tol > 0.0) || !(sp.regime_ratio > 0.0)) {
        throw DomainError("series params require max_terms >= 1, abs_tol > 0, regime_ratio > 0");
    }
}

bool use_eigen(const IntervalExitQuery& q, const SeriesParams& sp) {
    const double len = q.u + q.v;
    return q.t >= sp.regime_ratio * len * len;
}

// P[N(0,1) > y], stable for large positive y.
double gauss_tail(double y) { return 0.5 * std::erfc(y / std::sqrt(2.0)); }

double gauss_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * pi);
}

[[noreturn]] void tail_failure(const char* what, double achieved) {
    throw AccuracyError(std::string(what) + ": series tail bound " +
                            std::to_string(achieved) + " exceeds tolerance",
                        achieved);
}

// One reflection ring: four image terms (sign, numerator, and the integer
// multipliers that u and v carry into the numerator, which become the
// coefficients of the u- and v-derivatives).
struct ImageTerm {
    double sign;
    double c;
    double mu;
    double mv;
};

std::array<ImageTerm, 4> ring_terms(double u, double v, int k) {
    const double len = u + v;
    const double shift = 2.0 * k * len;
    return {{{+1.0, v + shift, 2.0 * k, 2.0 * k + 1.0},
             {-1.0, -u + shift, 2.0 * k - 1.0, 2.0 * k},
             {-1.0, 2.0 * u + v + shift, 2.0 * k + 2.0, 2.0 * k + 1.0},
             {+1.0, u + shift, 2.0 * k + 1.0, 2.0 * k}}};
}

// Shared skeleton for the image-form series: ring 0, then rings +-1, +-2, ...
// Ring 1 can carry O(1) mass when the start point sits near one endpoint, so
// rings 0..2 are always evaluated; afterwards the ring magnitudes fall off
// superexponentially and the last ring bounds the tail.
template <class TermValue>
double sum_images(const SeriesParams& sp, const char* what, double base,
                  TermValue&& term_value) {
    double sum = base;
    for (int k = 0; k <= sp.max_terms; ++k) {
        double ring_abs = 0.0;
        const std::array<int, 2> ks{k, -k};
        const int nks = k == 0 ? 1 : 2;
        for (int i = 0; i < nks; ++i) {
            const double x = term_value(ks[i]);
            sum += x;
            ring_abs += std::abs(x);
        }
        if (k >= 2 && ring_abs <= 0.5 * sp.abs_tol) return sum;
    }
    tail_failure(what, std::numeric_limits<double>::infinity());
}

}  // namespace

namespace detail {

double survival_eigen(double u, double v, double t, const SeriesParams& sp) {
    const double len = u + v;
    const double a = pi * pi * t / (2.0 * len * len);
    const double theta = pi * u / len;
    double sum = 0.0;
    for (int n = 0; n < sp.max_terms; ++n) {
        const double w = 2.0 * n + 1.0;
        sum += (4.0 / (w * pi)) * std::sin(w * theta) * std::exp(-w * w * a);
        const double wn = w + 2.0;
        const double bound = (4.0 / (wn * pi)) * std::exp(-wn * wn * a);
        if (1.06 * bound <= sp.abs_tol) return sum;
    }
    const double w = 2.0 * sp.max_terms + 1.0;
    tail_failure("survival (eigenfunction form)",
                 1.06 * (4.0 / (w * pi)) * std::exp(-w * w * a));
}

double survival_images(double u, double v, double t, const SeriesParams& sp) {
    const double st = std::sqrt(t);
    return sum_images(sp, "survival (image form)", 1.0, [&](int k) {
        double r = 0.0;
        for (const ImageTerm& it : ring_terms(u, v, k)) {
            if (it.c > 0.0) {
                r -= it.sign * gauss_tail(it.c / st);
            } else {
                r += it.sign * gauss_tail(-it.c / st);
            }
        }
        return r;
    });
}

}  // namespace detail

double interval_survival(const IntervalExitQuery& q, const SeriesParams& sp) {
    validate(q);
    validate_params(sp);
    if (q.t == 0.0) return 1.0;
    const double s = use_eigen(q, sp)
                         ? detail::survival_eigen(q.u, q.v, q.t, sp)
                         : detail::survival_images(q.u, q.v, q.t, sp);
    return std::clamp(s, 0.0, 1.0);
}

double interval_density(const IntervalExitQuery& q, const SeriesParams& sp) {
    validate(q);
    validate_params(sp);
    if (!(q.t > 0.0)) throw DomainError("exit-time density requires t > 0");
    const double len = q.u + q.v;
    if (use_eigen(q, sp)) {
        const double a = pi * pi * q.t / (2.0 * len * len);
        const double theta = pi * q.u / len;
        double sum = 0.0;
        for (int n = 0; n < sp.max_terms; ++n) {
            const double w = 2.0 * n + 1.0;
            sum += (2.0 * pi * w / (len * len)) * std::sin(w * theta) *
                   std::exp(-w * w * a);
            const double wn = w + 2.0;
            const double bound =
                (2.0 * pi * wn / (len * len)) * std::exp(-wn * wn * a);
            if (1.06 * bound <= sp.abs_tol) return sum;
        }
        const double w = 2.0 * sp.max_terms + 1.0;
        tail_failure("density (eigenfunction form)",
                     1.06 * (2.0 * pi * w / (len * len)) * std::exp(-w * w * a));
    }
    const double st = std::sqrt(q.t);
    const double t32 = q.t * st;
    return sum_images(sp, "density (image form)", 0.0, [&](int k) {
        double r = 0.0;
        for (const ImageTerm& it : ring_terms(q.u, q.v, k)) {
            r += it.sign * (it.c / (2.0 * t32)) * gauss_pdf(it.c / st);
        }
        return r;
    });
}

double interval_partial(const IntervalExitQuery& q, Side side,
                        const SeriesParams& sp) {
    validate(q);
    validate_params(sp);
    if (!(q.t > 0.0)) throw DomainError("survival partials require t > 0");
    const double len = q.u + q.v;
    if (use_eigen(q, sp)) {
        const double a = pi * pi * q.t / (2.0 * len * len);
        const double theta = pi * q.u / len;
        // d/du picks up +v from the phase and d/dv picks up -u; both share
        // the length-derivative term with coefficient 4*pi*w*t/len^3.
        const double cos_coeff =
            side == Side::left ? 4.0 * q.v / (len * len) : -4.0 * q.u / (len * len);
        double sum = 0.0;
        for (int n = 0; n < sp.max_terms; ++n) {
            const double w = 2.0 * n + 1.0;
            const double e = std::exp(-w * w * a);
            sum += e * (cos_coeff * std::cos(w * theta) +
                        (4.0 * pi * w * q.t / (len * len * len)) * std::sin(w * theta));
            const double wn = w + 2.0;
            const double bound =
                std::exp(-wn * wn * a) *
                (std::abs(cos_coeff) + 4.0 * pi * wn * q.t / (len * len * len));
            if (1.06 * bound <= sp.abs_tol) return sum;
        }
        const double w = 2.0 * sp.max_terms + 1.0;
        tail_failure("partial (eigenfunction form)",
                     1.06 * std::exp(-w * w * a) *
                         (std::abs(cos_coeff) + 4.0 * pi * w * q.t / (len * len * len)));
    }
    const double st = std::sqrt(q.t);
    return sum_images(sp, "partial (image form)", 0.0, [&](int k) {
        double r = 0.0;
        for (const ImageTerm& it : ring_terms(q.u, q.v, k)) {
            const double m = side == Side::left ? it.mu : it.mv;
            r += it.sign * gauss_pdf(it.c / st) * m / st;
        }
        return r;
    });
}

double interval_mixed_partial(const IntervalExitQuery& q,
                              const SeriesParams& sp) {
    validate(q);
    validate_params(sp);
    if (!(q.t > 0.0)) throw DomainError("mixed partial requires t > 0");
    const double len = q.u + q.v;
    if (use_eigen(q, sp)) {
        const double a = pi * pi * q.t / (2.0 * len * len);
        const double theta = pi * q.u / len;
        const double l3 = len * len * len;
        const double l4 = l3 * len;
        double sum = 0.0;
        for (int n = 0; n < sp.max_terms; ++n) {
            const double w = 2.0 * n + 1.0;
            const double e = std::exp(-w * w * a);
            const double sin_part =
                (pi * pi * pi * w * w * w * q.t * q.t / (len * len) -
                 3.0 * pi * w * q.t + w * pi * q.u * q.v) / l4;
            const double cos_part =
                (w * w * pi * pi * q.t * (q.v - q.u) / (len * len) + q.u - q.v) / l3;
            sum += 4.0 * e * (std::sin(w * theta) * sin_part +
                              std::cos(w * theta) * cos_part);
            const double wn = w + 2.0;
            const double bn =
                4.0 * std::exp(-wn * wn * a) *
                ((pi * pi * pi * wn * wn * wn * q.t * q.t / (len * len) +
                  3.0 * pi * wn * q.t + wn * pi * q.u * q.v) / l4 +
                 (wn * wn * pi * pi * q.t * std::abs(q.v - q.u) / (len * len) +
                  std::abs(q.u - q.v)) / l3);
            if (1.06 * bn <= sp.abs_tol) return sum;
        }
        tail_failure("mixed partial (eigenfunction form)",
                     std::numeric_limits<double>::infinity());
    }
    const double st = std::sqrt(q.t);
    const double t32 = q.t * st;
    return sum_images(sp, "mixed partial (image form)", 0.0, [&](int k) {
        double r = 0.0;
        for (const ImageTerm& it : ring_terms(q.u, q.v, k)) {
            r -= it.sign * it.mu * it.mv * (it.c / t32) * gauss_pdf(it.c / st);
        }
        return r;
    });
}

namespace {

// Upper incomplete gamma through GSL with the handler silenced; underflowed
// tails collapse to zero.
double upper_gamma(double a, double x) {
    quiet_gsl();
    if (x > 700.0) return 0.0;
    gsl_sf_result res;
    const int status = gsl_sf_gamma_inc_e(a, x, &res);
    if (status == GSL_EUNDRFLW) return 0.0;
    if (status != 0) {
        throw AccuracyError("incomplete gamma evaluation failed (a=" +
                                std::to_string(a) + ", x=" + std::to_string(x) + ")",
                            std::numeric_limits<double>::quiet_NaN());
    }
    return res.val;
}

// int_0^T t^(p-1) * P[N > c/sqrt(t)] dt, c > 0, by parts; the remaining
// integral is an upper incomplete gamma of negative order in x = c^2/(2T).
double tail_time_integral(double c, double T, double p) {
    const double x = c * c / (2.0 * T);
    if (x > 45.0) return 0.0;
    const double g = std::pow(x, p - 0.5) * upper_gamma(0.5 - p, x);
    return (std::pow(T, p) / p) * gauss_tail(c / std::sqrt(T)) -
           c * std::pow(T, p - 0.5) * g / (2.0 * p * std::sqrt(2.0 * pi));
}

}  // namespace

double interval_exit_moment(double u, double v, double p,
                            const SeriesParams& sp) {
    if (!(u > 0.0) || !std::isfinite(u) || !(v > 0.0) || !std::isfinite(v)) {
        throw DomainError("moment requires u > 0 and v > 0, finite");
    }
    if (!(p >= 1.0) || !std::isfinite(p)) {
        throw DomainError("moment order must satisfy p >= 1");
    }
    validate_params(sp);

    const double len = u + v;
    const double theta = pi * u / len;
    const double t0 = sp.regime_ratio * len * len;

    // Eigenfunction piece over [t0, inf): each term integrates in closed form
    // against p*t^(p-1).
    double large_time = 0.0;
    bool converged = false;
    double bound = std::numeric_limits<double>::infinity();
    for (int n = 0; n < sp.max_terms; ++n) {
        const double w = 2.0 * n + 1.0;
        const double lambda = w * w * pi * pi / (2.0 * len * len);
        const double weight = p * std::pow(lambda, -p) * upper_gamma(p, lambda * t0);
        large_time += (4.0 / (w * pi)) * std::sin(w * theta) * weight;
        const double wn = w + 2.0;
        const double ln = wn * wn * pi * pi / (2.0 * len * len);
        bound = (4.0 / (wn * pi)) * p * std::pow(ln, -p) * upper_gamma(p, ln * t0);
        if (1.06 * bound <= 0.5 * sp.abs_tol) {
            converged = true;
            break;
        }
    }
    if (!converged) tail_failure("moment (eigenfunction piece)", 1.06 * bound);

    // Image piece over [0, t0]: the constant image term integrates to t0^p
    // and every reflection term to a closed-form tail-time integral.
    const double small_time =
        std::pow(t0, p) +
        sum_images(sp, "moment (image piece)", 0.0, [&](int k) {
            double r = 0.0;
            for (const ImageTerm& it : ring_terms(u, v, k)) {
                if (it.c > 0.0) {
                    r -= it.sign * p * tail_time_integral(it.c, t0, p);
                } else {
                    r += it.sign * p * tail_time_integral(-it.c, t0, p);
                }
            }
            return r;
        });

    return large_time + small_time;
}

double interval_exit_quantile(double u, double v, double prob,
                              const SeriesParams& sp) {
    if (!(u > 0.0) || !std::isfinite(u) || !(v > 0.0) || !std::isfinite(v)) {
        throw DomainError("quantile requires u > 0 and v > 0, finite");
    }
    if (!(prob > 0.0) || !(prob < 1.0)) {
        throw DomainError("quantile probability must lie in (0, 1)");
    }
    validate_params(sp);
    constexpr double prob_tol = 1e-10;

    const auto cdf = [&](double t) {
        return 1.0 - interval_survival({u, v, t}, sp);
    };

    // Bracket around the mean exit time u*v.
    double lo = u * v;
    double hi = lo;
    if (cdf(lo) >= prob) {
        for (int i = 0; i < 400 && cdf(lo) > prob; ++i) lo *= 0.5;
    } else {
        for (int i = 0; i < 400 && cdf(hi) < prob; ++i) {
            lo = hi;
            hi *= 2.0;
        }
    }

    // Bisection to a sane region, then Newton with the exit-time density,
    // always kept inside the bracket.
    double t = 0.5 * (lo + hi);
    for (int iter = 0; iter < 200; ++iter) {
        const double err = cdf(t) - prob;
        if (std::abs(err) <= prob_tol) return t;
        if (err > 0.0) {
            hi = t;
        } else {
            lo = t;
        }
        double next = t;
        if (iter >= 20) {
            const double dens = interval_density({u, v, t}, sp);
            if (dens > 0.0 && std::isfinite(dens)) next = t - err / dens;
        }
        if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
        t = next;
    }
    throw AccuracyError("exit-time quantile did not reach 1e-10 in probability",
                        std::abs(cdf(t) - prob));
}

}  // namespace ibex
