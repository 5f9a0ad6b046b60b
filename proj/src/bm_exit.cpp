#include "ibex/bm_exit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ibex/errors.hpp"
#include "ibex/rng.hpp"

namespace ibex {

namespace {

// (u, v) description of a one-dimensional exit law, when the domain reduces
// to one: distance to the lower and upper barrier along a single coordinate.
struct IntervalLaw {
    double u;
    double v;
};

bool interval_reducible(const Domain& d) {
    return std::holds_alternative<Interval>(d) || std::holds_alternative<Slab>(d) ||
           (std::holds_alternative<Ball>(d) && dimension(d) == 1);
}

IntervalLaw interval_law(const Domain& d, const std::vector<double>& z) {
    if (const auto* seg = std::get_if<Interval>(&d)) {
        return {z[0] - seg->a, seg->b - z[0]};
    }
    if (const auto* slab = std::get_if<Slab>(&d)) {
        return {slab->half_width + z.back(), slab->half_width - z.back()};
    }
    const auto& ball = std::get<Ball>(d);
    return {z[0] - (ball.center[0] - ball.radius),
            ball.center[0] + ball.radius - z[0]};
}

// CDF inversion shared by the non-interval exact laws: bracket, bisection,
// then Newton against the density, to 1e-10 in probability.
template <class Cdf, class Density>
double invert_cdf(double prob, double scale, Cdf&& cdf, Density&& dens) {
    constexpr double prob_tol = 1e-10;
    double lo = scale;
    double hi = scale;
    if (cdf(lo) >= prob) {
        for (int i = 0; i < 400 && cdf(lo) > prob; ++i) lo *= 0.5;
    } else {
        for (int i = 0; i < 400 && cdf(hi) < prob; ++i) {
            lo = hi;
            hi *= 2.0;
        }
    }
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
            const double f = dens(t);
            if (f > 0.0 && std::isfinite(f)) next = t - err / f;
        }
        if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
        t = next;
    }
    throw AccuracyError("exit-law inversion did not reach 1e-10 in probability",
                        std::numeric_limits<double>::quiet_NaN());
}

}  // namespace

bool has_exact_exit_law(const Domain& d) {
    return interval_reducible(d) || std::holds_alternative<Rectangle>(d);
}

double exit_law_survival(const Domain& d, const std::vector<double>& z, double t,
                         const SeriesParams& sp) {
    require_interior(d, z);
    if (interval_reducible(d)) {
        const IntervalLaw law = interval_law(d, z);
        return interval_survival({law.u, law.v, t}, sp);
    }
    if (const auto* rect = std::get_if<Rectangle>(&d)) {
        // Coordinates exit independently; the rectangle survives while both do.
        const double sx =
            interval_survival({z[0] - rect->xmin, rect->xmax - z[0], t}, sp);
        const double sy =
            interval_survival({z[1] - rect->ymin, rect->ymax - z[1], t}, sp);
        return sx * sy;
    }
    throw CapabilityError("no closed-form exit law for shape " + shape_name(d));
}

double exit_law_density(const Domain& d, const std::vector<double>& z, double t,
                        const SeriesParams& sp) {
    require_interior(d, z);
    if (interval_reducible(d)) {
        const IntervalLaw law = interval_law(d, z);
        return interval_density({law.u, law.v, t}, sp);
    }
    if (const auto* rect = std::get_if<Rectangle>(&d)) {
        const IntervalExitQuery qx{z[0] - rect->xmin, rect->xmax - z[0], t};
        const IntervalExitQuery qy{z[1] - rect->ymin, rect->ymax - z[1], t};
        return interval_density(qx, sp) * interval_survival(qy, sp) +
               interval_density(qy, sp) * interval_survival(qx, sp);
    }
    throw CapabilityError("no closed-form exit density for shape " + shape_name(d));
}

double exit_law_quantile(const Domain& d, const std::vector<double>& z,
                         double prob, const SeriesParams& sp) {
    require_interior(d, z);
    if (!(prob > 0.0) || !(prob < 1.0)) {
        throw DomainError("quantile probability must lie in (0, 1)");
    }
    if (interval_reducible(d)) {
        const IntervalLaw law = interval_law(d, z);
        return interval_exit_quantile(law.u, law.v, prob, sp);
    }
    if (std::holds_alternative<Rectangle>(d)) {
        const auto& rect = std::get<Rectangle>(d);
        const double scale = std::min((z[0] - rect.xmin) * (rect.xmax - z[0]),
                                      (z[1] - rect.ymin) * (rect.ymax - z[1]));
        return invert_cdf(
            prob, scale,
            [&](double t) { return 1.0 - exit_law_survival(d, z, t, sp); },
            [&](double t) { return exit_law_density(d, z, t, sp); });
    }
    throw CapabilityError("no closed-form exit quantile for shape " + shape_name(d));
}

ExitTimeSampleBatch sample_exit_interval(double a, double b, double z,
                                         std::size_t count, SeedInfo seed,
                                         const SeriesParams& sp,
                                         const ParallelConfig& par) {
    return sample_exit_exact(Domain{Interval{a, b}}, {z}, count, seed, sp, par);
}

double default_step_size(const Domain& d) {
    const double r = geometry(d).inradius;
    return 1e-4 * r * r;
}

namespace {

template <class PerSample>
void fill_times(std::vector<double>& times, std::size_t count, SeedInfo seed,
                const ParallelConfig& par, PerSample&& per_sample) {
    chunked_for(count, par, [&](std::uint64_t first, std::uint64_t last) {
        for (std::uint64_t i = first; i < last; ++i) {
            CounterRng rng(seed.master_seed, seed.stream, i);
            times[i] = per_sample(rng);
        }
    });
}

// Brownian-bridge probability that the segment from distance d0 to distance
// d1 (both measured from the same bounding plane, both positive) crossed the
// plane within one step of size dt.  Arguments beyond 40 underflow to "no".
inline double crossing_probability(double d0, double d1, double dt) {
    const double arg = 2.0 * d0 * d1 / dt;
    return arg > 40.0 ? 0.0 : std::exp(-arg);
}

double euler_slab_exit(CounterRng& rng, double h, double y, double dt,
                       double sdt) {
    for (std::uint64_t k = 0;; ++k) {
        const double y1 = y + sdt * rng.normal();
        if (std::abs(y1) >= h) return (k + 0.5) * dt;
        const double survive =
            (1.0 - crossing_probability(h - y, h - y1, dt)) *
            (1.0 - crossing_probability(h + y, h + y1, dt));
        if (survive < 1.0 && rng.uniform() >= survive) return (k + 0.5) * dt;
        y = y1;
    }
}

double euler_rectangle_exit(CounterRng& rng, const Rectangle& rect, double x,
                            double y, double dt, double sdt) {
    for (std::uint64_t k = 0;; ++k) {
        const double x1 = x + sdt * rng.normal();
        const double y1 = y + sdt * rng.normal();
        if (x1 <= rect.xmin || x1 >= rect.xmax || y1 <= rect.ymin ||
            y1 >= rect.ymax) {
            return (k + 0.5) * dt;
        }
        const double survive =
            (1.0 - crossing_probability(x - rect.xmin, x1 - rect.xmin, dt)) *
            (1.0 - crossing_probability(rect.xmax - x, rect.xmax - x1, dt)) *
            (1.0 - crossing_probability(y - rect.ymin, y1 - rect.ymin, dt)) *
            (1.0 - crossing_probability(rect.ymax - y, rect.ymax - y1, dt));
        if (survive < 1.0 && rng.uniform() >= survive) return (k + 0.5) * dt;
        x = x1;
        y = y1;
    }
}

// Circular boundary: bridge correction against the tangent plane at the
// boundary point nearest the endpoint that sits closer to the arc.
inline double circle_crossing(double px, double py, double qx, double qy,
                              double r0, double r1, double rho, double dt) {
    const bool anchor_new = r1 >= r0;
    const double ra = anchor_new ? r1 : r0;
    if (ra <= 0.0) return 0.0;  // at the center; tangent direction undefined
    const double nx = (anchor_new ? qx : px) / ra;
    const double ny = (anchor_new ? qy : py) / ra;
    const double d0 = rho - (px * nx + py * ny);
    const double d1 = rho - (qx * nx + qy * ny);
    return crossing_probability(d0, d1, dt);
}

double euler_ball_exit(CounterRng& rng, const Ball& ball,
                       const std::vector<double>& start, double dt, double sdt) {
    const int n = static_cast<int>(ball.center.size());
    const double rho = ball.radius;
    double rel[3] = {0.0, 0.0, 0.0};
    for (int i = 0; i < n; ++i) rel[i] = start[static_cast<std::size_t>(i)] - ball.center[static_cast<std::size_t>(i)];
    const double guard2 = 20.0 * dt;
    for (std::uint64_t k = 0;; ++k) {
        double r0sq = 0.0;
        double r1sq = 0.0;
        double next[3] = {0.0, 0.0, 0.0};
        for (int i = 0; i < n; ++i) {
            const double c = rel[i];
            const double c1 = c + sdt * rng.normal();
            next[i] = c1;
            r0sq += c * c;
            r1sq += c1 * c1;
        }
        if (r1sq >= rho * rho) return (k + 0.5) * dt;
        const double r0 = std::sqrt(r0sq);
        const double r1 = std::sqrt(r1sq);
        const double dmax = rho - std::max(r0, r1);
        if (dmax * dmax < guard2) {
            // Tangent plane at the nearest boundary point of the nearer end.
            const bool anchor_new = r1 >= r0;
            const double ra = anchor_new ? r1 : r0;
            if (ra > 0.0) {
                double d0 = 0.0;
                double d1 = 0.0;
                for (int i = 0; i < n; ++i) {
                    const double nrm = (anchor_new ? next[i] : rel[i]) / ra;
                    d0 += rel[i] * nrm;
                    d1 += next[i] * nrm;
                }
                const double p = crossing_probability(rho - d0, rho - d1, dt);
                if (p > 0.0 && rng.uniform() >= 1.0 - p) return (k + 0.5) * dt;
            }
        }
        for (int i = 0; i < n; ++i) rel[i] = next[i];
    }
}

struct PolyEdge {
    double nx;
    double ny;
    double offset;
};

double euler_polygon_exit(CounterRng& rng, const std::vector<PolyEdge>& edges,
                          double x, double y, double dt, double sdt) {
    const std::size_t m = edges.size();
    // Signed distances to each edge, carried across steps.
    double s0[16];
    for (std::size_t e = 0; e < m; ++e) {
        s0[e] = edges[e].nx * x + edges[e].ny * y - edges[e].offset;
    }
    const double guard2 = 20.0 * dt;
    for (std::uint64_t k = 0;; ++k) {
        const double x1 = x + sdt * rng.normal();
        const double y1 = y + sdt * rng.normal();
        double s1[16];
        double smin = std::numeric_limits<double>::infinity();
        for (std::size_t e = 0; e < m; ++e) {
            s1[e] = edges[e].nx * x1 + edges[e].ny * y1 - edges[e].offset;
            smin = std::min(smin, s1[e]);
        }
        if (smin <= 0.0) return (k + 0.5) * dt;
        double survive = 1.0;
        for (std::size_t e = 0; e < m; ++e) {
            if (s0[e] * s1[e] < guard2) {
                survive *= 1.0 - crossing_probability(s0[e], s1[e], dt);
            }
        }
        if (survive < 1.0 && rng.uniform() >= survive) return (k + 0.5) * dt;
        for (std::size_t e = 0; e < m; ++e) s0[e] = s1[e];
        x = x1;
        y = y1;
    }
}

double euler_lens_exit(CounterRng& rng, const Lens& lens, double x, double y,
                       double dt, double sdt) {
    const double h = lens.half_width;
    const double rho = lens.radius;
    for (std::uint64_t k = 0;; ++k) {
        const double x1 = x + sdt * rng.normal();
        const double y1 = y + sdt * rng.normal();
        const double r1sq = x1 * x1 + y1 * y1;
        if (std::abs(y1) >= h || r1sq >= rho * rho) return (k + 0.5) * dt;
        const double r0 = std::hypot(x, y);
        const double r1 = std::sqrt(r1sq);
        const double survive =
            (1.0 - crossing_probability(h - y, h - y1, dt)) *
            (1.0 - crossing_probability(h + y, h + y1, dt)) *
            (1.0 - circle_crossing(x, y, x1, y1, r0, r1, rho, dt));
        if (survive < 1.0 && rng.uniform() >= survive) return (k + 0.5) * dt;
        x = x1;
        y = y1;
    }
}

std::function<double(CounterRng&)> make_euler_draw(const Domain& d,
                                                   const std::vector<double>& z,
                                                   double dt) {
    const double sdt = std::sqrt(dt);
    return std::visit(
        [&](const auto& s) -> std::function<double(CounterRng&)> {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Interval>) {
                const double h = 0.5 * (s.b - s.a);
                const double y0 = z[0] - 0.5 * (s.a + s.b);
                return [=](CounterRng& rng) {
                    return euler_slab_exit(rng, h, y0, dt, sdt);
                };
            } else if constexpr (std::is_same_v<T, Slab>) {
                const double h = s.half_width;
                const double y0 = z.back();
                return [=](CounterRng& rng) {
                    return euler_slab_exit(rng, h, y0, dt, sdt);
                };
            } else if constexpr (std::is_same_v<T, Rectangle>) {
                const Rectangle rect = s;
                const double x0 = z[0];
                const double y0 = z[1];
                return [=](CounterRng& rng) {
                    return euler_rectangle_exit(rng, rect, x0, y0, dt, sdt);
                };
            } else if constexpr (std::is_same_v<T, Ball>) {
                const Ball ball = s;
                const std::vector<double> start = z;
                return [=](CounterRng& rng) {
                    return euler_ball_exit(rng, ball, start, dt, sdt);
                };
            } else if constexpr (std::is_same_v<T, ConvexPolygon>) {
                if (s.vertices.size() > 16) {
                    throw CapabilityError("polygon sampler supports up to 16 edges");
                }
                std::vector<PolyEdge> edges;
                edges.reserve(s.vertices.size());
                for (std::size_t i = 0; i < s.vertices.size(); ++i) {
                    const auto& p = s.vertices[i];
                    const auto& q = s.vertices[(i + 1) % s.vertices.size()];
                    const double ex = q[0] - p[0];
                    const double ey = q[1] - p[1];
                    const double len = std::hypot(ex, ey);
                    const double nx = -ey / len;
                    const double ny = ex / len;
                    edges.push_back({nx, ny, nx * p[0] + ny * p[1]});
                }
                const double x0 = z[0];
                const double y0 = z[1];
                return [=](CounterRng& rng) {
                    return euler_polygon_exit(rng, edges, x0, y0, dt, sdt);
                };
            } else {
                const Lens lens = s;
                const double x0 = z[0];
                const double y0 = z[1];
                return [=](CounterRng& rng) {
                    return euler_lens_exit(rng, lens, x0, y0, dt, sdt);
                };
            }
        },
        d);
}

}  // namespace

ExitSampler ExitSampler::exact(const Domain& d, const std::vector<double>& z,
                               const SeriesParams& sp) {
    validate(d);
    require_interior(d, z);
    if (!has_exact_exit_law(d)) {
        throw CapabilityError("exact inversion unavailable for shape " +
                              shape_name(d));
    }
    if (const auto* rect = std::get_if<Rectangle>(&d)) {
        // Coordinates exit independently; the first to leave decides.
        const double ux = z[0] - rect->xmin;
        const double vx = rect->xmax - z[0];
        const double uy = z[1] - rect->ymin;
        const double vy = rect->ymax - z[1];
        return ExitSampler(
            [=](CounterRng& rng) {
                const double tx = interval_exit_quantile(ux, vx, rng.uniform(), sp);
                const double ty = interval_exit_quantile(uy, vy, rng.uniform(), sp);
                return std::min(tx, ty);
            },
            0.0);
    }
    const IntervalLaw law = interval_law(d, z);
    return ExitSampler(
        [=](CounterRng& rng) {
            return interval_exit_quantile(law.u, law.v, rng.uniform(), sp);
        },
        0.0);
}

ExitSampler ExitSampler::euler(const Domain& d, const std::vector<double>& z,
                               double dt) {
    validate(d);
    require_interior(d, z);
    if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("dt must be positive");
    return ExitSampler(make_euler_draw(d, z, dt), dt);
}

ExitSampler ExitSampler::automatic(const Domain& d, const std::vector<double>& z,
                                   double dt, const SeriesParams& sp) {
    if (has_exact_exit_law(d)) return exact(d, z, sp);
    return euler(d, z, dt > 0.0 ? dt : default_step_size(d));
}

ExitTimeSampleBatch sample_exit_domain(const Domain& d,
                                       const std::vector<double>& z, double dt,
                                       std::size_t count, SeedInfo seed,
                                       const ParallelConfig& par) {
    const ExitSampler sampler = ExitSampler::euler(d, z, dt);
    if (count < 1) throw DomainError("sample count must be >= 1");

    ExitTimeSampleBatch batch;
    batch.times.resize(count);
    batch.domain_label = describe(d);
    batch.start = z;
    batch.scheme = sampler.scheme();
    batch.seed = seed;
    batch.dt = dt;
    fill_times(batch.times, count, seed, par,
               [&](CounterRng& rng) { return sampler.draw(rng); });
    return batch;
}

ExitTimeSampleBatch sample_exit_exact(const Domain& d,
                                      const std::vector<double>& z,
                                      std::size_t count, SeedInfo seed,
                                      const SeriesParams& sp,
                                      const ParallelConfig& par) {
    const ExitSampler sampler = ExitSampler::exact(d, z, sp);
    if (count < 1) throw DomainError("sample count must be >= 1");

    ExitTimeSampleBatch batch;
    batch.times.resize(count);
    batch.domain_label = describe(d);
    batch.start = z;
    batch.scheme = sampler.scheme();
    batch.seed = seed;
    fill_times(batch.times, count, seed, par,
               [&](CounterRng& rng) { return sampler.draw(rng); });
    return batch;
}

EstimateWithError bm_survival_analytic(const Domain& d,
                                       const std::vector<double>& z, double t,
                                       const SeriesParams& sp) {
    return {exit_law_survival(d, z, t, sp), 0.0, 0, "series"};
}

EstimateWithError bm_survival_mc(const Domain& d, const std::vector<double>& z,
                                 double t, std::size_t count, double dt,
                                 SeedInfo seed, const ParallelConfig& par) {
    if (!(t >= 0.0)) throw DomainError("time must be nonnegative");
    const ExitTimeSampleBatch batch = sample_exit_domain(d, z, dt, count, seed, par);
    std::size_t alive = 0;
    for (double x : batch.times) {
        if (x > t) ++alive;
    }
    const double p = static_cast<double>(alive) / static_cast<double>(count);
    const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(count));
    return {p, se, count, "euler-bridge"};
}

EmpiricalLaw empirical_exit_law(const ExitTimeSampleBatch& batch,
                                const std::vector<double>& grid, int bins) {
    if (batch.times.empty()) throw DomainError("empty sample batch");
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        if (!(grid[i] < grid[i + 1])) {
            throw DomainError("survival grid must be strictly increasing");
        }
    }

    std::vector<double> sorted = batch.times;
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());

    EmpiricalLaw law;
    law.grid = grid;
    law.survival.reserve(grid.size());
    for (double g : grid) {
        const auto it = std::upper_bound(sorted.begin(), sorted.end(), g);
        law.survival.push_back(static_cast<double>(sorted.end() - it) / n);
    }

    const double lo = sorted.front();
    const double hi = sorted.back();
    int nbins = bins;
    if (nbins <= 0) {
        // Freedman-Diaconis rule.
        const auto quantile = [&](double q) {
            const double idx = q * (n - 1.0);
            const std::size_t i0 = static_cast<std::size_t>(idx);
            const std::size_t i1 = std::min(i0 + 1, sorted.size() - 1);
            const double w = idx - static_cast<double>(i0);
            return (1.0 - w) * sorted[i0] + w * sorted[i1];
        };
        const double iqr = quantile(0.75) - quantile(0.25);
        const double width = 2.0 * iqr / std::cbrt(n);
        if (width > 0.0 && hi > lo) {
            nbins = static_cast<int>(std::clamp((hi - lo) / width, 1.0, 4000.0)) + 1;
        } else {
            nbins = 1;
        }
    }
    law.bin_edges.resize(static_cast<std::size_t>(nbins) + 1);
    law.density.assign(static_cast<std::size_t>(nbins), 0.0);
    const double span = hi > lo ? hi - lo : 1.0;
    const double bw = span / nbins;
    for (int i = 0; i <= nbins; ++i) {
        law.bin_edges[static_cast<std::size_t>(i)] = lo + bw * i;
    }
    for (double x : sorted) {
        const int idx = std::min(nbins - 1, static_cast<int>((x - lo) / bw));
        law.density[static_cast<std::size_t>(std::max(idx, 0))] += 1.0;
    }
    for (double& dns : law.density) dns /= n * bw;
    return law;
}

}  // namespace ibex
