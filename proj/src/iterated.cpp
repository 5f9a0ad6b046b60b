#include "ibex/iterated.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "ibex/errors.hpp"
#include "ibex/quadrature.hpp"
#include "ibex/rng.hpp"

namespace ibex {

namespace {

// Mass beyond the 1 - 1e-10 quantile cut, doubled for the two axes of the
// tensor integrals; added to every quadrature error report.
constexpr double quantile_cut = 1e-10;
constexpr double truncation_bound = 2e-10;

void check_process(const IteratedQuery& q, ProcessKind expected,
                   const char* op) {
    if (q.process != expected) {
        throw DomainError(std::string(op) + " requires process " +
                          process_name(expected));
    }
    validate(q.domain);
    require_interior(q.domain, q.start);
}

void check_time(double t) {
    if (!(t >= 0.0) || !std::isfinite(t)) {
        throw DomainError("time must be nonnegative and finite");
    }
}

void check_quadrature(const QuadratureSettings& s) {
    if (s.order < 2 || s.refined_order < 2) {
        throw DomainError("quadrature orders must be at least 2");
    }
}

// Panel edges for integrating g(x) f(x) dx over (0, T_cut): split at the
// quartile-like quantiles of the exit law so nodes track where f lives.
std::vector<double> law_panel_edges(const Domain& d,
                                    const std::vector<double>& z,
                                    const SeriesParams& sp) {
    std::vector<double> edges{0.0};
    for (double q : {0.1, 0.5, 0.9, 1.0 - quantile_cut}) {
        edges.push_back(exit_law_quantile(d, z, q, sp));
    }
    return edges;
}

// Nodes and weights of a panelled Gauss-Legendre rule, with the outer exit
// density folded into the weights.
struct LawRule {
    std::vector<double> nodes;
    std::vector<double> weights;  // GL weight times f(node)
};

LawRule law_rule(const Domain& d, const std::vector<double>& z,
                 const std::vector<double>& edges, int order,
                 const SeriesParams& sp) {
    const GaussLegendre gl(order);
    LawRule rule;
    rule.nodes.reserve(edges.size() * static_cast<std::size_t>(order));
    rule.weights.reserve(rule.nodes.capacity());
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
        const auto xs = gl.mapped_nodes(edges[p], edges[p + 1]);
        const auto ws = gl.mapped_weights(edges[p], edges[p + 1]);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            rule.nodes.push_back(xs[i]);
            rule.weights.push_back(ws[i] * exit_law_density(d, z, xs[i], sp));
        }
    }
    return rule;
}

// Tensor integral of kernel(u, v) against f(u) f(v) du dv.
template <class Kernel>
double tensor_integral(const LawRule& rule, Kernel&& kernel) {
    double total = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        double inner = 0.0;
        for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
            inner += rule.weights[j] * kernel(rule.nodes[i], rule.nodes[j]);
        }
        total += rule.weights[i] * inner;
    }
    return total;
}

template <class Kernel>
double line_integral(const LawRule& rule, Kernel&& kernel) {
    double total = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        total += rule.weights[i] * kernel(rule.nodes[i]);
    }
    return total;
}

EstimateWithError average_over_batch(const OuterExitBatch& b,
                                     const ParallelConfig& par,
                                     const std::function<double(double, double)>& value) {
    if (b.lower.empty()) throw DomainError("empty outer exit batch");
    const std::uint64_t n = b.lower.size();
    const bool paired = b.process == ProcessKind::ibm;
    Accumulator acc = chunked_reduce<Accumulator>(
        n, par,
        [&](std::uint64_t first, std::uint64_t last, Accumulator& slot) {
            for (std::uint64_t i = first; i < last; ++i) {
                const double lo = b.lower[i];
                const double hi = paired ? b.upper[i] : lo;
                slot.add(value(lo, hi));
            }
        },
        [](Accumulator& into, const Accumulator& from) { into.merge(from); });
    return acc.to_estimate("conditional");
}

}  // namespace

std::string process_name(ProcessKind kind) {
    return kind == ProcessKind::ibm ? "ibm" : "btbm";
}

OuterExitBatch draw_outer_exits(const IteratedQuery& q,
                                const ConditionalSettings& s) {
    validate(q.domain);
    require_interior(q.domain, q.start);
    if (s.count < 1) throw DomainError("sample count must be >= 1");

    const ExitSampler sampler =
        s.force_euler
            ? ExitSampler::euler(q.domain, q.start,
                                 s.dt > 0.0 ? s.dt : default_step_size(q.domain))
            : ExitSampler::automatic(q.domain, q.start, s.dt, s.series);

    OuterExitBatch batch;
    batch.process = q.process;
    batch.seed = s.seed;
    batch.scheme = sampler.scheme();
    batch.lower.resize(s.count);
    const bool paired = q.process == ProcessKind::ibm;
    if (paired) batch.upper.resize(s.count);

    chunked_for(s.count, s.parallel, [&](std::uint64_t first, std::uint64_t last) {
        for (std::uint64_t i = first; i < last; ++i) {
            CounterRng rng(s.seed.master_seed, s.seed.stream, i);
            batch.lower[i] = sampler.draw(rng);
            if (paired) batch.upper[i] = sampler.draw(rng);
        }
    });
    return batch;
}

EstimateWithError survival_from_batch(const OuterExitBatch& b, double t,
                                      const SeriesParams& sp,
                                      const ParallelConfig& par) {
    check_time(t);
    return average_over_batch(b, par, [&](double lo, double hi) {
        return interval_survival({lo, hi, t}, sp);
    });
}

EstimateWithError moment_from_batch(const OuterExitBatch& b, double p,
                                    const SeriesParams& sp,
                                    const ParallelConfig& par) {
    if (!(p >= 1.0)) throw DomainError("moment order must be >= 1");
    return average_over_batch(b, par, [&](double lo, double hi) {
        return interval_exit_moment(lo, hi, p, sp);
    });
}

EstimateWithError ibm_survival(const IteratedQuery& q, double t,
                               const ConditionalSettings& s) {
    check_process(q, ProcessKind::ibm, "ibm_survival");
    check_time(t);
    const OuterExitBatch batch = draw_outer_exits(q, s);
    return survival_from_batch(batch, t, s.series, s.parallel);
}

EstimateWithError btbm_survival(const IteratedQuery& q, double t,
                                const ConditionalSettings& s) {
    check_process(q, ProcessKind::btbm, "btbm_survival");
    check_time(t);
    const OuterExitBatch batch = draw_outer_exits(q, s);
    return survival_from_batch(batch, t, s.series, s.parallel);
}

EstimateWithError ibm_survival(const IteratedQuery& q, double t,
                               const QuadratureSettings& s) {
    check_process(q, ProcessKind::ibm, "ibm_survival");
    check_time(t);
    check_quadrature(s);
    const auto edges = law_panel_edges(q.domain, q.start, s.series);
    const auto kernel = [&](double u, double v) {
        return interval_survival({u, v, t}, s.series);
    };
    const double base = tensor_integral(
        law_rule(q.domain, q.start, edges, s.order, s.series), kernel);
    const double refined = tensor_integral(
        law_rule(q.domain, q.start, edges, s.refined_order, s.series), kernel);
    return {refined, std::abs(refined - base) + truncation_bound, 0,
            "quadrature"};
}

EstimateWithError btbm_survival(const IteratedQuery& q, double t,
                                const QuadratureSettings& s) {
    check_process(q, ProcessKind::btbm, "btbm_survival");
    check_time(t);
    check_quadrature(s);
    const auto edges = law_panel_edges(q.domain, q.start, s.series);
    const auto kernel = [&](double u) {
        return interval_survival({u, u, t}, s.series);
    };
    const double base = line_integral(
        law_rule(q.domain, q.start, edges, s.order, s.series), kernel);
    const double refined = line_integral(
        law_rule(q.domain, q.start, edges, s.refined_order, s.series), kernel);
    return {refined, std::abs(refined - base) + truncation_bound, 0,
            "quadrature"};
}

EstimateWithError ibm_survival(const IteratedQuery& q, double t,
                               const PathwiseSettings& s) {
    check_process(q, ProcessKind::ibm, "ibm_survival");
    check_time(t);
    if (s.count < 1) throw DomainError("sample count must be >= 1");
    if (!(s.dt_y > 0.0) || !std::isfinite(s.dt_y)) {
        throw DomainError("dt_y must be positive");
    }

    const ExitSampler sampler =
        ExitSampler::automatic(q.domain, q.start, s.dt, s.series);

    const std::uint64_t full_steps = static_cast<std::uint64_t>(t / s.dt_y);
    const double remainder = t - static_cast<double>(full_steps) * s.dt_y;
    const bool bridge = !s.discrete_extrema;

    Accumulator acc = chunked_reduce<Accumulator>(
        s.count, s.parallel,
        [&](std::uint64_t first, std::uint64_t last, Accumulator& slot) {
            for (std::uint64_t i = first; i < last; ++i) {
                CounterRng rng(s.seed.master_seed, s.seed.stream, i);
                const double lo = sampler.draw(rng);  // barrier below the clock
                const double hi = sampler.draw(rng);  // barrier above
                double y = 0.0;
                double weight = 1.0;
                for (std::uint64_t step = 0; step <= full_steps; ++step) {
                    const double h = step < full_steps ? s.dt_y : remainder;
                    if (h <= 0.0) break;
                    const double y1 = y + std::sqrt(h) * rng.normal();
                    if (y1 >= hi || y1 <= -lo) {
                        weight = 0.0;
                        break;
                    }
                    if (bridge) {
                        const double a_up = 2.0 * (hi - y) * (hi - y1) / h;
                        if (a_up <= 40.0) weight *= 1.0 - std::exp(-a_up);
                        const double a_dn = 2.0 * (lo + y) * (lo + y1) / h;
                        if (a_dn <= 40.0) weight *= 1.0 - std::exp(-a_dn);
                    }
                    y = y1;
                }
                slot.add(weight);
            }
        },
        [](Accumulator& into, const Accumulator& from) { into.merge(from); });
    return acc.to_estimate(bridge ? "pathwise-bridge" : "pathwise-extrema");
}

EstimateWithError iterated_moment(const IteratedQuery& q, double p,
                                  const ConditionalSettings& s) {
    require_interior(q.domain, q.start);
    if (!(p >= 1.0)) throw DomainError("moment order must be >= 1");
    const OuterExitBatch batch = draw_outer_exits(q, s);
    return moment_from_batch(batch, p, s.series, s.parallel);
}

EstimateWithError iterated_phi_moment(const IteratedQuery& q,
                                      const TabulatedPhi& phi,
                                      const ConditionalSettings& s) {
    require_interior(q.domain, q.start);
    if (phi.t.size() < 2 || phi.t.size() != phi.value.size()) {
        throw DomainError("tabulated function needs matching grids of >= 2 knots");
    }
    for (std::size_t i = 0; i + 1 < phi.t.size(); ++i) {
        if (!(phi.t[i] < phi.t[i + 1])) {
            throw DomainError("tabulated time grid must be strictly increasing");
        }
        if (phi.value[i + 1] < phi.value[i]) {
            throw DomainError("tabulated function must be nondecreasing");
        }
    }
    if (!(phi.t.front() >= 0.0)) {
        throw DomainError("tabulated time grid must be nonnegative");
    }

    // E[phi(exit)] = phi(0) + integral of phi'(t) survival(t) dt; with the
    // piecewise-linear phi this is phi(0) plus sum of the knot increments
    // times the survival at the interval midpoints.
    const OuterExitBatch batch = draw_outer_exits(q, s);
    std::vector<double> mids(phi.t.size() - 1);
    std::vector<double> jumps(phi.t.size() - 1);
    for (std::size_t i = 0; i + 1 < phi.t.size(); ++i) {
        mids[i] = 0.5 * (phi.t[i] + phi.t[i + 1]);
        jumps[i] = phi.value[i + 1] - phi.value[i];
    }
    const double base = phi.value.front();
    return average_over_batch(batch, s.parallel, [&](double lo, double hi) {
        double v = base;
        for (std::size_t i = 0; i < mids.size(); ++i) {
            v += jumps[i] * interval_survival({lo, hi, mids[i]}, s.series);
        }
        return v;
    });
}

RepresentationReport representation_crosscheck(const Domain& d,
                                               const std::vector<double>& z,
                                               double t,
                                               const QuadratureSettings& qs) {
    if (!std::holds_alternative<Interval>(d)) {
        throw CapabilityError(
            "representation crosscheck needs an interval domain");
    }
    validate(d);
    require_interior(d, z);
    check_time(t);
    check_quadrature(qs);

    RepresentationReport report;
    if (t == 0.0) {
        // Survival is identically one at t = 0, so every representation that
        // differentiates it in the barriers degenerates; all forms equal 1.
        report.direct = report.parts_upper = report.parts_lower =
            report.parts_both = 1.0;
        return report;
    }

    const auto& seg = std::get<Interval>(d);
    const double zu = z[0] - seg.a;
    const double zv = seg.b - z[0];
    const auto& sp = qs.series;

    const auto density = [&](double x) {
        return interval_density({zu, zv, x}, sp);
    };
    const auto outer_survival = [&](double x) {
        return interval_survival({zu, zv, x}, sp);
    };

    const std::vector<double> edges = law_panel_edges(d, z, sp);
    const GaussLegendre gl(qs.refined_order);
    std::vector<double> nodes;
    std::vector<double> weights;  // bare GL weights (no density folded in)
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
        const auto xs = gl.mapped_nodes(edges[p], edges[p + 1]);
        const auto ws = gl.mapped_weights(edges[p], edges[p + 1]);
        nodes.insert(nodes.end(), xs.begin(), xs.end());
        weights.insert(weights.end(), ws.begin(), ws.end());
    }
    std::vector<double> f(nodes.size());
    std::vector<double> surv(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        f[i] = density(nodes[i]);
        surv[i] = outer_survival(nodes[i]);
    }

    const auto tensor = [&](auto&& kernel, const std::vector<double>& wu,
                            const std::vector<double>& wv) {
        double total = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            double inner = 0.0;
            for (std::size_t j = 0; j < nodes.size(); ++j) {
                inner += weights[j] * wv[j] * kernel(nodes[i], nodes[j]);
            }
            total += weights[i] * wu[i] * inner;
        }
        return total;
    };

    report.direct = tensor(
        [&](double u, double v) { return interval_survival({u, v, t}, sp); }, f,
        f);
    report.parts_upper = tensor(
        [&](double u, double v) {
            return interval_partial({u, v, t}, Side::right, sp);
        },
        f, surv);
    report.parts_lower = tensor(
        [&](double u, double v) {
            return interval_partial({u, v, t}, Side::left, sp);
        },
        surv, f);
    report.parts_both = tensor(
        [&](double u, double v) {
            return interval_mixed_partial({u, v, t}, sp);
        },
        surv, surv);

    const double values[4] = {report.direct, report.parts_upper,
                              report.parts_lower, report.parts_both};
    for (int i = 0; i < 4; ++i) {
        for (int j = i + 1; j < 4; ++j) {
            report.max_discrepancy =
                std::max(report.max_discrepancy, std::abs(values[i] - values[j]));
        }
    }
    return report;
}

}  // namespace ibex
