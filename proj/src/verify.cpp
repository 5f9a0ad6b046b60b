#include "ibex/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ibex/bm_exit.hpp"
#include "ibex/errors.hpp"
#include "ibex/rng.hpp"

namespace ibex {

namespace {

Symmetrization to_symmetrization(Comparison c) {
    switch (c) {
        case Comparison::equal_volume_ball:
            return Symmetrization::equal_volume_ball;
        case Comparison::inradius_slab:
            return Symmetrization::inradius_slab;
        case Comparison::diameter_lens:
            return Symmetrization::diameter_lens;
    }
    throw DomainError("unknown comparison");
}

ConditionalSettings cell_settings(const Domain& d, const VerificationSettings& s,
                                  std::uint64_t stream, std::size_t count) {
    ConditionalSettings cs;
    cs.count = count;
    cs.seed = {s.seed.master_seed, stream};
    if (!has_exact_exit_law(d)) {
        const double r = geometry(d).inradius;
        cs.dt = s.dt_scale * r * r;
    }
    cs.series = s.series;
    cs.parallel = s.parallel;
    return cs;
}

void finalize(VerificationReport& report) {
    report.flag_count = 0;
    report.confirmed_count = 0;
    report.worst_margin = std::numeric_limits<double>::infinity();
    for (const auto& r : report.records) {
        if (r.flagged) ++report.flag_count;
        if (r.confirmed) ++report.confirmed_count;
        report.worst_margin = std::min(report.worst_margin, r.margin);
    }
}

void check_settings(const VerificationSettings& s) {
    if (s.count < 2) throw DomainError("verification needs count >= 2");
    if (!(s.k > 0.0)) throw DomainError("flag threshold k must be positive");
    if (s.confirm_factor < 1) throw DomainError("confirm_factor must be >= 1");
}

// One inequality family: both checks differ only in how a batch and a grid
// coordinate turn into an estimate.
template <class Evaluate, class Redraw>
VerificationReport run_cells(const std::vector<std::vector<double>>& z_grid,
                             const std::vector<double>& x_grid,
                             const VerificationSettings& s, Evaluate&& evaluate,
                             Redraw&& redraw) {
    // redraw(side_index, z_index or npos for rhs, stream, count) -> batch
    const std::size_t nz = z_grid.size();
    const std::uint64_t confirm_base =
        s.seed.stream + 1 + static_cast<std::uint64_t>(nz);

    const OuterExitBatch rhs_batch =
        redraw(/*lhs=*/false, 0, s.seed.stream, s.count);
    std::vector<EstimateWithError> rhs_cache(x_grid.size());
    for (std::size_t j = 0; j < x_grid.size(); ++j) {
        rhs_cache[j] = evaluate(rhs_batch, x_grid[j]);
    }

    VerificationReport report;
    report.records.reserve(nz * x_grid.size());
    for (std::size_t i = 0; i < nz; ++i) {
        const OuterExitBatch lhs_batch =
            redraw(/*lhs=*/true, i, s.seed.stream + 1 + i, s.count);
        for (std::size_t j = 0; j < x_grid.size(); ++j) {
            VerificationRecord rec;
            rec.start = z_grid[i];
            rec.coordinate = x_grid[j];
            rec.lhs = evaluate(lhs_batch, x_grid[j]);
            rec.rhs = rhs_cache[j];
            rec.margin = rec.rhs.value - rec.lhs.value;
            rec.combined_se = std::hypot(rec.lhs.std_error, rec.rhs.std_error);
            rec.flagged = rec.margin < -s.k * rec.combined_se;
            if (rec.flagged) {
                // Confirmation pass: fresh streams, confirm_factor x samples.
                const std::size_t cell = i * x_grid.size() + j;
                const std::size_t big = s.count * s.confirm_factor;
                const auto lhs2 = evaluate(
                    redraw(true, i, confirm_base + 2 * cell, big), x_grid[j]);
                const auto rhs2 = evaluate(
                    redraw(false, 0, confirm_base + 2 * cell + 1, big),
                    x_grid[j]);
                const double margin2 = rhs2.value - lhs2.value;
                const double se2 = std::hypot(lhs2.std_error, rhs2.std_error);
                rec.confirmed = margin2 < -s.k * se2;
            }
            report.records.push_back(std::move(rec));
        }
    }
    finalize(report);
    return report;
}

VerificationReport check_inequality(const Domain& d, ProcessKind process,
                                    Comparison cmp,
                                    const std::vector<std::vector<double>>& z_grid,
                                    const std::vector<double>& x_grid,
                                    const VerificationSettings& s, bool moments) {
    validate(d);
    check_settings(s);
    if (z_grid.empty() || x_grid.empty()) {
        throw DomainError("verification grids must be nonempty");
    }
    for (double x : x_grid) {
        if (moments ? !(x >= 1.0) : !(x >= 0.0)) {
            throw DomainError(moments ? "moment orders must be >= 1"
                                      : "times must be nonnegative");
        }
    }
    for (const auto& z : z_grid) require_interior(d, z);

    const Domain dstar = symmetrize(d, to_symmetrization(cmp));
    const std::vector<double> origin(
        static_cast<std::size_t>(dimension(dstar)), 0.0);

    const auto redraw = [&](bool lhs, std::size_t zi, std::uint64_t stream,
                            std::size_t count) {
        const Domain& dom = lhs ? d : dstar;
        const std::vector<double>& z = lhs ? z_grid[zi] : origin;
        return draw_outer_exits({dom, z, process},
                                cell_settings(dom, s, stream, count));
    };
    const auto evaluate = [&](const OuterExitBatch& b, double x) {
        return moments ? moment_from_batch(b, x, s.series, s.parallel)
                       : survival_from_batch(b, x, s.series, s.parallel);
    };
    return run_cells(z_grid, x_grid, s, evaluate, redraw);
}

}  // namespace

std::string comparison_name(Comparison c) {
    switch (c) {
        case Comparison::equal_volume_ball:
            return "equal-volume-ball";
        case Comparison::inradius_slab:
            return "inradius-slab";
        case Comparison::diameter_lens:
            return "diameter-lens";
    }
    return "unknown";
}

const char* record_status(const VerificationRecord& r) {
    if (!r.flagged) return "pass";
    return r.confirmed ? "confirmed" : "unconfirmed";
}

VerificationReport check_isoperimetric(const Domain& d, ProcessKind process,
                                       Comparison cmp,
                                       const std::vector<std::vector<double>>& z_grid,
                                       const std::vector<double>& t_grid,
                                       const VerificationSettings& s) {
    return check_inequality(d, process, cmp, z_grid, t_grid, s, false);
}

VerificationReport check_moments(const Domain& d, ProcessKind process,
                                 Comparison cmp,
                                 const std::vector<std::vector<double>>& z_grid,
                                 const std::vector<double>& p_grid,
                                 const VerificationSettings& s) {
    return check_inequality(d, process, cmp, z_grid, p_grid, s, true);
}

SignScanReport sign_scan(const std::vector<double>& u_grid,
                         const std::vector<double>& v_grid,
                         const std::vector<double>& t_grid,
                         const SeriesParams& sp) {
    if (u_grid.empty() || v_grid.empty() || t_grid.empty()) {
        throw DomainError("sign scan grids must be nonempty");
    }
    for (const auto* grid : {&u_grid, &v_grid, &t_grid}) {
        for (double x : *grid) {
            if (!(x > 0.0)) throw DomainError("sign scan grids must be positive");
        }
    }
    SignScanReport report;
    for (double u : u_grid) {
        for (double v : v_grid) {
            for (double t : t_grid) {
                const double val = interval_mixed_partial({u, v, t}, sp);
                if (val > sp.abs_tol) {
                    ++report.positive;
                } else if (val < -sp.abs_tol) {
                    ++report.negative;
                } else {
                    ++report.near_zero;
                }
                if (val < report.min_value) {
                    report.min_value = val;
                    report.min_u = u;
                    report.min_v = v;
                    report.min_t = t;
                }
            }
        }
    }
    return report;
}

double law_survival(const ScalarLaw& law, double t) {
    return std::visit(
        [&](const auto& l) -> double {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, PointMassLaw>) {
                return l.value > t ? 1.0 : 0.0;
            } else if constexpr (std::is_same_v<T, ExponentialLaw>) {
                return std::exp(-l.rate * t);
            } else {
                std::size_t above = 0;
                for (double x : l.draws) {
                    if (x > t) ++above;
                }
                return static_cast<double>(above) /
                       static_cast<double>(l.draws.size());
            }
        },
        law);
}

namespace {

void validate_law(const ScalarLaw& law) {
    std::visit(
        [](const auto& l) {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, PointMassLaw>) {
                if (!(l.value > 0.0)) {
                    throw DomainError("point mass must be positive");
                }
            } else if constexpr (std::is_same_v<T, ExponentialLaw>) {
                if (!(l.rate > 0.0)) {
                    throw DomainError("exponential rate must be positive");
                }
            } else {
                if (l.draws.empty()) {
                    throw DomainError("empirical law needs draws");
                }
                for (double x : l.draws) {
                    if (!(x > 0.0)) {
                        throw DomainError("empirical draws must be positive");
                    }
                }
            }
        },
        law);
}

double draw_scalar(const ScalarLaw& law, CounterRng& rng) {
    return std::visit(
        [&](const auto& l) -> double {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, PointMassLaw>) {
                return l.value;
            } else if constexpr (std::is_same_v<T, ExponentialLaw>) {
                return rng.exponential(l.rate);
            } else {
                const auto n = static_cast<double>(l.draws.size());
                auto idx = static_cast<std::size_t>(rng.uniform() * n);
                if (idx >= l.draws.size()) idx = l.draws.size() - 1;
                return l.draws[idx];
            }
        },
        law);
}

OuterExitBatch draw_law_batch(const ScalarLaw& law, bool symmetric,
                              std::size_t count, std::uint64_t master,
                              std::uint64_t stream, const ParallelConfig& par) {
    OuterExitBatch batch;
    batch.process = symmetric ? ProcessKind::btbm : ProcessKind::ibm;
    batch.seed = {master, stream};
    batch.scheme = "law-draws";
    batch.lower.resize(count);
    if (!symmetric) batch.upper.resize(count);
    chunked_for(count, par, [&](std::uint64_t first, std::uint64_t last) {
        for (std::uint64_t i = first; i < last; ++i) {
            CounterRng rng(master, stream, i);
            batch.lower[i] = draw_scalar(law, rng);
            if (!symmetric) batch.upper[i] = draw_scalar(law, rng);
        }
    });
    return batch;
}

}  // namespace

VerificationReport check_dominance(const DominanceSpec& spec,
                                   const VerificationSettings& s) {
    check_settings(s);
    validate_law(spec.dominated);
    validate_law(spec.dominating);
    if (spec.t_grid.empty()) throw DomainError("dominance t_grid must be nonempty");
    for (double t : spec.t_grid) {
        if (!(t >= 0.0)) throw DomainError("times must be nonnegative");
        if (law_survival(spec.dominated, t) > law_survival(spec.dominating, t)) {
            std::ostringstream msg;
            msg << "dominance precondition fails at t = " << t;
            throw DomainError(msg.str());
        }
    }

    const auto redraw = [&](bool lhs, std::size_t, std::uint64_t stream,
                            std::size_t count) {
        return draw_law_batch(lhs ? spec.dominated : spec.dominating,
                              spec.symmetric, count, s.seed.master_seed, stream,
                              s.parallel);
    };
    const auto evaluate = [&](const OuterExitBatch& b, double t) {
        return survival_from_batch(b, t, s.series, s.parallel);
    };
    auto report = run_cells({{}}, spec.t_grid, s, evaluate, redraw);
    return report;
}

}  // namespace ibex
