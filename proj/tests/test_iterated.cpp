#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "ibex/errors.hpp"
#include "ibex/iterated.hpp"
#include "ibex/quadrature.hpp"

using namespace ibex;

namespace {

IteratedQuery centered_interval_query(ProcessKind kind) {
    return {Domain{Interval{-1.0, 1.0}}, {0.0}, kind};
}

double combined_se(const EstimateWithError& a, const EstimateWithError& b) {
    return std::hypot(a.std_error, b.std_error);
}

// Mean exit time of plain Brownian motion for a domain with a closed-form
// law, as the integral of the survival function.
double mean_exit_time(const Domain& d, const std::vector<double>& z) {
    const std::vector<double> edges{0.0, exit_law_quantile(d, z, 0.5),
                                    exit_law_quantile(d, z, 0.9),
                                    exit_law_quantile(d, z, 1.0 - 1e-12)};
    return integrate_panels([&](double t) { return exit_law_survival(d, z, t); },
                            edges, 48);
}

}  // namespace

TEST_CASE("survival at t = 0 is exactly one") {
    const auto q = centered_interval_query(ProcessKind::ibm);
    ConditionalSettings cs;
    cs.count = 200;
    cs.seed = {5, 0};
    const auto cond = ibm_survival(q, 0.0, cs);
    CHECK(cond.value == 1.0);
    CHECK(cond.std_error == 0.0);

    const auto quad = ibm_survival(q, 0.0, QuadratureSettings{});
    CHECK(std::abs(quad.value - 1.0) <= 1e-9);

    const auto qb = centered_interval_query(ProcessKind::btbm);
    ConditionalSettings bs = cs;
    bs.seed = {5, 1};
    CHECK(btbm_survival(qb, 0.0, bs).value == 1.0);
}

TEST_CASE("conditional and quadrature estimates of ibm survival agree") {
    const auto q = centered_interval_query(ProcessKind::ibm);
    ConditionalSettings cs;
    cs.count = 100000;
    cs.seed = {101, 0};
    const auto batch = draw_outer_exits(q, cs);
    for (double t : {0.25, 1.0, 4.0}) {
        const auto cond = survival_from_batch(batch, t);
        const auto quad = ibm_survival(q, t, QuadratureSettings{});
        CHECK(cond.value >= 0.0);
        CHECK(cond.value <= 1.0);
        CHECK(std::abs(cond.value - quad.value) <=
              3.0 * combined_se(cond, quad) + 1e-9);
    }
}

TEST_CASE("btbm: conditional and quadrature agree; both are probabilities") {
    const auto q = centered_interval_query(ProcessKind::btbm);
    ConditionalSettings cs;
    cs.count = 30000;
    cs.seed = {101, 7};
    const auto batch = draw_outer_exits(q, cs);
    CHECK(batch.upper.empty());
    for (double t : {0.25, 1.0, 4.0}) {
        const auto cond = survival_from_batch(batch, t);
        const auto quad = btbm_survival(q, t, QuadratureSettings{});
        CHECK(cond.value >= 0.0);
        CHECK(cond.value <= 1.0);
        CHECK(quad.value >= 0.0);
        CHECK(quad.value <= 1.0 + 1e-9);
        CHECK(std::abs(cond.value - quad.value) <=
              3.0 * combined_se(cond, quad) + 1e-9);
    }
}

TEST_CASE("fourth-power scaling: survival_{cD}(cz, c^4 t) = survival_D(z, t)") {
    // Outer exit times scale by c^2 and the inner interval law by another
    // c^2, hence c^4 in time.
    const IteratedQuery base{Domain{Interval{-1.0, 1.0}}, {0.3}, ProcessKind::ibm};
    const IteratedQuery scaled{Domain{Interval{-2.0, 2.0}}, {0.6}, ProcessKind::ibm};
    const double t = 0.5;
    const double c4 = 16.0;

    const auto qa = ibm_survival(base, t, QuadratureSettings{});
    const auto qb = ibm_survival(scaled, c4 * t, QuadratureSettings{});
    CHECK(std::abs(qa.value - qb.value) <= 1e-8);

    ConditionalSettings ca;
    ca.count = 20000;
    ca.seed = {77, 0};
    ConditionalSettings cb = ca;
    cb.seed = {77, 1};  // independent draws on the scaled domain
    const auto ma = ibm_survival(base, t, ca);
    const auto mb = ibm_survival(scaled, c4 * t, cb);
    CHECK(std::abs(ma.value - mb.value) <= 3.0 * combined_se(ma, mb));
}

TEST_CASE("pathwise estimator agrees with conditional and quadrature") {
    const auto q = centered_interval_query(ProcessKind::ibm);
    const double t = 1.0;

    PathwiseSettings ps;
    ps.count = 20000;
    ps.seed = {303, 0};
    ps.dt_y = 1e-3;
    const auto path = ibm_survival(q, t, ps);

    ConditionalSettings cs;
    cs.count = 20000;
    cs.seed = {303, 1};
    const auto cond = ibm_survival(q, t, cs);
    const auto quad = ibm_survival(q, t, QuadratureSettings{});

    CHECK(path.method == "pathwise-bridge");
    CHECK(std::abs(path.value - cond.value) <= 3.0 * combined_se(path, cond));
    CHECK(std::abs(path.value - quad.value) <=
          3.0 * combined_se(path, quad) + 1e-9);

    // The literal running-extrema indicator is biased upward at this step
    // size but must stay close and inside [0, 1].
    PathwiseSettings literal = ps;
    literal.discrete_extrema = true;
    literal.seed = {303, 2};
    const auto ind = ibm_survival(q, t, literal);
    CHECK(ind.method == "pathwise-extrema");
    CHECK(ind.value >= 0.0);
    CHECK(ind.value <= 1.0);
    CHECK(std::abs(ind.value - quad.value) <= 3.0 * combined_se(ind, quad) + 0.02);
}

TEST_CASE("rectangle: conditional matches tensor quadrature of the product law") {
    const IteratedQuery q{Domain{Rectangle{0.0, 1.0, 0.0, 2.0}}, {0.5, 0.7},
                          ProcessKind::ibm};
    ConditionalSettings cs;
    cs.count = 20000;
    cs.seed = {404, 0};
    const auto batch = draw_outer_exits(q, cs);
    CHECK(batch.scheme == "exact-inversion");
    for (double t : {0.1, 0.4}) {
        const auto cond = survival_from_batch(batch, t);
        const auto quad = ibm_survival(q, t, QuadratureSettings{});
        CHECK(std::abs(cond.value - quad.value) <=
              3.0 * combined_se(cond, quad) + 1e-9);
    }
}

TEST_CASE("survival estimates from one batch are nonincreasing in t") {
    const auto q = centered_interval_query(ProcessKind::ibm);
    ConditionalSettings cs;
    cs.count = 5000;
    cs.seed = {55, 0};
    const auto batch = draw_outer_exits(q, cs);
    double prev = 1.0;
    for (double t : {0.1, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0}) {
        const double s = survival_from_batch(batch, t).value;
        CHECK(s <= prev + 1e-12);  // monotone per sample, hence in the mean
        prev = s;
    }
}

TEST_CASE("first-moment identities for both processes") {
    // ibm: the two outer exit times are independent with mean u v = 1, and
    // the inner mean is their product.
    const auto qi = centered_interval_query(ProcessKind::ibm);
    ConditionalSettings ci;
    ci.count = 50000;
    ci.seed = {606, 0};
    const auto mi = iterated_moment(qi, 1.0, ci);
    CHECK(std::abs(mi.value - 1.0) <= 3.0 * mi.std_error);

    // btbm: the inner mean given tau is tau^2, so the first moment is the
    // second moment 5/3 of the outer exit time.
    const auto qb = centered_interval_query(ProcessKind::btbm);
    ConditionalSettings cb;
    cb.count = 50000;
    cb.seed = {606, 1};
    const auto mb = iterated_moment(qb, 1.0, cb);
    CHECK(std::abs(mb.value - 5.0 / 3.0) <= 3.0 * mb.std_error);

    // Scaling: on (-c, c) the ibm first moment is c^4.
    const double c = 1.3;
    const IteratedQuery qs{Domain{Interval{-c, c}}, {0.0}, ProcessKind::ibm};
    ConditionalSettings cc;
    cc.count = 30000;
    cc.seed = {606, 2};
    const auto ms = iterated_moment(qs, 1.0, cc);
    CHECK(std::abs(ms.value - c * c * c * c) <= 3.0 * ms.std_error);
}

TEST_CASE("ibm first moment equals the squared mean exit time of the motion") {
    ConditionalSettings cs;
    cs.count = 20000;

    // Rectangle: closed-form mean via the survival integral.
    const Domain rect{Rectangle{0.0, 1.0, 0.0, 2.0}};
    const std::vector<double> zr{0.5, 0.7};
    const double mean_rect = mean_exit_time(rect, zr);
    cs.seed = {707, 0};
    const auto mr = iterated_moment({rect, zr, ProcessKind::ibm}, 1.0, cs);
    CHECK(std::abs(mr.value - mean_rect * mean_rect) <= 3.0 * mr.std_error);

    // Disk: from the center the mean exit time is R^2/2 = 1/2, so the ibm
    // first moment is 1/4.  Outer draws use the Euler-bridge sampler.
    const Domain disk{Ball{{0.0, 0.0}, 1.0}};
    cs.seed = {707, 1};
    cs.dt = 1e-3;
    const auto md = iterated_moment({disk, {0.0, 0.0}, ProcessKind::ibm}, 1.0, cs);
    CHECK(std::abs(md.value - 0.25) <= 3.0 * md.std_error + 2e-3);
}

TEST_CASE("tabulated nondecreasing functions reproduce power moments") {
    const auto q = centered_interval_query(ProcessKind::ibm);
    ConditionalSettings cs;
    cs.count = 5000;
    cs.seed = {808, 0};

    // phi(t) = min(t, 12) tabulated at two resolutions: the midpoint
    // discretization of the survival integral converges quadratically, and
    // the truncated mean stays below the full first moment (same draws).
    TabulatedPhi coarse;
    for (int i = 0; i <= 120; ++i) {
        coarse.t.push_back(0.1 * i);
        coarse.value.push_back(0.1 * i);
    }
    TabulatedPhi fine;
    for (int i = 0; i <= 480; ++i) {
        fine.t.push_back(0.025 * i);
        fine.value.push_back(0.025 * i);
    }
    cs.count = 3000;
    const auto via_coarse = iterated_phi_moment(q, coarse, cs);
    const auto via_fine = iterated_phi_moment(q, fine, cs);
    const auto direct = iterated_moment(q, 1.0, cs);  // same seed, same draws
    CHECK(std::abs(via_coarse.value - via_fine.value) <= 2e-3);
    CHECK(via_fine.value <= direct.value + 1e-3);

    // A ramp phi supported on [a, a + delta] evaluates the survival at the
    // ramp midpoint.
    TabulatedPhi ramp{{0.0, 1.0, 1.2}, {0.0, 0.0, 1.0}};
    const auto step_est = iterated_phi_moment(q, ramp, cs);
    const auto surv = survival_from_batch(draw_outer_exits(q, cs), 1.1);
    CHECK(step_est.value == doctest::Approx(surv.value).epsilon(1e-12));
}

TEST_CASE("tabulated function validation") {
    const auto q = centered_interval_query(ProcessKind::ibm);
    ConditionalSettings cs;
    cs.count = 10;
    CHECK_THROWS_AS(
        (void)iterated_phi_moment(q, {{0.0, 1.0}, {1.0, 0.5}}, cs),  // decreasing
        DomainError);
    CHECK_THROWS_AS(
        (void)iterated_phi_moment(q, {{0.0, 0.0}, {0.0, 1.0}}, cs),  // flat grid
        DomainError);
    CHECK_THROWS_AS((void)iterated_phi_moment(q, {{0.0}, {1.0}}, cs),
                    DomainError);
    CHECK_THROWS_AS(
        (void)iterated_phi_moment(q, {{0.0, 1.0}, {0.0, 1.0, 2.0}}, cs),
        DomainError);
}

TEST_CASE("all four survival representations of the interval agree") {
    const Domain seg{Interval{-1.0, 1.0}};
    for (double z : {0.0, 0.5, 0.9}) {
        for (double t : {0.25, 1.0, 4.0}) {
            const auto rep = representation_crosscheck(seg, {z}, t);
            CHECK(rep.max_discrepancy < 1e-6);
            CHECK(rep.direct >= 0.0);
            CHECK(rep.direct <= 1.0 + 1e-9);
        }
    }
    const auto at_zero = representation_crosscheck(seg, {0.0}, 0.0);
    CHECK(at_zero.direct == 1.0);
    CHECK(at_zero.parts_both == 1.0);
    CHECK(at_zero.max_discrepancy == 0.0);
}

TEST_CASE("estimates are deterministic across worker counts and streams") {
    const auto q = centered_interval_query(ProcessKind::ibm);
    ConditionalSettings serial;
    serial.count = 20000;
    serial.seed = {909, 3};
    serial.parallel = {1, 512};
    ConditionalSettings wide = serial;
    wide.parallel = {4, 512};

    const auto a = ibm_survival(q, 1.0, serial);
    const auto b = ibm_survival(q, 1.0, wide);
    CHECK(a.value == b.value);
    CHECK(a.std_error == b.std_error);

    ConditionalSettings other = serial;
    other.seed = {909, 4};
    CHECK(ibm_survival(q, 1.0, other).value != a.value);
}

TEST_CASE("invalid queries are rejected") {
    const auto qi = centered_interval_query(ProcessKind::ibm);
    const auto qb = centered_interval_query(ProcessKind::btbm);
    ConditionalSettings cs;
    cs.count = 10;

    CHECK_THROWS_AS((void)ibm_survival(qb, 1.0, cs), DomainError);
    CHECK_THROWS_AS((void)btbm_survival(qi, 1.0, cs), DomainError);
    CHECK_THROWS_AS((void)ibm_survival(qi, -1.0, cs), DomainError);
    CHECK_THROWS_AS((void)iterated_moment(qi, 0.5, cs), DomainError);

    ConditionalSettings empty = cs;
    empty.count = 0;
    CHECK_THROWS_AS((void)ibm_survival(qi, 1.0, empty), DomainError);

    // Quadrature needs a closed-form outer law.
    const IteratedQuery tri{
        Domain{ConvexPolygon{{{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}}},
        {0.2, 0.2},
        ProcessKind::ibm};
    CHECK_THROWS_AS((void)ibm_survival(tri, 1.0, QuadratureSettings{}),
                    CapabilityError);
    CHECK_THROWS_AS(
        (void)representation_crosscheck(tri.domain, tri.start, 1.0),
        CapabilityError);

    PathwiseSettings ps;
    ps.count = 10;
    ps.dt_y = 0.0;
    CHECK_THROWS_AS((void)ibm_survival(qi, 1.0, ps), DomainError);
}
