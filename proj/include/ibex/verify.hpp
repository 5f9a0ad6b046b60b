#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "ibex/domain.hpp"
#include "ibex/estimate.hpp"
#include "ibex/iterated.hpp"

namespace ibex {

// Comparison domain on the right-hand side of an inequality check: the
// origin-centered ball of equal volume, the slab built on the inradius
// interval, or the lens cut from the diameter ball by the inradius strip.
enum class Comparison { equal_volume_ball, inradius_slab, diameter_lens };

std::string comparison_name(Comparison c);

// Shared settings for the statistical checks.  Each side of a cell is the
// conditional estimator over `count` outer draws; a cell is flagged when
// margin = rhs - lhs < -k * combined_se, and every flag is retried once at
// confirm_factor times the sample count on fresh streams before it may be
// confirmed.  Domains without a closed-form exit law are sampled with Euler
// step dt_scale * inradius^2.
//
// Stream layout, derived from seed.stream with nz = z_grid size: the
// right-hand batch uses seed.stream, the left-hand batch for z_grid[i] uses
// seed.stream + 1 + i, and the confirmation rerun of cell c draws its two
// sides from seed.stream + 1 + nz + 2c and the stream after it.  Cells are
// indexed row-major over (z, t-or-p).
struct VerificationSettings {
    std::size_t count = 100000;
    double k = 3.0;
    SeedInfo seed;
    std::size_t confirm_factor = 4;
    double dt_scale = 1e-4;
    SeriesParams series;
    ParallelConfig parallel;
};

struct VerificationRecord {
    std::vector<double> start;  // left-hand start point (empty for dominance)
    double coordinate = 0.0;    // the cell's t or p
    EstimateWithError lhs;
    EstimateWithError rhs;
    double margin = 0.0;  // rhs - lhs; the inequalities claim margin >= 0
    double combined_se = 0.0;
    bool flagged = false;    // first-run margin beyond -k * combined_se
    bool confirmed = false;  // rerun at confirm_factor x count still flags
};

// "pass", "unconfirmed" (flag not reproduced), or "confirmed".
const char* record_status(const VerificationRecord& r);

struct VerificationReport {
    std::vector<VerificationRecord> records;
    std::size_t flag_count = 0;
    std::size_t confirmed_count = 0;
    double worst_margin = std::numeric_limits<double>::infinity();

    bool any_confirmed() const { return confirmed_count > 0; }
};

// Survival-function inequality P_z[exit of D > t] <= P_0[exit of D* > t] for
// the chosen process, checked on the (z, t) grid.
VerificationReport check_isoperimetric(const Domain& d, ProcessKind process,
                                       Comparison cmp,
                                       const std::vector<std::vector<double>>& z_grid,
                                       const std::vector<double>& t_grid,
                                       const VerificationSettings& s = {});

// Moment inequality E_z[(exit of D)^p] <= E_0[(exit of D*)^p] on the (z, p)
// grid, p >= 1.
VerificationReport check_moments(const Domain& d, ProcessKind process,
                                 Comparison cmp,
                                 const std::vector<std::vector<double>>& z_grid,
                                 const std::vector<double>& p_grid,
                                 const VerificationSettings& s = {});

// Exploratory scan of the mixed partial of the inner-interval survival over
// a (u, v, t) grid: sign counts, minimum value, and its location.  Values
// within abs_tol of zero count as near_zero.  Never a pass/fail gate.
struct SignScanReport {
    std::size_t positive = 0;
    std::size_t negative = 0;
    std::size_t near_zero = 0;
    double min_value = std::numeric_limits<double>::infinity();
    double min_u = 0.0;
    double min_v = 0.0;
    double min_t = 0.0;
};

SignScanReport sign_scan(const std::vector<double>& u_grid,
                         const std::vector<double>& v_grid,
                         const std::vector<double>& t_grid,
                         const SeriesParams& sp = {});

// Scalar laws for the dominance-transfer check.
struct PointMassLaw {
    double value = 1.0;
};
struct ExponentialLaw {
    double rate = 1.0;
};
struct EmpiricalDraws {
    std::vector<double> draws;
};
using ScalarLaw = std::variant<PointMassLaw, ExponentialLaw, EmpiricalDraws>;

double law_survival(const ScalarLaw& law, double t);

// Dominated law (stochastically smaller) and dominating law; the transfer
// states that inner-interval survival with barriers drawn from the dominated
// law stays below the dominating version at every t.  symmetric = true uses
// one draw for both barriers; false uses independent pairs.
struct DominanceSpec {
    ScalarLaw dominated;
    ScalarLaw dominating;
    std::vector<double> t_grid;
    bool symmetric = false;
};

// Verifies the precondition (pointwise survival dominance on t_grid), then
// runs the flag rule on the Monte Carlo transfer estimates.
VerificationReport check_dominance(const DominanceSpec& spec,
                                   const VerificationSettings& s = {});

}  // namespace ibex
