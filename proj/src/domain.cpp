#include "ibex/domain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ibex/errors.hpp"

namespace ibex {

namespace {

constexpr double pi = 3.14159265358979323846;
constexpr double inf = std::numeric_limits<double>::infinity();

bool finite_positive(double x) { return std::isfinite(x) && x > 0.0; }

// Inward edge description n.x >= offset for a CCW polygon edge; n is unit.
struct Edge {
    double nx;
    double ny;
    double offset;
};

std::vector<Edge> polygon_edges(const ConvexPolygon& poly) {
    const auto& vs = poly.vertices;
    std::vector<Edge> edges;
    edges.reserve(vs.size());
    for (std::size_t i = 0; i < vs.size(); ++i) {
        const auto& p = vs[i];
        const auto& q = vs[(i + 1) % vs.size()];
        const double ex = q[0] - p[0];
        const double ey = q[1] - p[1];
        const double len = std::hypot(ex, ey);
        // CCW boundary: the inward normal is the edge direction rotated left.
        const double nx = -ey / len;
        const double ny = ex / len;
        edges.push_back({nx, ny, nx * p[0] + ny * p[1]});
    }
    return edges;
}

void validate_polygon(const ConvexPolygon& poly) {
    const auto& vs = poly.vertices;
    if (vs.size() < 3) throw DomainError("polygon needs at least 3 vertices");
    for (const auto& v : vs) {
        if (!std::isfinite(v[0]) || !std::isfinite(v[1])) {
            throw DomainError("polygon vertices must be finite");
        }
    }
    for (std::size_t i = 0; i < vs.size(); ++i) {
        const auto& a = vs[i];
        const auto& b = vs[(i + 1) % vs.size()];
        const auto& c = vs[(i + 2) % vs.size()];
        const double cross =
            (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
        if (!(cross > 0.0)) {
            throw DomainError(
                "polygon must be strictly convex with counterclockwise vertices");
        }
    }
}

// Largest inscribed circle via the Chebyshev center: maximize r subject to
// n_i.x - offset_i >= r.  The optimum is attained with three active edges
// (or at an endpoint of a sliding segment, which three edges also pin), so
// exhaustive 3x3 solves over edge triples suffice for the small polygons
// handled here.
double polygon_inradius(const ConvexPolygon& poly) {
    const auto edges = polygon_edges(poly);
    const std::size_t m = edges.size();
    double best = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            for (std::size_t k = j + 1; k < m; ++k) {
                // Solve n.x - r = offset for the three edges.
                const Edge rows[3] = {edges[i], edges[j], edges[k]};
                double a[3][4];
                for (int r = 0; r < 3; ++r) {
                    a[r][0] = rows[r].nx;
                    a[r][1] = rows[r].ny;
                    a[r][2] = -1.0;
                    a[r][3] = rows[r].offset;
                }
                // Gaussian elimination with partial pivoting.
                bool singular = false;
                for (int col = 0; col < 3 && !singular; ++col) {
                    int piv = col;
                    for (int r = col + 1; r < 3; ++r) {
                        if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
                    }
                    if (std::abs(a[piv][col]) < 1e-12) {
                        singular = true;
                        break;
                    }
                    std::swap(a[col], a[piv]);
                    for (int r = 0; r < 3; ++r) {
                        if (r == col) continue;
                        const double f = a[r][col] / a[col][col];
                        for (int c = col; c < 4; ++c) a[r][c] -= f * a[col][c];
                    }
                }
                if (singular) continue;
                const double x = a[0][3] / a[0][0];
                const double y = a[1][3] / a[1][1];
                const double r = a[2][3] / a[2][2];
                if (!(r > best)) continue;
                bool feasible = true;
                for (const Edge& e : edges) {
                    if (e.nx * x + e.ny * y - e.offset < r - 1e-9) {
                        feasible = false;
                        break;
                    }
                }
                if (feasible) best = r;
            }
        }
    }
    if (!(best > 0.0)) throw DomainError("polygon inradius computation failed");
    return best;
}

double lens_area(const Lens& lens) {
    const double h = lens.half_width;
    const double rho = lens.radius;
    if (rho <= h) return pi * rho * rho;
    return 2.0 * (h * std::sqrt(rho * rho - h * h) + rho * rho * std::asin(h / rho));
}

double ball_volume(int n, double r) {
    switch (n) {
        case 1: return 2.0 * r;
        case 2: return pi * r * r;
        default: return 4.0 * pi * r * r * r / 3.0;
    }
}

double ball_radius_for_volume(int n, double vol) {
    switch (n) {
        case 1: return vol / 2.0;
        case 2: return std::sqrt(vol / pi);
        default: return std::cbrt(3.0 * vol / (4.0 * pi));
    }
}

void check_dim(const Domain& d, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != dimension(d)) {
        throw DomainError("point dimension does not match the domain");
    }
}

}  // namespace

void validate(const Domain& d) {
    std::visit(
        [](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Interval>) {
                if (!std::isfinite(s.a) || !std::isfinite(s.b) || !(s.a < s.b)) {
                    throw DomainError("interval requires a < b, finite");
                }
            } else if constexpr (std::is_same_v<T, Ball>) {
                if (s.center.empty() || s.center.size() > 3) {
                    throw DomainError("ball dimension must be 1, 2, or 3");
                }
                for (double c : s.center) {
                    if (!std::isfinite(c)) throw DomainError("ball center must be finite");
                }
                if (!finite_positive(s.radius)) {
                    throw DomainError("ball radius must be positive");
                }
            } else if constexpr (std::is_same_v<T, Rectangle>) {
                if (!std::isfinite(s.xmin) || !std::isfinite(s.xmax) ||
                    !std::isfinite(s.ymin) || !std::isfinite(s.ymax) ||
                    !(s.xmin < s.xmax) || !(s.ymin < s.ymax)) {
                    throw DomainError("rectangle requires xmin < xmax and ymin < ymax");
                }
            } else if constexpr (std::is_same_v<T, ConvexPolygon>) {
                validate_polygon(s);
            } else if constexpr (std::is_same_v<T, Slab>) {
                if (s.dim < 1 || s.dim > 3) {
                    throw DomainError("slab dimension must be 1, 2, or 3");
                }
                if (!finite_positive(s.half_width)) {
                    throw DomainError("slab half-width must be positive");
                }
            } else {
                if (!finite_positive(s.half_width) || !finite_positive(s.radius)) {
                    throw DomainError("lens requires positive half-width and radius");
                }
            }
        },
        d);
}

int dimension(const Domain& d) {
    return std::visit(
        [](const auto& s) -> int {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Interval>) {
                return 1;
            } else if constexpr (std::is_same_v<T, Ball>) {
                return static_cast<int>(s.center.size());
            } else if constexpr (std::is_same_v<T, Slab>) {
                return s.dim;
            } else if constexpr (std::is_same_v<T, Rectangle> ||
                                 std::is_same_v<T, ConvexPolygon> ||
                                 std::is_same_v<T, Lens>) {
                return 2;
            }
        },
        d);
}

std::string shape_name(const Domain& d) {
    return std::visit(
        [](const auto& s) -> std::string {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Interval>) return "interval";
            else if constexpr (std::is_same_v<T, Ball>) return "ball";
            else if constexpr (std::is_same_v<T, Rectangle>) return "rectangle";
            else if constexpr (std::is_same_v<T, ConvexPolygon>) return "convex_polygon";
            else if constexpr (std::is_same_v<T, Slab>) return "slab";
            else return "lens";
        },
        d);
}

std::string describe(const Domain& d) {
    std::ostringstream os;
    std::visit(
        [&os](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Interval>) {
                os << "interval(" << s.a << "," << s.b << ")";
            } else if constexpr (std::is_same_v<T, Ball>) {
                os << "ball(c=(";
                for (std::size_t i = 0; i < s.center.size(); ++i) {
                    if (i) os << ",";
                    os << s.center[i];
                }
                os << "),r=" << s.radius << ")";
            } else if constexpr (std::is_same_v<T, Rectangle>) {
                os << "rectangle(" << s.xmin << "," << s.xmax << ")x(" << s.ymin
                   << "," << s.ymax << ")";
            } else if constexpr (std::is_same_v<T, ConvexPolygon>) {
                os << "polygon[" << s.vertices.size() << "]";
            } else if constexpr (std::is_same_v<T, Slab>) {
                os << "slab(dim=" << s.dim << ",h=" << s.half_width << ")";
            } else {
                os << "lens(h=" << s.half_width << ",rho=" << s.radius << ")";
            }
        },
        d);
    return os.str();
}

Geometry geometry(const Domain& d) {
    validate(d);
    return std::visit(
        [](const auto& s) -> Geometry {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Interval>) {
                const double len = s.b - s.a;
                return {len, len / 2.0, len};
            } else if constexpr (std::is_same_v<T, Ball>) {
                const int n = static_cast<int>(s.center.size());
                return {ball_volume(n, s.radius), s.radius, 2.0 * s.radius};
            } else if constexpr (std::is_same_v<T, Rectangle>) {
                const double w = s.xmax - s.xmin;
                const double h = s.ymax - s.ymin;
                return {w * h, 0.5 * std::min(w, h), std::hypot(w, h)};
            } else if constexpr (std::is_same_v<T, ConvexPolygon>) {
                double area2 = 0.0;
                double diam = 0.0;
                const auto& vs = s.vertices;
                for (std::size_t i = 0; i < vs.size(); ++i) {
                    const auto& p = vs[i];
                    const auto& q = vs[(i + 1) % vs.size()];
                    area2 += p[0] * q[1] - q[0] * p[1];
                    for (std::size_t j = i + 1; j < vs.size(); ++j) {
                        diam = std::max(diam, std::hypot(vs[j][0] - p[0], vs[j][1] - p[1]));
                    }
                }
                return {0.5 * area2, polygon_inradius(s), diam};
            } else if constexpr (std::is_same_v<T, Slab>) {
                if (s.dim == 1) {
                    return {2.0 * s.half_width, s.half_width, 2.0 * s.half_width};
                }
                return {inf, s.half_width, inf};
            } else {
                return {lens_area(s), std::min(s.half_width, s.radius), 2.0 * s.radius};
            }
        },
        d);
}

Domain symmetrize(const Domain& d, Symmetrization kind) {
    const Geometry g = geometry(d);
    const int n = dimension(d);
    switch (kind) {
        case Symmetrization::equal_volume_ball: {
            if (!std::isfinite(g.volume)) {
                throw CapabilityError("equal-volume ball needs a finite volume");
            }
            return Ball{std::vector<double>(static_cast<std::size_t>(n), 0.0),
                        ball_radius_for_volume(n, g.volume)};
        }
        case Symmetrization::inradius_interval: {
            if (!std::isfinite(g.inradius)) {
                throw CapabilityError("inradius interval needs a finite inradius");
            }
            return Interval{-g.inradius, g.inradius};
        }
        case Symmetrization::inradius_slab: {
            if (!std::isfinite(g.inradius)) {
                throw CapabilityError("inradius slab needs a finite inradius");
            }
            return Slab{n, g.inradius};
        }
        case Symmetrization::diameter_lens: {
            if (n != 2) throw CapabilityError("lens comparison is planar only");
            if (!std::isfinite(g.diameter)) {
                throw CapabilityError("lens comparison needs a finite diameter");
            }
            if (std::holds_alternative<Slab>(d)) {
                throw CapabilityError("lens comparison needs a bounded shape");
            }
            return Lens{g.inradius, g.diameter - g.inradius};
        }
    }
    throw DomainError("unknown symmetrization kind");
}

bool contains(const Domain& d, const std::vector<double>& x) {
    check_dim(d, x);
    return std::visit(
        [&x](const auto& s) -> bool {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Interval>) {
                return x[0] > s.a && x[0] < s.b;
            } else if constexpr (std::is_same_v<T, Ball>) {
                double d2 = 0.0;
                for (std::size_t i = 0; i < x.size(); ++i) {
                    const double dx = x[i] - s.center[i];
                    d2 += dx * dx;
                }
                return d2 < s.radius * s.radius;
            } else if constexpr (std::is_same_v<T, Rectangle>) {
                return x[0] > s.xmin && x[0] < s.xmax && x[1] > s.ymin && x[1] < s.ymax;
            } else if constexpr (std::is_same_v<T, ConvexPolygon>) {
                for (const Edge& e : polygon_edges(s)) {
                    if (!(e.nx * x[0] + e.ny * x[1] - e.offset > 0.0)) return false;
                }
                return true;
            } else if constexpr (std::is_same_v<T, Slab>) {
                return std::abs(x.back()) < s.half_width;
            } else {
                return std::abs(x[1]) < s.half_width &&
                       x[0] * x[0] + x[1] * x[1] < s.radius * s.radius;
            }
        },
        d);
}

double distance_to_boundary(const Domain& d, const std::vector<double>& x) {
    check_dim(d, x);
    if (!contains(d, x)) return 0.0;
    return std::visit(
        [&x](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Interval>) {
                return std::min(x[0] - s.a, s.b - x[0]);
            } else if constexpr (std::is_same_v<T, Ball>) {
                double d2 = 0.0;
                for (std::size_t i = 0; i < x.size(); ++i) {
                    const double dx = x[i] - s.center[i];
                    d2 += dx * dx;
                }
                return s.radius - std::sqrt(d2);
            } else if constexpr (std::is_same_v<T, Rectangle>) {
                return std::min(std::min(x[0] - s.xmin, s.xmax - x[0]),
                                std::min(x[1] - s.ymin, s.ymax - x[1]));
            } else if constexpr (std::is_same_v<T, ConvexPolygon>) {
                double best = inf;
                for (const Edge& e : polygon_edges(s)) {
                    best = std::min(best, e.nx * x[0] + e.ny * x[1] - e.offset);
                }
                return best;
            } else if constexpr (std::is_same_v<T, Slab>) {
                return s.half_width - std::abs(x.back());
            } else {
                const double strip = s.half_width - std::abs(x[1]);
                const double circ = s.radius - std::hypot(x[0], x[1]);
                return std::min(strip, circ);
            }
        },
        d);
}

void require_interior(const Domain& d, const std::vector<double>& x) {
    if (!contains(d, x)) {
        throw DomainError("start point must lie strictly inside the domain");
    }
}

}  // namespace ibex
