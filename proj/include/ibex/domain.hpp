#pragma once

#include <array>
#include <string>
#include <variant>
#include <vector>

namespace ibex {

// Open interval (a, b) on the line.
struct Interval {
    double a;
    double b;
};

// Open ball in R^n, n = center.size() <= 3.
struct Ball {
    std::vector<double> center;
    double radius;
};

// Axis-aligned open rectangle in the plane.
struct Rectangle {
    double xmin;
    double xmax;
    double ymin;
    double ymax;
};

// Strictly convex polygon, vertices counterclockwise.
struct ConvexPolygon {
    std::vector<std::array<double, 2>> vertices;
};

// R^(dim-1) x (-half_width, half_width); unbounded for dim >= 2.
struct Slab {
    int dim;
    double half_width;
};

// [R x (-half_width, half_width)] intersected with the disk of the given
// radius about the origin; planar.
struct Lens {
    double half_width;
    double radius;
};

using Domain = std::variant<Interval, Ball, Rectangle, ConvexPolygon, Slab, Lens>;

struct Geometry {
    double volume;    // may be infinite (slab)
    double inradius;
    double diameter;  // may be infinite (slab)
};

enum class Symmetrization {
    equal_volume_ball,  // ball about the origin with the same volume
    inradius_interval,  // (-R, R) on the line, R = inradius
    inradius_slab,      // R^(n-1) x (-R, R)
    diameter_lens,      // strip of half-width R cut by the ball of radius
                        // diameter - R
};

// Throws DomainError if the shape parameters are malformed (empty or
// non-convex polygon, nonpositive radius, ...).
void validate(const Domain& d);

int dimension(const Domain& d);

std::string shape_name(const Domain& d);

// Compact one-line description for CSV headers and reports.
std::string describe(const Domain& d);

Geometry geometry(const Domain& d);

// Comparison domain of the requested kind, centered at the origin; its
// canonical start point is the origin.  Throws CapabilityError when the
// kind needs finiteness/convexity the shape lacks.
Domain symmetrize(const Domain& d, Symmetrization kind);

bool contains(const Domain& d, const std::vector<double>& x);

// Distance from an interior point to the boundary; 0 for outside points.
double distance_to_boundary(const Domain& d, const std::vector<double>& x);

// Throws DomainError unless x is strictly inside d.
void require_interior(const Domain& d, const std::vector<double>& x);

}  // namespace ibex
