#pragma once

#include <functional>
#include <vector>

namespace ibex {

// Gauss-Legendre rule on [-1, 1]; nodes/weights computed once per order.
class GaussLegendre {
public:
    explicit GaussLegendre(int order);

    int order() const { return static_cast<int>(nodes_.size()); }

    // Nodes and weights mapped to [a, b].
    std::vector<double> mapped_nodes(double a, double b) const;
    std::vector<double> mapped_weights(double a, double b) const;

    double integrate(const std::function<double(double)>& f, double a,
                     double b) const;

private:
    std::vector<double> nodes_;    // ascending in (-1, 1)
    std::vector<double> weights_;
};

// Integral of f over consecutive panels [edges[0], edges[1]], ... with a
// fixed-order rule per panel.
double integrate_panels(const std::function<double(double)>& f,
                        const std::vector<double>& edges, int order);

}  // namespace ibex
