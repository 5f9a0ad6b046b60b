#include "ibex/quadrature.hpp"

#include <cmath>

#include "ibex/errors.hpp"

namespace ibex {

GaussLegendre::GaussLegendre(int order) {
    if (order < 1) throw DomainError("quadrature order must be >= 1");
    const int n = order;
    nodes_.resize(n);
    weights_.resize(n);
    constexpr double pi = 3.14159265358979323846;
    // Roots of P_n by Newton from the Chebyshev-like initial guess; the
    // recurrence also yields P_n' for the weight formula.
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes_[i] = -x;
        weights_[i] = w;
        nodes_[n - 1 - i] = x;
        weights_[n - 1 - i] = w;
    }
}

std::vector<double> GaussLegendre::mapped_nodes(double a, double b) const {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    std::vector<double> out(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) out[i] = mid + half * nodes_[i];
    return out;
}

std::vector<double> GaussLegendre::mapped_weights(double a, double b) const {
    const double half = 0.5 * (b - a);
    std::vector<double> out(weights_.size());
    for (std::size_t i = 0; i < weights_.size(); ++i) out[i] = half * weights_[i];
    return out;
}

double GaussLegendre::integrate(const std::function<double(double)>& f,
                                double a, double b) const {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        sum += weights_[i] * f(mid + half * nodes_[i]);
    }
    return half * sum;
}

double integrate_panels(const std::function<double(double)>& f,
                        const std::vector<double>& edges, int order) {
    if (edges.size() < 2) throw DomainError("need at least one panel");
    const GaussLegendre rule(order);
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        sum += rule.integrate(f, edges[i], edges[i + 1]);
    }
    return sum;
}

}  // namespace ibex
