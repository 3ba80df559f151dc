#pragma once

#include <cstddef>
#include <functional>
#include <vector>

// Small numeric toolkit: adaptive quadrature and bracketed root finding on a
// uniform grid. Used by the decay, detection and adversary modules.
namespace nmqkd::numeric {

using ScalarFn = std::function<double(double)>;

struct QuadratureResult {
    double value{0.0};
    double error_estimate{0.0};
    std::size_t intervals{0};
};

// Globally adaptive 7/15-point Gauss-Kronrod quadrature of f over [a, b].
// Bisects the interval with the largest error estimate until the summed
// estimate drops below max(abs_tol, rel_tol * |result|) or max_intervals
// subintervals have been created.
QuadratureResult integrate(const ScalarFn& f, double a, double b, double abs_tol = 1e-14,
                           double rel_tol = 1e-13, std::size_t max_intervals = 2000);

// Bisection on a sign-changing bracket [lo, hi]; stops when the bracket is
// narrower than abs_tol. f(lo) and f(hi) must have opposite signs or one of
// them must be zero.
double bisect(const ScalarFn& f, double lo, double hi, double abs_tol);

// All roots of f in [lo, hi] located by sign changes on a uniform grid of
// `points` nodes, refined by bisection to 1e-12 * (hi - lo). Exact zeros at
// grid nodes are reported once. Result is sorted ascending.
struct GridRoots {
    std::vector<double> roots;
    bool all_zero{false};  // f vanished at every grid node
    double min_value{0.0};
    double max_value{0.0};
};

GridRoots grid_roots(const ScalarFn& f, double lo, double hi, std::size_t points);

// Uniform grid with `points` nodes, first and last node exactly lo and hi.
std::vector<double> linspace(double lo, double hi, std::size_t points);

}  // namespace nmqkd::numeric
