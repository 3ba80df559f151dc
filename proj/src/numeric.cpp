#include "nmqkd/numeric.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>

#include "nmqkd/errors.hpp"

namespace nmqkd::numeric {

namespace {

// Kronrod 15-point nodes (non-negative half) and weights, with the embedded
// Gauss 7-point weights on the odd-indexed nodes.
constexpr std::array<double, 8> kNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kKronrod = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kGauss = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a, b, value, error;
    bool operator<(const Segment& other) const { return error < other.error; }
};

Segment gauss_kronrod(const ScalarFn& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double kronrod = fc * kKronrod[7];
    double gauss = fc * kGauss[3];
    for (std::size_t j = 0; j < 7; ++j) {
        const double dx = half * kNodes[j];
        const double pair = f(center - dx) + f(center + dx);
        kronrod += kKronrod[j] * pair;
        if (j % 2 == 1) gauss += kGauss[j / 2] * pair;
    }
    return {a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace

QuadratureResult integrate(const ScalarFn& f, double a, double b, double abs_tol, double rel_tol,
                           std::size_t max_intervals) {
    if (a == b) return {};
    if (a > b) {
        auto r = integrate(f, b, a, abs_tol, rel_tol, max_intervals);
        r.value = -r.value;
        return r;
    }
    std::priority_queue<Segment> queue;
    Segment first = gauss_kronrod(f, a, b);
    double total = first.value;
    double error = first.error;
    queue.push(first);
    std::size_t count = 1;
    while (error > std::max(abs_tol, rel_tol * std::abs(total)) && count < max_intervals) {
        const Segment worst = queue.top();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) break;  // interval at machine resolution
        queue.pop();
        const Segment left = gauss_kronrod(f, worst.a, mid);
        const Segment right = gauss_kronrod(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        queue.push(left);
        queue.push(right);
        ++count;
    }
    // Re-sum to shed the drift accumulated by the incremental updates.
    total = 0.0;
    error = 0.0;
    while (!queue.empty()) {
        total += queue.top().value;
        error += queue.top().error;
        queue.pop();
    }
    return {total, error, count};
}

double bisect(const ScalarFn& f, double lo, double hi, double abs_tol) {
    double flo = f(lo);
    if (flo == 0.0) return lo;
    const double fhi = f(hi);
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0)) throw DomainError("bisect: root not bracketed");
    while (hi - lo > abs_tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

std::vector<double> linspace(double lo, double hi, std::size_t points) {
    if (points < 2) throw DomainError("linspace: need at least two points");
    std::vector<double> grid(points);
    const double step = (hi - lo) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) grid[i] = lo + step * static_cast<double>(i);
    grid.back() = hi;
    return grid;
}

GridRoots grid_roots(const ScalarFn& f, double lo, double hi, std::size_t points) {
    if (!(hi > lo)) throw DomainError("grid_roots: empty window");
    const auto grid = linspace(lo, hi, points);
    std::vector<double> values(points);
    for (std::size_t i = 0; i < points; ++i) values[i] = f(grid[i]);

    GridRoots out;
    out.min_value = *std::min_element(values.begin(), values.end());
    out.max_value = *std::max_element(values.begin(), values.end());
    out.all_zero = out.min_value == 0.0 && out.max_value == 0.0;
    if (out.all_zero) return out;

    const double tol = 1e-12 * (hi - lo);
    for (std::size_t i = 0; i < points; ++i) {
        if (values[i] == 0.0) {
            out.roots.push_back(grid[i]);
            continue;
        }
        if (i + 1 < points && values[i + 1] != 0.0 && (values[i] > 0.0) != (values[i + 1] > 0.0))
            out.roots.push_back(bisect(f, grid[i], grid[i + 1], tol));
    }
    return out;
}

}  // namespace nmqkd::numeric
