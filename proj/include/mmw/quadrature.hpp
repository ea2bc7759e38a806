#pragma once

// Thin wrappers over Boost.Math quadrature: adaptive Gauss-Kronrod for the
// analytic formulas, fixed Gauss-Legendre panels for tabulated integrands.

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "error.hpp"

namespace mmw::quad {

inline constexpr double kDefaultTol = 1e-10;

/// Adaptive 21-point Gauss-Kronrod on [a, b]; zero for an empty interval.
template <class F>
double integrate(F&& f, double a, double b, double tol = kDefaultTol) {
    if (!(b > a)) return 0.0;
    double err = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 21>::integrate(f, a, b, 15, tol, &err);
    if (!std::isfinite(v)) throw NumericalError("quadrature produced a non-finite value on [" +
                                                std::to_string(a) + ", " + std::to_string(b) + "]");
    return v;
}

/// Same, split at interior breakpoints where the integrand has kinks.
template <class F>
double integrate_pieces(F&& f, double a, double b, std::initializer_list<double> breaks,
                        double tol = kDefaultTol) {
    if (!(b > a)) return 0.0;
    std::vector<double> pts{a};
    for (double x : breaks)
        if (x > a && x < b) pts.push_back(x);
    pts.push_back(b);
    std::sort(pts.begin(), pts.end());
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) sum += integrate(f, pts[i], pts[i + 1], tol);
    return sum;
}

/// Like integrate_pieces, but the integrand may have square-root type
/// behaviour at the listed singular points; pieces ending there are mapped
/// through v = end -+ t^2 so the transformed integrand is smooth.
template <class F>
double integrate_pieces_sqrt(F&& f, double a, double b, std::initializer_list<double> breaks,
                             std::initializer_list<double> singular, double tol = kDefaultTol) {
    if (!(b > a)) return 0.0;
    std::vector<double> pts{a, b};
    for (double x : breaks)
        if (x > a && x < b) pts.push_back(x);
    for (double x : singular)
        if (x > a && x < b) pts.push_back(x);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    const double eps = 1e-12 * std::max(1.0, std::abs(b) + std::abs(a));
    auto is_singular = [&](double x) {
        for (double sx : singular)
            if (std::abs(sx - x) <= eps) return true;
        return false;
    };
    auto left = [&](double p, double q) {
        auto g = [&](double t) { return 2.0 * t * f(p + t * t); };
        return integrate(g, 0.0, std::sqrt(q - p), tol);
    };
    auto right = [&](double p, double q) {
        auto g = [&](double t) { return 2.0 * t * f(q - t * t); };
        return integrate(g, 0.0, std::sqrt(q - p), tol);
    };
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double p = pts[i], q = pts[i + 1];
        const bool sl = is_singular(p), sr = is_singular(q);
        if (sl && sr) {
            const double m = 0.5 * (p + q);
            sum += left(p, m) + right(m, q);
        } else if (sl) {
            sum += left(p, q);
        } else if (sr) {
            sum += right(p, q);
        } else {
            sum += integrate(f, p, q, tol);
        }
    }
    return sum;
}

struct Node {
    double x;
    double w;
};

/// n-point Gauss-Legendre rule mapped to [a, b] (Golub-Welsch free: Newton on P_n).
inline std::vector<Node> gauss_legendre(int n, double a, double b) {
    std::vector<Node> out;
    out.reserve(static_cast<std::size_t>(n));
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (b + a);
    for (int i = 1; i <= n; ++i) {
        double x = std::cos(M_PI * (i - 0.25) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
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
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push_back({mid - half * x, half * w});
    }
    std::sort(out.begin(), out.end(), [](const Node& l, const Node& r) { return l.x < r.x; });
    return out;
}

/// Composite rule: n nodes on each panel delimited by the sorted breakpoints.
inline std::vector<Node> composite_gauss_legendre(int n, std::vector<double> breaks) {
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    std::vector<Node> out;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        if (!(breaks[i + 1] > breaks[i])) continue;
        auto panel = gauss_legendre(n, breaks[i], breaks[i + 1]);
        out.insert(out.end(), panel.begin(), panel.end());
    }
    return out;
}

}  // namespace mmw::quad
