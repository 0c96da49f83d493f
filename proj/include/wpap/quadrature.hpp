#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <vector>

#include "wpap/common.hpp"

namespace wpap {

/// Gauss-Legendre nodes/weights on [-1, 1], computed once per order by
/// Newton iteration on P_n and cached.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    static const GaussRule& of_order(int n) {
        static std::map<int, GaussRule> cache;
        auto it = cache.find(n);
        if (it == cache.end()) it = cache.emplace(n, make(n)).first;
        return it->second;
    }

private:
    static GaussRule make(int n) {
        if (n < 1) throw PreconditionError("GaussRule: order must be >= 1");
        GaussRule r;
        r.nodes.resize(static_cast<size_t>(n));
        r.weights.resize(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) {
            // Chebyshev initial guess, then Newton on P_n(x) = 0.
            double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int iter = 0; iter < 100; ++iter) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16) break;
            }
            r.nodes[static_cast<size_t>(i)] = x;
            r.weights[static_cast<size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        return r;
    }
};

/// One Gauss-Legendre panel over [a, b].
template <typename F>
double gauss_panel(F&& f, double a, double b, int order) {
    const GaussRule& r = GaussRule::of_order(order);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double acc = 0.0;
    for (size_t i = 0; i < r.nodes.size(); ++i) acc += r.weights[i] * f(mid + half * r.nodes[i]);
    return acc * half;
}

/// Composite Gauss-Legendre with panel width capped at max_panel.
template <typename F>
double composite_gauss(F&& f, double a, double b, double max_panel, int order) {
    if (!(b > a)) return b == a ? 0.0 : -composite_gauss(f, b, a, max_panel, order);
    const int panels = std::max(1, static_cast<int>(std::ceil((b - a) / max_panel)));
    const double w = (b - a) / panels;
    double acc = 0.0;
    for (int k = 0; k < panels; ++k) acc += gauss_panel(f, a + k * w, a + (k + 1) * w, order);
    return acc;
}

struct QuadConfig {
    double max_panel = 0.5;
    int order = 8;
};

/// Trapezoid rule over uniformly spaced samples.
inline double trapezoid(const std::vector<double>& values, double step) {
    if (values.size() < 2) return 0.0;
    double acc = 0.5 * (values.front() + values.back());
    for (size_t i = 1; i + 1 < values.size(); ++i) acc += values[i];
    return acc * step;
}

/// Panel layout for integrals with a boundary layer at one end: widths grow
/// geometrically from w0 at the singular end up to w_max, covering [0, S].
/// Panels are returned as offsets from the singular end, nearest first.
inline std::vector<std::pair<double, double>> graded_panels(double S, double w0, double w_max) {
    if (!(S > 0) || !(w0 > 0) || !(w_max >= w0))
        throw PreconditionError("graded_panels: need 0 < w0 <= w_max and S > 0");
    std::vector<std::pair<double, double>> panels;
    double lo = 0.0, w = w0;
    while (lo < S) {
        const double hi = std::min(S, lo + w);
        panels.emplace_back(lo, hi);
        lo = hi;
        w = std::min(2.0 * w, w_max);
    }
    return panels;
}

}  // namespace wpap
