#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace wpap {

/// A stated precondition of a module operation was violated. Messages are
/// formatted "module.operation: what failed" so callers can surface the
/// offending operation by name.
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numeric procedure could not meet its contract (divergence, singular
/// solve, tail bound exceeded, ...).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Configuration rejected; carries every violation found, not just the first.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> violations)
        : std::runtime_error(join(violations)), violations_(std::move(violations)) {}
    const std::vector<std::string>& violations() const { return violations_; }

private:
    static std::string join(const std::vector<std::string>& v) {
        std::string s = "config rejected:";
        for (const auto& x : v) {
            s += "\n  - ";
            s += x;
        }
        return s;
    }
    std::vector<std::string> violations_;
};

inline std::vector<double> linspace(double a, double b, int n) {
    if (n < 2) return {a};
    std::vector<double> out(static_cast<size_t>(n));
    const double h = (b - a) / (n - 1);
    for (int i = 0; i < n; ++i) out[static_cast<size_t>(i)] = a + h * i;
    out.back() = b;
    return out;
}

/// n log-spaced points on [lo, hi], lo, hi > 0.
inline std::vector<double> logspace(double lo, double hi, int n) {
    if (lo <= 0 || hi <= 0) throw PreconditionError("logspace: bounds must be positive");
    std::vector<double> out;
    out.reserve(static_cast<size_t>(n));
    const double la = std::log10(lo), lb = std::log10(hi);
    for (double e : linspace(la, lb, n)) out.push_back(std::pow(10.0, e));
    return out;
}

/// FNV-1a, used to fingerprint configuration payloads in run manifests.
inline std::uint64_t fnv1a(const std::string& data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

/// Least-squares line fit y = intercept + slope*x.
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double max_residual = 0.0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw PreconditionError("fit_line: need >= 2 matched samples");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    if (std::abs(denom) < 1e-300) throw NumericError("fit_line: degenerate abscissae");
    LineFit f;
    f.slope = (n * sxy - sx * sy) / denom;
    f.intercept = (sy - f.slope * sx) / n;
    for (size_t i = 0; i < x.size(); ++i)
        f.max_residual = std::max(f.max_residual, std::abs(y[i] - (f.intercept + f.slope * x[i])));
    return f;
}

}  // namespace wpap
