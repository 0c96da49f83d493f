#pragma once

#include <algorithm>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "wpap/common.hpp"
#include "wpap/quadrature.hpp"

namespace wpap {

enum class WeightKind { Constant, Polynomial, Expression, Tabulated };

/// An admissible weight: positive, finite, defined for all real t.
/// Tabulated weights interpolate linearly between samples and clamp to the
/// endpoint values outside the sampled range (positivity is preserved).
class Weight {
public:
    static Weight constant(double c, std::string name = "") {
        Weight w;
        w.kind_ = WeightKind::Constant;
        w.const_value_ = c;
        w.name_ = name.empty() ? "const" : std::move(name);
        return w;
    }

    /// rho_m(t) = (1 + t^2)^m, m a non-negative integer.
    static Weight polynomial(int m, std::string name = "") {
        if (m < 0) throw PreconditionError("weights.Weight: polynomial exponent must be >= 0");
        Weight w;
        w.kind_ = WeightKind::Polynomial;
        w.poly_m_ = m;
        w.name_ = name.empty() ? ("rho_" + std::to_string(m)) : std::move(name);
        return w;
    }

    static Weight expression(std::function<double(double)> f, std::string name = "expr") {
        Weight w;
        w.kind_ = WeightKind::Expression;
        w.eval_ = std::move(f);
        w.name_ = std::move(name);
        return w;
    }

    static Weight tabulated(std::vector<double> times, std::vector<double> values,
                            std::string name = "tabulated") {
        if (times.size() != values.size() || times.size() < 2)
            throw PreconditionError("weights.Weight: tabulated weight needs >= 2 matched samples");
        for (size_t i = 1; i < times.size(); ++i)
            if (!(times[i] > times[i - 1]))
                throw PreconditionError("weights.Weight: tabulated sample times must increase");
        Weight w;
        w.kind_ = WeightKind::Tabulated;
        w.tab_t_ = std::move(times);
        w.tab_v_ = std::move(values);
        w.name_ = std::move(name);
        return w;
    }

    double operator()(double t) const {
        double v = 0.0;
        switch (kind_) {
            case WeightKind::Constant: v = const_value_; break;
            case WeightKind::Polynomial: v = std::pow(1.0 + t * t, poly_m_); break;
            case WeightKind::Expression: v = eval_(t); break;
            case WeightKind::Tabulated: v = interp(t); break;
        }
        if (!std::isfinite(v) || v <= 0.0)
            throw NumericError("weights: weight '" + name_ + "' is not finite-positive at t=" +
                               std::to_string(t));
        return v;
    }

    WeightKind kind() const { return kind_; }
    int poly_exponent() const { return poly_m_; }
    double constant_value() const { return const_value_; }
    const std::string& name() const { return name_; }

private:
    double interp(double t) const {
        if (t <= tab_t_.front()) return tab_v_.front();
        if (t >= tab_t_.back()) return tab_v_.back();
        const auto it = std::upper_bound(tab_t_.begin(), tab_t_.end(), t);
        const size_t i = static_cast<size_t>(it - tab_t_.begin());
        const double u = (t - tab_t_[i - 1]) / (tab_t_[i] - tab_t_[i - 1]);
        return (1.0 - u) * tab_v_[i - 1] + u * tab_v_[i];
    }

    WeightKind kind_ = WeightKind::Constant;
    double const_value_ = 1.0;
    int poly_m_ = 0;
    std::function<double(double)> eval_;
    std::vector<double> tab_t_, tab_v_;
    std::string name_;
};

/// m(T, rho) = integral of rho over [-T, T], with an error bound.
struct ErgodicMass {
    double horizon = 0.0;
    double value = 0.0;
    double quadrature_error_bound = 0.0;
};

inline ErgodicMass ergodic_mass(const Weight& w, double T, QuadConfig quad = {}) {
    if (!(T > 0.0)) throw PreconditionError("weights.ergodic_mass: horizon T must be positive");
    ErgodicMass m;
    m.horizon = T;
    switch (w.kind()) {
        case WeightKind::Constant:
            m.value = 2.0 * w.constant_value() * T;
            m.quadrature_error_bound = 4.0 * std::numeric_limits<double>::epsilon() * m.value;
            return m;
        case WeightKind::Polynomial: {
            // Closed-form antiderivative of (1+t^2)^m via binomial expansion.
            const int mm = w.poly_exponent();
            double binom = 1.0, acc = 0.0;
            for (int k = 0; k <= mm; ++k) {
                acc += binom * std::pow(T, 2 * k + 1) / (2 * k + 1);
                binom *= static_cast<double>(mm - k) / (k + 1);
            }
            m.value = 2.0 * acc;
            m.quadrature_error_bound = 8.0 * std::numeric_limits<double>::epsilon() * m.value;
            return m;
        }
        default: {
            const auto f = [&](double t) { return w(t); };
            const double coarse = composite_gauss(f, -T, T, quad.max_panel, quad.order);
            const double fine = composite_gauss(f, -T, T, 0.5 * quad.max_panel, quad.order);
            m.value = fine;
            m.quadrature_error_bound =
                std::abs(fine - coarse) + 8.0 * std::numeric_limits<double>::epsilon() * std::abs(fine);
            return m;
        }
    }
}

struct WeightClassOptions {
    double positivity_floor = 1e-6;   // liminf rho > 0 detection floor
    double finiteness_cap = 1e6;      // a limsup estimate above this is "infinite"
    double mass_growth_floor = 1e-3;  // relative mass increment below this = plateau
    double trend_growth_cap = 1.2;    // estimates growing faster than this across horizons diverge
    int window_samples = 2001;
    QuadConfig quad{};
};

/// Classification evidence + verdicts for one weight.
struct WeightClass {
    bool in_U_infinity = false;
    bool in_U_B = false;
    bool translation_invariant = false;
    // evidence
    std::vector<double> horizons;
    std::vector<double> masses;
    std::vector<double> window_sups;  // sup of rho over [-T_i, T_i]
    double late_inf = 0.0;            // inf of rho over [T_max/2, T_max]
    std::vector<double> taus;
    double max_ratio_translate = 0.0;  // worst limsup estimate of rho(s+tau)/rho(s)
    double max_ratio_mass = 0.0;       // worst limsup estimate of m(T+tau)/m(T)
};

namespace detail {

/// A sequence of per-horizon limsup-style estimates counts as finite when the
/// final value is under the cap and the estimates have stopped growing. A bare
/// cap misreads slowly diverging ratios (e.g. (1+t^2) against 1) at desk-scale
/// horizons; the trend test catches those.
inline bool estimate_trend_finite(const std::vector<double>& by_horizon,
                                  const WeightClassOptions& opt) {
    if (by_horizon.empty()) return false;
    if (!(by_horizon.back() < opt.finiteness_cap)) return false;
    const size_t n = by_horizon.size();
    const size_t checks = std::min<size_t>(2, n - 1);
    for (size_t i = n - checks; i < n; ++i) {
        const double prev = by_horizon[i - 1], cur = by_horizon[i];
        if (cur > prev * opt.trend_growth_cap + 1e-12) return false;
    }
    return true;
}

}  // namespace detail

inline WeightClass classify_weight(const Weight& w, const std::vector<double>& horizons,
                                   const std::vector<double>& tau_probe,
                                   const WeightClassOptions& opt = {}) {
    if (horizons.size() < 3)
        throw PreconditionError("weights.classify_weight: need >= 3 horizons for a trend");
    for (size_t i = 1; i < horizons.size(); ++i)
        if (!(horizons[i] > horizons[i - 1]) || !(horizons[0] > 0))
            throw PreconditionError("weights.classify_weight: horizons must be positive increasing");
    for (double tau : tau_probe)
        if (!std::isfinite(tau))
            throw PreconditionError("weights.classify_weight: tau probes must be finite");

    WeightClass c;
    c.horizons = horizons;
    c.taus = tau_probe;
    const double t_max = horizons.back();

    for (double T : horizons) {
        c.masses.push_back(ergodic_mass(w, T, opt.quad).value);
        double sup = 0.0;
        for (double t : linspace(-T, T, opt.window_samples)) sup = std::max(sup, w(t));
        c.window_sups.push_back(sup);
    }

    // (i) mass growth without plateau, (ii) rho bounded away from 0 late.
    bool mass_grows = true;
    for (size_t i = c.masses.size() - std::min<size_t>(3, c.masses.size() - 1);
         i < c.masses.size(); ++i) {
        const double rel = (c.masses[i] - c.masses[i - 1]) / c.masses[i];
        if (!(rel >= opt.mass_growth_floor)) mass_grows = false;
    }
    c.late_inf = std::numeric_limits<double>::infinity();
    for (double t : linspace(t_max / 2.0, t_max, opt.window_samples))
        c.late_inf = std::min(c.late_inf, w(t));
    c.in_U_infinity = mass_grows && c.late_inf >= opt.positivity_floor;

    c.in_U_B = c.in_U_infinity && detail::estimate_trend_finite(c.window_sups, opt);

    // Translation invariance via Eqs. (A)/(B): both limsup estimates finite
    // for every probed tau.
    bool invariant = true;
    for (double tau : tau_probe) {
        std::vector<double> ratio_a, ratio_b;
        for (double T : horizons) {
            double ra = 0.0;
            for (double s : linspace(T / 2.0, T, opt.window_samples))
                ra = std::max(ra, w(s + tau) / w(s));
            ratio_a.push_back(ra);
            const double mT = ergodic_mass(w, T, opt.quad).value;
            const double mTt = ergodic_mass(w, T + std::abs(tau), opt.quad).value;
            ratio_b.push_back(mTt / mT);
        }
        c.max_ratio_translate = std::max(c.max_ratio_translate, ratio_a.back());
        c.max_ratio_mass = std::max(c.max_ratio_mass, ratio_b.back());
        if (!detail::estimate_trend_finite(ratio_a, opt) ||
            !detail::estimate_trend_finite(ratio_b, opt))
            invariant = false;
    }
    c.translation_invariant = invariant;
    return c;
}

/// Verdict for the weight-equivalence relation: both ratio estimates finite.
struct EquivalenceVerdict {
    double liminf_ratio_12 = 0.0;
    double limsup_ratio_21 = 0.0;
    bool equivalent = false;
    std::vector<double> horizons_used;
    std::vector<double> liminf_by_horizon;
    std::vector<double> limsup_by_horizon;
};

inline EquivalenceVerdict weights_equivalent(const Weight& w1, const Weight& w2,
                                             const std::vector<double>& horizons,
                                             const WeightClassOptions& opt = {}) {
    if (horizons.size() < 2)
        throw PreconditionError("weights.weights_equivalent: need >= 2 horizons");
    EquivalenceVerdict v;
    v.horizons_used = horizons;
    const double floor = 1e-12;
    for (double T : horizons) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = 0.0;
        for (double s : linspace(T / 2.0, T, opt.window_samples)) {
            const double r1 = w1(s), r2 = w2(s);
            if (r2 < floor || r1 < floor)
                throw NumericError("weights.weights_equivalent: weight below positivity floor");
            lo = std::min(lo, r1 / r2);
            hi = std::max(hi, r2 / r1);
        }
        v.liminf_by_horizon.push_back(lo);
        v.limsup_by_horizon.push_back(hi);
    }
    v.liminf_ratio_12 = v.liminf_by_horizon.back();
    v.limsup_ratio_21 = v.limsup_by_horizon.back();
    v.equivalent = detail::estimate_trend_finite(v.liminf_by_horizon, opt) &&
                   detail::estimate_trend_finite(v.limsup_by_horizon, opt);
    return v;
}

}  // namespace wpap
