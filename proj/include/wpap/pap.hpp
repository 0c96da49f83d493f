#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "wpap/ap_signal.hpp"
#include "wpap/common.hpp"
#include "wpap/linalg.hpp"
#include "wpap/weights.hpp"

namespace wpap {

enum class NormKind { Ambient, Alpha };

/// Vector-valued samples on a uniform grid, the substrate for all ergodic
/// integrals. Values outside the grid read as zero; interior points off the
/// grid are filled by 4-point (cubic) Lagrange interpolation.
struct SampledPath {
    double t_lo = 0.0;
    double step = 0.0;
    int dim = 1;
    std::vector<double> data;  // sample i occupies [i*dim, (i+1)*dim)
    NormKind norm_kind = NormKind::Ambient;

    int size() const { return dim > 0 ? static_cast<int>(data.size()) / dim : 0; }
    double t_hi() const { return t_lo + step * (size() - 1); }
    double time_at(int i) const { return t_lo + step * i; }

    Eigen::Map<const Vec> at(int i) const {
        return Eigen::Map<const Vec>(data.data() + static_cast<size_t>(i) * dim, dim);
    }
    Eigen::Map<Vec> at(int i) {
        return Eigen::Map<Vec>(data.data() + static_cast<size_t>(i) * dim, dim);
    }

    static SampledPath zeros(double t_lo, double t_hi, double step, int dim) {
        if (!(step > 0) || !(t_hi > t_lo) || dim < 1)
            throw PreconditionError("SampledPath: need t_hi > t_lo, step > 0, dim >= 1");
        SampledPath p;
        p.t_lo = t_lo;
        p.step = step;
        p.dim = dim;
        const int n = static_cast<int>(std::round((t_hi - t_lo) / step)) + 1;
        p.data.assign(static_cast<size_t>(n) * dim, 0.0);
        return p;
    }

    static SampledPath sample(const std::function<Vec(double)>& f, double t_lo, double t_hi,
                              double step, int dim) {
        SampledPath p = zeros(t_lo, t_hi, step, dim);
        for (int i = 0; i < p.size(); ++i) {
            const Vec v = f(p.time_at(i));
            if (v.size() != dim) throw PreconditionError("SampledPath.sample: dimension mismatch");
            if (!v.allFinite()) throw NumericError("SampledPath.sample: non-finite sample");
            p.at(i) = v;
        }
        return p;
    }

    static SampledPath sample_scalar(const std::function<double(double)>& f, double t_lo,
                                     double t_hi, double step) {
        return sample([&f](double t) { return Vec::Constant(1, f(t)); }, t_lo, t_hi, step, 1);
    }

    /// Cubic-interpolated value; zero outside the grid.
    Vec value(double t) const {
        const int n = size();
        if (n == 0 || t < t_lo - 1e-12 || t > t_hi() + 1e-12) return Vec::Zero(dim);
        double u = (t - t_lo) / step;
        int i = static_cast<int>(std::floor(u));
        i = std::clamp(i, 0, n - 2);
        const double x = u - i;  // in [0,1] between i and i+1
        if (i == 0 || i + 2 >= n) {  // linear near the edges
            return (1.0 - x) * at(i) + x * at(i + 1);
        }
        // 4-point Lagrange on {-1, 0, 1, 2}
        const double w0 = -x * (x - 1.0) * (x - 2.0) / 6.0;
        const double w1 = (x + 1.0) * (x - 1.0) * (x - 2.0) / 2.0;
        const double w2 = -(x + 1.0) * x * (x - 2.0) / 2.0;
        const double w3 = (x + 1.0) * x * (x - 1.0) / 6.0;
        return w0 * at(i - 1) + w1 * at(i) + w2 * at(i + 1) + w3 * at(i + 2);
    }

    double sup_norm() const {
        double s = 0.0;
        for (int i = 0; i < size(); ++i) s = std::max(s, at(i).norm());
        return s;
    }
};

// ---------------------------------------------------------------------------
// weighted ergodic means

/// (1/m(T,rho)) * integral_{-T}^{T} ||f|| rho, trapezoid on the path grid.
/// T is snapped to the sample grid; the same snapped horizon feeds m(T,rho).
inline double weighted_ergodic_norm(const SampledPath& path, const Weight& w, double T,
                                    QuadConfig quad = {}) {
    if (!(T > 0)) throw PreconditionError("pap_core.weighted_ergodic_norm: T must be positive");
    if (T > std::min(-path.t_lo, path.t_hi()) + 0.5 * path.step)
        throw PreconditionError("pap_core.weighted_ergodic_norm: horizon exceeds path support");
    std::vector<double> integrand;
    double t_eff = 0.0;
    for (int i = 0; i < path.size(); ++i) {
        const double t = path.time_at(i);
        if (std::abs(t) <= T + 0.5 * path.step) {
            integrand.push_back(path.at(i).norm() * w(t));
            t_eff = std::max(t_eff, std::abs(t));
        }
    }
    const double numerator = trapezoid(integrand, path.step);
    return numerator / ergodic_mass(w, t_eff, quad).value;
}

struct PapOptions {
    double tol = 1e-2;             // final deviation must fall below this
    double decay_threshold = 0.75; // per-doubling shrink factor
    double sample_step = 0.05;     // grid step when sampling closed forms
    QuadConfig quad{};
};

/// Deviation curve T -> weighted ergodic mean of ||f||, plus the finite-horizon
/// decision of the PAP_0 membership limit.
struct ErgodicDeviation {
    std::vector<double> horizons;
    std::vector<double> values;
    bool decays_to_zero = false;
    double fitted_rate = 0.0;  // slope of log value vs log T
};

namespace detail {

inline void require_geometric(const std::vector<double>& horizons, const char* who) {
    if (horizons.size() < 4)
        throw PreconditionError(std::string(who) + ": need >= 4 horizons in geometric progression");
    const double r0 = horizons[1] / horizons[0];
    if (!(r0 >= 1.5)) throw PreconditionError(std::string(who) + ": horizon ratio must be >= 1.5");
    for (size_t i = 1; i + 1 < horizons.size(); ++i) {
        const double r = horizons[i + 1] / horizons[i];
        if (std::abs(r - r0) > 0.02 * r0)
            throw PreconditionError(std::string(who) + ": horizon schedule is not geometric");
    }
}

}  // namespace detail

inline ErgodicDeviation is_pap0(const SampledPath& path, const Weight& w,
                                const std::vector<double>& horizons, PapOptions opt = {}) {
    detail::require_geometric(horizons, "pap_core.is_pap0");
    ErgodicDeviation dev;
    dev.horizons = horizons;
    for (double T : horizons) dev.values.push_back(weighted_ergodic_norm(path, w, T, opt.quad));

    bool shrinking = true;
    const size_t n = dev.values.size();
    for (size_t i = n - 3; i < n; ++i) {
        const double prev = dev.values[i - 1], cur = dev.values[i];
        if (prev < 1e-300) {
            if (cur > 1e-300) shrinking = false;
        } else if (!(cur <= opt.decay_threshold * prev)) {
            shrinking = false;
        }
    }
    dev.decays_to_zero = shrinking && dev.values.back() < opt.tol;

    std::vector<double> lx, ly;
    for (size_t i = 0; i < n; ++i) {
        lx.push_back(std::log(dev.horizons[i]));
        ly.push_back(std::log(std::max(dev.values[i], 1e-300)));
    }
    dev.fitted_rate = fit_line(lx, ly).slope;
    return dev;
}

inline ErgodicDeviation is_pap0(const std::function<Vec(double)>& f, int dim, const Weight& w,
                                const std::vector<double>& horizons, PapOptions opt = {}) {
    detail::require_geometric(horizons, "pap_core.is_pap0");
    const double T_max = horizons.back();
    const auto path = SampledPath::sample(f, -T_max, T_max, opt.sample_step, dim);
    return is_pap0(path, w, horizons, opt);
}

inline ErgodicDeviation is_pap0_scalar(const std::function<double(double)>& f, const Weight& w,
                                       const std::vector<double>& horizons, PapOptions opt = {}) {
    return is_pap0([&f](double t) { return Vec::Constant(1, f(t)); }, 1, w, horizons, opt);
}

// ---------------------------------------------------------------------------
// closure harnesses

struct ConvolveOptions {
    PapOptions pap{};
    double kernel_l1_cap = 100.0;
    double kernel_trim = 1e-12;  // relative mass trimmed from each kernel tail
    // Horizons for the internal translation-invariance classification of rho.
    std::vector<double> class_horizons = {10.0, 20.0, 40.0, 80.0};
    std::vector<double> class_taus = {1.0, 2.5, 7.0};
};

/// Discrete convolution on the path grid (zero padded), then the PAP_0 test.
/// Closure under convolution needs a translation-invariant weight class, so
/// the weight is classified first and rejected if the estimates diverge.
inline ErgodicDeviation convolve_and_test(const SampledPath& f, const TabulatedKernel& kernel_in,
                                          const Weight& w, const std::vector<double>& horizons,
                                          ConvolveOptions opt = {},
                                          const WeightClass* known_class = nullptr) {
    if (kernel_in.l1_mass() > opt.kernel_l1_cap)
        throw PreconditionError("pap_core.convolve_and_test: kernel L1 mass exceeds cap");
    WeightClass cls = known_class ? *known_class
                                  : classify_weight(w, opt.class_horizons, opt.class_taus);
    if (!cls.translation_invariant)
        throw PreconditionError(
            "pap_core.convolve_and_test: weight class is not translation invariant");

    // Resample the kernel onto the path step and trim negligible tails.
    const double h = f.step;
    const int j_lo_full = static_cast<int>(std::floor(kernel_in.t0 / h));
    const int j_hi_full = static_cast<int>(std::ceil(kernel_in.t_end() / h));
    std::vector<double> k;
    for (int j = j_lo_full; j <= j_hi_full; ++j) k.push_back(kernel_in(j * h));
    double total = 0.0;
    for (double v : k) total += std::abs(v);
    int lo = 0, hi = static_cast<int>(k.size()) - 1;
    double acc = 0.0;
    while (lo < hi && (acc + std::abs(k[lo])) * 1.0 <= opt.kernel_trim * total) acc += std::abs(k[lo++]);
    acc = 0.0;
    while (hi > lo && (acc + std::abs(k[hi])) <= opt.kernel_trim * total) acc += std::abs(k[hi--]);

    SampledPath g = SampledPath::zeros(f.t_lo, f.t_hi(), f.step, f.dim);
    for (int i = 0; i < g.size(); ++i) {
        Vec v = Vec::Zero(f.dim);
        for (int j = lo; j <= hi; ++j) {
            const double s = (j_lo_full + j) * h;
            const double end_weight = (j == lo || j == hi) ? 0.5 : 1.0;  // trapezoid ends
            v += end_weight * k[static_cast<size_t>(j)] * f.value(g.time_at(i) - s);
        }
        g.at(i) = v * h;
    }
    return is_pap0(g, w, horizons, opt.pap);
}

/// f = g + phi with g almost periodic and phi weighted-ergodic.
struct WpapDecomposition {
    APSignal ap_part;        // scalar or vector trigonometric polynomial
    SampledPath ergodic_part;
    Weight weight;

    double value(double t) const {
        return ap_part.eval_scalar(t) + ergodic_part.value(t)(0);
    }
};

/// Forcing split into an almost periodic component and an ergodic one,
/// together with the uniform Lipschitz bound the composition test requires.
struct ComposedForcing {
    std::function<double(double, double)> ap_component;       // F1(t, u)
    std::function<double(double, double)> ergodic_component;  // phi(t, u), may be null for 0
    double lipschitz_sup = -1.0;                              // sup_t L_F(t)

    double full(double t, double u) const {
        return ap_component(t, u) + (ergodic_component ? ergodic_component(t, u) : 0.0);
    }
};

/// Builds t -> F(t, h(t)) - F1(t, h1(t)) and tests the remainder for PAP_0
/// membership. The remainder collects the Lipschitz sweep term and the
/// ergodic forcing component, both of which must vanish in weighted mean.
inline ErgodicDeviation compose_and_test(const ComposedForcing& F, const WpapDecomposition& h,
                                         const Weight& w, const std::vector<double>& horizons,
                                         PapOptions opt = {}) {
    if (!(F.lipschitz_sup >= 0) || !std::isfinite(F.lipschitz_sup))
        throw PreconditionError("pap_core.compose_and_test: missing Lipschitz bound sup_t L_F(t)");
    if (!F.ap_component)
        throw PreconditionError("pap_core.compose_and_test: missing AP component of the forcing");
    const auto remainder = [&](double t) {
        const double full = F.full(t, h.value(t));
        const double ap = F.ap_component(t, h.ap_part.eval_scalar(t));
        return full - ap;
    };
    return is_pap0_scalar(remainder, w, horizons, opt);
}

/// One corpus member for decision-agreement sweeps.
struct CorpusFunction {
    std::string name;
    std::function<double(double)> f;
};

struct TransferReport {
    struct Row {
        std::string name;
        bool under_w1 = false;
        bool under_w2 = false;
    };
    std::vector<Row> rows;
    bool all_agree = true;
};

/// Equivalent weights must induce the same PAP_0 decisions; any disagreement
/// on the corpus is reported as a falsification.
inline TransferReport equivalence_transfers_pap0(const Weight& w1, const Weight& w2,
                                                 const std::vector<CorpusFunction>& corpus,
                                                 const std::vector<double>& horizons,
                                                 PapOptions opt = {}) {
    const auto verdict = weights_equivalent(w1, w2, horizons);
    if (!verdict.equivalent)
        throw PreconditionError("pap_core.equivalence_transfers_pap0: weights are not equivalent");
    TransferReport report;
    for (const auto& c : corpus) {
        TransferReport::Row row;
        row.name = c.name;
        row.under_w1 = is_pap0_scalar(c.f, w1, horizons, opt).decays_to_zero;
        row.under_w2 = is_pap0_scalar(c.f, w2, horizons, opt).decays_to_zero;
        report.rows.push_back(row);
        if (row.under_w1 != row.under_w2) report.all_agree = false;
    }
    return report;
}

}  // namespace wpap
