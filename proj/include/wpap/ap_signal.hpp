#pragma once

#include <algorithm>
#include <complex>
#include <functional>
#include <limits>
#include <vector>

#include "wpap/common.hpp"
#include "wpap/linalg.hpp"
#include "wpap/quadrature.hpp"

namespace wpap {

/// A function tabulated on a uniform grid and treated as zero outside it.
/// Used for integrable convolution kernels.
struct TabulatedKernel {
    double t0 = 0.0;
    double step = 0.0;
    std::vector<double> values;

    static TabulatedKernel sample(const std::function<double(double)>& f, double lo, double hi,
                                  double step) {
        if (!(step > 0) || !(hi > lo))
            throw PreconditionError("TabulatedKernel: need hi > lo and step > 0");
        TabulatedKernel k;
        k.t0 = lo;
        k.step = step;
        const int n = static_cast<int>(std::round((hi - lo) / step)) + 1;
        k.values.reserve(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) k.values.push_back(f(lo + i * step));
        return k;
    }

    double t_end() const { return t0 + step * (values.empty() ? 0 : values.size() - 1); }

    double l1_mass() const {
        double acc = 0.0;
        for (double v : values) acc += std::abs(v);
        return acc * step;
    }

    /// Piecewise-linear value, zero outside the sampled range.
    double operator()(double t) const {
        if (values.empty() || t < t0 || t > t_end()) return 0.0;
        const double u = (t - t0) / step;
        const size_t i = std::min(values.size() - 2, static_cast<size_t>(u));
        const double frac = u - static_cast<double>(i);
        return (1.0 - frac) * values[i] + frac * values[i + 1];
    }

    /// integral of kernel(s) * exp(-i lambda s) ds over the support.
    std::complex<double> fourier(double lambda) const {
        const auto re = [&](double s) { return (*this)(s)*std::cos(lambda * s); };
        const auto im = [&](double s) { return -(*this)(s)*std::sin(lambda * s); };
        const double panel = std::min(0.5, 4.0 * step);
        return {composite_gauss(re, t0, t_end(), panel, 8),
                composite_gauss(im, t0, t_end(), panel, 8)};
    }
};

/// Finite trigonometric polynomial sum c_k exp(i lambda_k t), the computable
/// representative of an almost periodic function. Coefficients are stored as
/// complex vectors (one entry per output component); real-valued signals carry
/// conjugate-symmetric term pairs and are evaluated through the real part.
class APSignal {
public:
    explicit APSignal(int dimension = 1) : dim_(dimension) {
        if (dimension < 1) throw PreconditionError("APSignal: dimension must be >= 1");
    }

    static APSignal constant(double c) {
        APSignal s(1);
        s.add_term(0.0, std::complex<double>(c, 0.0));
        return s;
    }

    static APSignal sine(double freq, double amplitude = 1.0) {
        APSignal s(1);
        s.add_term(freq, std::complex<double>(0.0, -0.5 * amplitude));
        s.add_term(-freq, std::complex<double>(0.0, 0.5 * amplitude));
        return s;
    }

    static APSignal cosine(double freq, double amplitude = 1.0) {
        APSignal s(1);
        s.add_term(freq, std::complex<double>(0.5 * amplitude, 0.0));
        s.add_term(-freq, std::complex<double>(0.5 * amplitude, 0.0));
        return s;
    }

    APSignal& add_term(double freq, std::complex<double> coeff) {
        CVec c(1);
        c(0) = coeff;
        return add_term(freq, c);
    }

    APSignal& add_term(double freq, const CVec& coeff) {
        if (coeff.size() != dim_)
            throw PreconditionError("APSignal.add_term: coefficient dimension mismatch");
        for (auto& [f, c] : terms_)
            if (f == freq) {  // merge keeps frequencies distinct
                c += coeff;
                return *this;
            }
        terms_.emplace_back(freq, coeff);
        std::sort(terms_.begin(), terms_.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        return *this;
    }

    int dimension() const { return dim_; }
    size_t term_count() const { return terms_.size(); }
    const std::vector<std::pair<double, CVec>>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }

    CVec eval_complex(double t) const {
        CVec acc = CVec::Zero(dim_);
        for (const auto& [freq, coeff] : terms_)
            acc += coeff * std::exp(std::complex<double>(0.0, freq * t));
        return acc;
    }

    Vec eval(double t) const { return eval_complex(t).real(); }

    double eval_scalar(double t) const { return eval_complex(t)(0).real(); }

    /// sup over R of the (real-part) value norm is bounded by this sum.
    double sup_norm_bound() const {
        double acc = 0.0;
        for (const auto& [freq, coeff] : terms_) acc += coeff.norm();
        return acc;
    }

    double lipschitz_bound() const {
        double acc = 0.0;
        for (const auto& [freq, coeff] : terms_) acc += std::abs(freq) * coeff.norm();
        return acc;
    }

    bool conjugate_symmetric(double tol = 1e-12) const {
        for (const auto& [freq, coeff] : terms_) {
            bool found = false;
            for (const auto& [f2, c2] : terms_)
                if (f2 == -freq && (c2.conjugate() - coeff).norm() <= tol) found = true;
            if (!found) return false;
        }
        return true;
    }

    APSignal operator+(const APSignal& other) const {
        if (other.dim_ != dim_) throw PreconditionError("APSignal: dimension mismatch in sum");
        APSignal out = *this;
        for (const auto& [f, c] : other.terms_) out.add_term(f, c);
        return out;
    }

    APSignal scaled(std::complex<double> z) const {
        APSignal out(dim_);
        for (const auto& [f, c] : terms_) out.add_term(f, CVec(c * z));
        return out;
    }

    /// Convolution with an integrable kernel stays almost periodic; each
    /// coefficient picks up the kernel's Fourier transform at its frequency.
    APSignal convolved(const TabulatedKernel& k) const {
        APSignal out(dim_);
        for (const auto& [f, c] : terms_) out.add_term(f, CVec(c * k.fourier(f)));
        return out;
    }

    /// Exact Bohr coefficient at lambda: the stored coefficient, or 0.
    CVec exact_coefficient(double lambda) const {
        for (const auto& [f, c] : terms_)
            if (f == lambda) return c;
        return CVec::Zero(dim_);
    }

private:
    int dim_;
    std::vector<std::pair<double, CVec>> terms_;
};

// ---------------------------------------------------------------------------
// epsilon-translation-number certificates

struct CertificateConfig {
    double t_lo = -25.0;  // range over which the sup defect is sampled
    double t_hi = 25.0;
    double tau_step = 0.0;  // 0 = auto eps/(4 L)
    double t_step = 0.0;    // 0 = auto eps/(4 L)
};

struct TranslationCertificate {
    double epsilon = 0.0;
    double window_length = 0.0;
    std::vector<double> found_taus;      // best tau per window (NaN when none passed)
    std::vector<double> window_defects;  // smallest measured defect per window
    bool passed = false;
};

namespace detail {

inline TranslationCertificate scan_translations(
    const std::function<Vec(double)>& f, double lipschitz, double eps, double window,
    double scan_lo, double scan_hi, const CertificateConfig& cfg,
    const std::function<double(double)>* defect_upper_bound) {
    if (!(eps > 0) || !(window > 0))
        throw PreconditionError("ap_core.translation_certificate: eps and window length must be positive");
    const int n_windows = static_cast<int>(std::floor((scan_hi - scan_lo) / window));
    if (n_windows < 5)
        throw PreconditionError("ap_core.translation_certificate: scan range must cover >= 5 windows");

    const double safe_l = std::max(lipschitz, 1e-12);
    double tau_step = cfg.tau_step > 0 ? cfg.tau_step : std::min(eps / (4.0 * safe_l), window / 64.0);
    if (tau_step > eps / safe_l)
        throw PreconditionError(
            "ap_core.translation_certificate: tau grid coarser than eps/Lipschitz, scan could miss "
            "translation numbers");
    double t_step = cfg.t_step > 0 ? cfg.t_step : std::min(eps / (4.0 * safe_l), 0.25);

    std::vector<double> t_grid;
    for (double t = cfg.t_lo; t <= cfg.t_hi + 1e-12; t += t_step) t_grid.push_back(t);

    const auto measured_defect = [&](double tau, double cutoff) {
        double d = 0.0;
        for (double t : t_grid) {
            d = std::max(d, (f(t + tau) - f(t)).norm());
            if (d >= cutoff) break;
        }
        return d;
    };

    TranslationCertificate cert;
    cert.epsilon = eps;
    cert.window_length = window;
    cert.passed = true;
    for (int wdx = 0; wdx < n_windows; ++wdx) {
        const double lo = scan_lo + wdx * window;
        const double hi = lo + window;
        double best_defect = std::numeric_limits<double>::infinity();
        double best_tau = std::numeric_limits<double>::quiet_NaN();
        for (double tau = lo; tau < hi; tau += tau_step) {
            double d;
            if (defect_upper_bound) {
                const double ub = (*defect_upper_bound)(tau);
                if (ub < eps) {
                    d = ub;  // sound acceptance: true defect <= ub
                } else if (ub > 4.0 * eps && best_defect < std::numeric_limits<double>::infinity()) {
                    continue;  // bound alone cannot pass and we already have a sample
                } else {
                    d = measured_defect(tau, 4.0 * eps);
                }
            } else {
                d = measured_defect(tau, 4.0 * eps);
            }
            if (d < best_defect) {
                best_defect = d;
                best_tau = tau;
                if (d < 0.25 * eps) break;  // comfortably inside, stop scanning this window
            }
        }
        cert.window_defects.push_back(best_defect);
        cert.found_taus.push_back(best_tau);
        if (!(best_defect < eps)) {
            cert.passed = false;
            cert.found_taus.back() = std::numeric_limits<double>::quiet_NaN();
        }
    }
    return cert;
}

}  // namespace detail

/// Certificate for a sampled/closed-form function; the caller supplies a
/// Lipschitz bound so grid steps can be sized (coarse grids are rejected).
inline TranslationCertificate translation_certificate(const std::function<Vec(double)>& f,
                                                      double lipschitz, double eps, double window,
                                                      double scan_lo, double scan_hi,
                                                      CertificateConfig cfg = {}) {
    if (!(lipschitz >= 0) || !std::isfinite(lipschitz))
        throw PreconditionError("ap_core.translation_certificate: Lipschitz bound required");
    return detail::scan_translations(f, lipschitz, eps, window, scan_lo, scan_hi, cfg, nullptr);
}

inline TranslationCertificate translation_certificate(const APSignal& s, double eps, double window,
                                                      double scan_lo, double scan_hi,
                                                      CertificateConfig cfg = {}) {
    const auto f = [&s](double t) { return s.eval(t); };
    // sum_k |c_k| |e^{i lambda_k tau} - 1| dominates the true sup defect.
    const auto ub = std::function<double(double)>([&s](double tau) {
        double acc = 0.0;
        for (const auto& [freq, coeff] : s.terms())
            acc += coeff.norm() * std::abs(std::exp(std::complex<double>(0, freq * tau)) - 1.0);
        return acc;
    });
    return detail::scan_translations(f, s.lipschitz_bound(), eps, window, scan_lo, scan_hi, cfg, &ub);
}

/// Doubling search for a window length at which the certificate passes.
/// Throws NumericError when l_max is exhausted.
inline double find_window_length(const APSignal& s, double eps, double l0 = 4.0,
                                 double l_max = 4096.0, CertificateConfig cfg = {}) {
    for (double l = l0; l <= l_max; l *= 2.0) {
        const auto cert = translation_certificate(s, eps, l, l, 6.0 * l, cfg);
        if (cert.passed) return l;
    }
    throw NumericError("ap_core.find_window_length: no admissible window length below l_max");
}

// ---------------------------------------------------------------------------
// Bohr means

/// (1/2T) integral_{-T}^{T} f(t) e^{-i lambda t} dt by composite quadrature.
inline CVec bohr_coefficient(const std::function<Vec(double)>& f, int dimension, double lambda,
                             double T, QuadConfig quad = {}) {
    if (!(T > 0)) throw PreconditionError("ap_core.bohr_coefficient: horizon T must be positive");
    CVec acc(dimension);
    for (int k = 0; k < dimension; ++k) {
        const auto re = [&](double t) {
            return f(t)(k) * std::cos(lambda * t);
        };
        const auto im = [&](double t) {
            return -f(t)(k) * std::sin(lambda * t);
        };
        acc(k) = std::complex<double>(composite_gauss(re, -T, T, quad.max_panel, quad.order),
                                      composite_gauss(im, -T, T, quad.max_panel, quad.order)) /
                 (2.0 * T);
    }
    return acc;
}

inline CVec bohr_coefficient(const APSignal& s, double lambda, double T, QuadConfig quad = {}) {
    return bohr_coefficient([&s](double t) { return s.eval(t); }, s.dimension(), lambda, T, quad);
}

}  // namespace wpap
