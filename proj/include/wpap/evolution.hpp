#pragma once

#include <Eigen/Eigenvalues>
#include <functional>
#include <limits>
#include <map>
#include <vector>

#include "wpap/ap_signal.hpp"
#include "wpap/common.hpp"
#include "wpap/linalg.hpp"
#include "wpap/quadrature.hpp"

namespace wpap {

enum class FamilyForm { Constant, ScalarModulated, Tabulated };

/// t -> A(t) as a matrix family. Supported forms: constant A, commuting
/// scalar-modulated d(t)*A with d = offset + trigonometric polynomial, and a
/// tabulated evaluator. omega and the Hoelder metadata ride along for the
/// sectorial checks.
class LinearFamily {
public:
    static LinearFamily constant(Mat A, double omega = 0.0) {
        LinearFamily f;
        f.form_ = FamilyForm::Constant;
        f.A_ = std::move(A);
        f.omega_ = omega;
        f.require_invertible(f.A_, "constant");
        return f;
    }

    /// d(t) = offset + Re sum c_k e^{i lambda_k t}; needs inf d > 0, which is
    /// enforced through the conservative bound offset - sum|c_k| > 0.
    static LinearFamily scalar_modulated(Mat A, APSignal d_signal, double d_offset,
                                         double omega = 0.0) {
        if (d_signal.dimension() != 1)
            throw PreconditionError("evolution.LinearFamily: modulation signal must be scalar");
        if (!(d_offset - d_signal.sup_norm_bound() > 0.0))
            throw PreconditionError(
                "evolution.LinearFamily: scalar modulation must satisfy inf_t d(t) > 0");
        LinearFamily f;
        f.form_ = FamilyForm::ScalarModulated;
        f.A_ = std::move(A);
        f.d_signal_ = std::move(d_signal);
        f.d_offset_ = d_offset;
        f.omega_ = omega;
        f.require_invertible(f.A_, "scalar-modulated");
        return f;
    }

    static LinearFamily tabulated(std::function<Mat(double)> eval, int dim, double omega = 0.0,
                                  const std::vector<double>& probe_times = {-3.1, -1.2, 0.0, 0.9,
                                                                            2.2, 4.8}) {
        LinearFamily f;
        f.form_ = FamilyForm::Tabulated;
        f.eval_ = std::move(eval);
        f.dim_ = dim;
        f.omega_ = omega;
        for (double t : probe_times) {
            const Mat a = f.eval_(t);
            if (a.rows() != dim || a.cols() != dim)
                throw PreconditionError("evolution.LinearFamily: tabulated evaluator dimension mismatch");
            f.require_invertible(a, "tabulated");
        }
        return f;
    }

    FamilyForm form() const { return form_; }
    double omega() const { return omega_; }
    int dim() const { return form_ == FamilyForm::Tabulated ? dim_ : static_cast<int>(A_.rows()); }
    bool commuting() const { return form_ != FamilyForm::Tabulated; }

    /// Base matrix of the commuting forms (A in d(t)*A).
    const Mat& base() const {
        if (form_ == FamilyForm::Tabulated)
            throw PreconditionError("evolution.LinearFamily: tabulated family has no base matrix");
        return A_;
    }

    double d(double t) const {
        switch (form_) {
            case FamilyForm::Constant: return 1.0;
            case FamilyForm::ScalarModulated: return d_offset_ + d_signal_.eval_scalar(t);
            default:
                throw PreconditionError("evolution.LinearFamily: no scalar modulation for tabulated form");
        }
    }

    /// Exact integral of d over [s, t] (closed form for the trig polynomial).
    double d_integral(double s, double t) const {
        switch (form_) {
            case FamilyForm::Constant: return t - s;
            case FamilyForm::ScalarModulated: {
                double acc = d_offset_ * (t - s);
                for (const auto& [freq, coeff] : d_signal_.terms()) {
                    const std::complex<double> c = coeff(0);
                    if (freq == 0.0) {
                        acc += c.real() * (t - s);
                    } else {
                        const std::complex<double> i_freq(0.0, freq);
                        acc += ((std::exp(i_freq * t) - std::exp(i_freq * s)) * c / i_freq).real();
                    }
                }
                return acc;
            }
            default:
                throw PreconditionError("evolution.LinearFamily: no scalar modulation for tabulated form");
        }
    }

    Mat at(double t) const {
        switch (form_) {
            case FamilyForm::Constant: return A_;
            case FamilyForm::ScalarModulated: return d(t) * A_;
            default: return eval_(t);
        }
    }

    const APSignal& modulation() const { return d_signal_; }
    double modulation_offset() const { return d_offset_; }

private:
    void require_invertible(const Mat& a, const char* what) const {
        Eigen::FullPivLU<Mat> lu(a);
        if (!lu.isInvertible())
            throw PreconditionError(std::string("evolution.LinearFamily: every A(t) must be invertible (") + what +
                                    " form has 0 in its spectrum)");
    }

    FamilyForm form_ = FamilyForm::Constant;
    Mat A_;
    double omega_ = 0.0;
    APSignal d_signal_{1};
    double d_offset_ = 1.0;
    std::function<Mat(double)> eval_;
    int dim_ = 0;
};

struct StepperConfig {
    double substep = 0.01;  // Magnus step for tabulated families
    double tol = 1e-10;     // nominal local tolerance the substep is sized for
};

/// Two-parameter propagator U(t, s) of u' = A(t) u. Commuting forms use the
/// exact exponential U(t,s) = exp(int_s^t d * A); tabulated families use
/// fixed-step 4th-order Magnus stepping.
class EvolutionFamily {
public:
    explicit EvolutionFamily(LinearFamily family, StepperConfig stepper = {})
        : family_(std::move(family)), stepper_(stepper) {}

    const LinearFamily& family() const { return family_; }
    const StepperConfig& stepper() const { return stepper_; }
    int dim() const { return family_.dim(); }

    Mat propagator(double t, double s) const {
        if (t == s) return Mat::Identity(dim(), dim());
        const auto key = std::make_pair(t, s);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        Mat u;
        if (family_.commuting()) {
            u = expm(family_.d_integral(s, t) * family_.base());
        } else {
            if (t < s)
                throw PreconditionError(
                    "evolution.propagate: backward propagation of a tabulated family is only "
                    "available on the unstable subspace via the Green kernel");
            const int steps = std::max(1, static_cast<int>(std::ceil((t - s) / stepper_.substep)));
            const double h = (t - s) / steps;
            u = Mat::Identity(dim(), dim());
            for (int k = 0; k < steps; ++k) u = magnus_step(s + k * h, h) * u;
        }
        if (!u.allFinite())
            throw NumericError("evolution.propagate: step rejected, propagator overflowed "
                               "(stiffness beyond the exponential range)");
        if (cache_.size() < kCacheCap) cache_.emplace(key, u);
        return u;
    }

    Vec apply(double t, double s, const Vec& x) const { return propagator(t, s) * x; }

    /// One 4th-order Magnus step over [t0, t0+h].
    Mat magnus_step(double t0, double h) const {
        static const double c1 = 0.5 - std::sqrt(3.0) / 6.0;
        static const double c2 = 0.5 + std::sqrt(3.0) / 6.0;
        const Mat a1 = family_.at(t0 + c1 * h);
        const Mat a2 = family_.at(t0 + c2 * h);
        const Mat omega =
            0.5 * h * (a1 + a2) + (std::sqrt(3.0) / 12.0) * h * h * (a2 * a1 - a1 * a2);
        return expm(omega);
    }

private:
    static constexpr size_t kCacheCap = 4096;
    LinearFamily family_;
    StepperConfig stepper_;
    mutable std::map<std::pair<double, double>, Mat> cache_;
};

inline Vec propagate(const EvolutionFamily& ef, double t, double s, const Vec& x) {
    return ef.apply(t, s, x);
}

// ---------------------------------------------------------------------------
// exponential dichotomy

struct DichotomyOptions {
    double spectral_gap_tol = 1e-6;
    std::vector<double> base_times = {0.0, 1.7, -2.3};
    double fit_lo = 0.5;
    double fit_hi = 20.0;
    int fit_samples = 12;
    double norm_floor = 1e-250;
    std::vector<double> probe_times = {-3.1, -1.2, 0.0, 0.9, 2.2, 4.8};
};

struct DichotomyData {
    Mat P, Q;
    double N = 1.0;
    double delta = 0.0;
    double stable_rate = std::numeric_limits<double>::infinity();
    double unstable_rate = std::numeric_limits<double>::infinity();
    double commute_defect = 0.0;
    bool has_unstable = false;
    bool has_stable = false;
};

namespace detail {

/// U(t,s) restricted to the stable range: exp(theta * A P) P, which avoids the
/// overflowing unstable block of the full exponential.
inline Mat commuting_stable_prop(const LinearFamily& fam, const Mat& P, double theta) {
    return expm(theta * (fam.base() * P)) * P;
}

/// Backward unstable propagator U_Q(t,s)^{-1} restricted to range(Q);
/// theta = int_s^t d is negative for t < s.
inline Mat commuting_unstable_prop(const LinearFamily& fam, const Mat& Q, double theta) {
    return expm(theta * (fam.base() * Q)) * Q;
}

}  // namespace detail

/// Spectral projections via the matrix sign function plus log-linear fits of
/// the dichotomy constants N and delta from sampled propagator norms. N is
/// raised until N e^{-delta tau} dominates every sample, so the fitted decay
/// bound holds on the sampled grid by construction.
inline DichotomyData dichotomy(const EvolutionFamily& ef, DichotomyOptions opt = {}) {
    const LinearFamily& fam = ef.family();
    const int n = ef.dim();

    const auto gap_check = [&](const Mat& a) {
        Eigen::EigenSolver<Mat> es(a);
        double min_re = std::numeric_limits<double>::infinity();
        bool any_stable = false, any_unstable = false;
        for (int i = 0; i < a.rows(); ++i) {
            const double re = es.eigenvalues()(i).real();
            min_re = std::min(min_re, std::abs(re));
            (re < 0 ? any_stable : any_unstable) = true;
        }
        if (min_re < opt.spectral_gap_tol)
            throw NumericError(
                "evolution.dichotomy: eigenvalue within spectral_gap_tol of the imaginary axis, "
                "family is not hyperbolic");
        return std::make_pair(any_stable, any_unstable);
    };

    DichotomyData dd;
    if (fam.commuting()) {
        auto [any_s, any_u] = gap_check(fam.base());
        dd.has_stable = any_s;
        dd.has_unstable = any_u;
        if (!any_u) {
            dd.P = Mat::Identity(n, n);
        } else if (!any_s) {
            dd.P = Mat::Zero(n, n);
        } else {
            dd.P = stable_projector(fam.base());
        }
    } else {
        Mat p_ref;
        for (double t : opt.probe_times) {
            const Mat a = fam.at(t);
            auto [any_s, any_u] = gap_check(a);
            Mat p = !any_u ? Mat(Mat::Identity(n, n))
                           : (!any_s ? Mat(Mat::Zero(n, n)) : stable_projector(a));
            if (p_ref.size() == 0) {
                p_ref = p;
                dd.has_stable = any_s;
                dd.has_unstable = any_u;
            } else if (op_norm(p - p_ref) > 1e-8) {
                throw PreconditionError(
                    "evolution.dichotomy: time-varying dichotomy projections are unsupported for "
                    "tabulated families");
            }
        }
        dd.P = p_ref;
    }
    dd.Q = Mat::Identity(n, n) - dd.P;

    // Sampled decay fits over (t - s) in [fit_lo, fit_hi], least squares in
    // log scale, pooled over the base times.
    const auto taus = logspace(opt.fit_lo, opt.fit_hi, opt.fit_samples);
    std::vector<double> xs, ys_stable, ys_unstable;
    std::vector<std::pair<double, double>> samples_stable, samples_unstable;
    for (double s : opt.base_times) {
        for (double tau : taus) {
            if (dd.has_stable) {
                Mat up;
                if (fam.commuting()) {
                    up = detail::commuting_stable_prop(fam, dd.P, fam.d_integral(s, s + tau));
                } else {
                    up = ef.propagator(s + tau, s) * dd.P;
                }
                const double y = std::max(op_norm(up), opt.norm_floor);
                samples_stable.emplace_back(tau, y);
            }
            if (dd.has_unstable) {
                const Mat uq =
                    detail::commuting_unstable_prop(fam, dd.Q, fam.d_integral(s + tau, s));
                const double y = std::max(op_norm(uq), opt.norm_floor);
                samples_unstable.emplace_back(tau, y);
            }
        }
    }

    const auto fit_side = [&](const std::vector<std::pair<double, double>>& samples, double& rate) {
        std::vector<double> x, y;
        for (const auto& [tau, v] : samples) {
            x.push_back(tau);
            y.push_back(std::log(v));
        }
        const LineFit f = fit_line(x, y);
        rate = -f.slope;
        double n_cover = std::exp(f.intercept);
        for (const auto& [tau, v] : samples) n_cover = std::max(n_cover, v * std::exp(rate * tau));
        return n_cover;
    };

    double n_cover = 1.0;
    if (dd.has_stable) n_cover = std::max(n_cover, fit_side(samples_stable, dd.stable_rate));
    if (dd.has_unstable) n_cover = std::max(n_cover, fit_side(samples_unstable, dd.unstable_rate));
    dd.N = n_cover;
    dd.delta = std::min(dd.stable_rate, dd.unstable_rate);
    if (!(dd.delta > 0))
        throw NumericError("evolution.dichotomy: fitted decay rate is not positive");

    // projections must commute with the propagator on a small sample of pairs
    for (double s : opt.base_times) {
        for (double tau : {0.5, 2.0, 6.0}) {
            if (!fam.commuting() && dd.has_unstable) continue;
            const Mat u = fam.commuting() ? expm(fam.d_integral(s, s + tau) * fam.base())
                                          : ef.propagator(s + tau, s);
            dd.commute_defect = std::max(dd.commute_defect, op_norm(u * dd.P - dd.P * u));
        }
    }
    return dd;
}

/// ||U(s+tau, s) P|| and its backward unstable counterpart, for decay-curve
/// exports and bound checks.
inline double stable_decay_norm(const EvolutionFamily& ef, const DichotomyData& dd, double s,
                                double tau) {
    if (!dd.has_stable) return 0.0;
    const LinearFamily& fam = ef.family();
    if (fam.commuting())
        return op_norm(detail::commuting_stable_prop(fam, dd.P, fam.d_integral(s, s + tau)));
    return op_norm(ef.propagator(s + tau, s) * dd.P);
}

inline double unstable_decay_norm(const EvolutionFamily& ef, const DichotomyData& dd, double s,
                                  double tau) {
    if (!dd.has_unstable) return 0.0;
    const LinearFamily& fam = ef.family();
    if (!fam.commuting())
        throw PreconditionError(
            "evolution.unstable_decay_norm: unstable backward branch requires a commuting family");
    return op_norm(detail::commuting_unstable_prop(fam, dd.Q, fam.d_integral(s + tau, s)));
}

/// Green kernel of the hyperbolic splitting:
///   U(t,s) P(s) x              for t >= s,
///   -U_Q(t,s)^{-1}... Q(s) x   for t <  s (backward on the unstable range).
inline Vec green_kernel(const EvolutionFamily& ef, const DichotomyData& dd, double t, double s,
                        const Vec& x) {
    const LinearFamily& fam = ef.family();
    if (t >= s) {
        if (fam.commuting())
            return detail::commuting_stable_prop(fam, dd.P, fam.d_integral(s, t)) * x;
        return ef.apply(t, s, dd.P * x);
    }
    if (!dd.has_unstable) return Vec::Zero(ef.dim());
    if (!fam.commuting())
        throw PreconditionError(
            "evolution.green_kernel: unstable backward branch requires a commuting family");
    return -(detail::commuting_unstable_prop(fam, dd.Q, fam.d_integral(s, t)) * x);
}

// ---------------------------------------------------------------------------
// interpolation alpha-norms

inline std::vector<double> default_r_grid() { return logspace(1e-3, 1e3, 61); }

/// Precomputed evaluator of x -> sup_r ||r^alpha (A - omega) R(r, A - omega) x||
/// over a fixed log-spaced r grid. alpha = 0 falls back to the ambient norm.
class AlphaNormOp {
public:
    AlphaNormOp() = default;

    AlphaNormOp(const Mat& a, double omega, double alpha,
                std::vector<double> r_grid = default_r_grid())
        : alpha_(alpha), r_grid_(std::move(r_grid)) {
        if (alpha < 0.0 || alpha >= 1.0)
            throw PreconditionError("evolution.alpha_norm: alpha must lie in [0, 1)");
        if (alpha_ == 0.0) return;
        if (r_grid_.size() < 2 ||
            std::log10(r_grid_.back() / r_grid_.front()) < 6.0 - 1e-9)
            throw PreconditionError("evolution.alpha_norm: r grid must span >= 6 decades");
        const Mat shifted = a - omega * Mat::Identity(a.rows(), a.cols());
        for (double r : r_grid_) {
            const Mat res = r * Mat::Identity(a.rows(), a.cols()) - shifted;
            Eigen::FullPivLU<Mat> lu(res);
            if (!lu.isInvertible())
                throw NumericError("evolution.alpha_norm: resolvent solve failed (r in spectrum)");
            w_.push_back(std::pow(r, alpha) * (shifted * lu.inverse()));
        }
    }

    double alpha() const { return alpha_; }

    double operator()(const Vec& x) const {
        if (alpha_ == 0.0 || w_.empty()) return x.norm();
        double best = 0.0;
        for (const auto& w : w_) best = std::max(best, (w * x).norm());
        return best;
    }

    double arg_max(const Vec& x) const {
        if (alpha_ == 0.0 || w_.empty()) return 0.0;
        double best = -1.0, arg = r_grid_.front();
        for (size_t i = 0; i < w_.size(); ++i) {
            const double v = (w_[i] * x).norm();
            if (v > best) {
                best = v;
                arg = r_grid_[i];
            }
        }
        return arg;
    }

private:
    double alpha_ = 0.0;
    std::vector<double> r_grid_;
    std::vector<Mat> w_;
};

struct AlphaNorm {
    double value = 0.0;
    double maximizing_r = 0.0;
    double alpha = 0.0;
};

inline AlphaNorm alpha_norm(const Mat& a, double omega, const Vec& x, double alpha,
                            const std::vector<double>& r_grid = default_r_grid()) {
    const AlphaNormOp op(a, omega, alpha, r_grid);
    return {op(x), op.arg_max(x), alpha};
}

/// Embedding bound k(alpha): sup ||x||_alpha / ||x||_beta over probe vectors.
inline double embedding_constant(const AlphaNormOp& alpha_op, const AlphaNormOp& beta_op,
                                 const std::vector<Vec>& probes) {
    double k = 0.0;
    for (const Vec& x : probes) {
        const double nb = beta_op(x);
        if (nb > 1e-300) k = std::max(k, alpha_op(x) / nb);
    }
    return k;
}

inline std::vector<Vec> probe_vectors(int n) {
    std::vector<Vec> probes;
    for (int i = 0; i < n; ++i) probes.push_back(Vec::Unit(n, i));
    probes.push_back(Vec::Ones(n) / std::sqrt(static_cast<double>(n)));
    Vec alt(n);
    for (int i = 0; i < n; ++i) alt(i) = (i % 2 == 0) ? 1.0 : -1.0;
    probes.push_back(alt / alt.norm());
    return probes;
}

// ---------------------------------------------------------------------------
// decay-estimate fits

enum class EstimateTarget { StableAlpha, UnstableAlpha, UnstableBeta, StableBeta };

struct FitOptions {
    std::vector<double> base_times = {0.0, 1.3, -2.1};
    double tau_lo = 0.5;
    double tau_hi = 20.0;
    int n_tau = 12;
    double power_lo = 0.02;   // small-gap window for the power-exponent fit
    double power_hi = 0.3;
    int n_power = 6;
    double rate_tol_frac = 0.05;
    std::vector<double> r_grid = {};  // empty = default
};

struct EstimateFit {
    EstimateTarget target{};
    double prefactor = 0.0;       // sup of LHS / structural factor
    double decay_rate = 0.0;      // worst per-series log-linear rate
    double power_exponent = 0.0;  // log-log slope over the small-gap window
    double required_rate = 0.0;
    bool rate_ok = false;
    bool vacuous = false;          // the relevant subspace is trivial (LHS = 0)
    double max_fit_residual = 0.0;  // worst log-scale residual of the rate fits
    std::vector<std::pair<double, double>> samples;  // (tau, lhs) of one probe series
};

/// Measures one of the four decay estimates on a sampled (s, tau, x) grid:
/// the sup of LHS over the structural right-hand factor gives the fitted
/// constant, a log-linear fit in tau gives the decay rate.
inline EstimateFit fit_estimate(const EvolutionFamily& ef, const DichotomyData& dd,
                                EstimateTarget target, double alpha, double beta, double mu,
                                FitOptions opt = {}) {
    const bool beta_target = target == EstimateTarget::UnstableBeta || target == EstimateTarget::StableBeta;
    if (beta_target) {
        if (!(0.0 <= mu && mu < alpha && alpha < beta && beta < 1.0))
            throw PreconditionError("evolution.fit_estimate: need 0 <= mu < alpha < beta < 1");
        if (!(2.0 * alpha > mu + 1.0))
            throw PreconditionError("evolution.fit_estimate: exponent constraint 2*alpha > mu + 1 violated");
    }
    if (!(alpha > 0.0 && alpha < 1.0))
        throw PreconditionError("evolution.fit_estimate: alpha must lie in (0, 1)");

    EstimateFit fit;
    fit.target = target;
    const bool unstable_side = target == EstimateTarget::UnstableAlpha || target == EstimateTarget::UnstableBeta;
    const double delta = dd.delta;
    switch (target) {
        case EstimateTarget::StableAlpha: fit.required_rate = delta / 2.0; break;
        case EstimateTarget::UnstableAlpha: fit.required_rate = delta; break;
        case EstimateTarget::UnstableBeta: fit.required_rate = delta; break;
        case EstimateTarget::StableBeta: fit.required_rate = delta / 4.0; break;
    }
    if ((unstable_side && !dd.has_unstable) || (!unstable_side && !dd.has_stable)) {
        fit.vacuous = true;
        fit.rate_ok = true;
        fit.decay_rate = std::numeric_limits<double>::infinity();
        return fit;
    }

    const LinearFamily& fam = ef.family();
    const Mat frozen = fam.at(0.0);
    const auto grid = opt.r_grid.empty() ? default_r_grid() : opt.r_grid;
    const AlphaNormOp norm_alpha(frozen, fam.omega(), alpha, grid);
    const AlphaNormOp norm_beta(frozen, fam.omega(), beta, grid);
    const bool power_in_factor = target == EstimateTarget::StableAlpha || target == EstimateTarget::StableBeta;

    const auto lhs_vec = [&](double s, double tau, const Vec& x) -> Vec {
        switch (target) {
            case EstimateTarget::StableAlpha:
                if (fam.commuting())
                    return detail::commuting_stable_prop(fam, dd.P, fam.d_integral(s, s + tau)) * x;
                return ef.apply(s + tau, s, dd.P * x);
            case EstimateTarget::UnstableAlpha:
                return detail::commuting_unstable_prop(fam, dd.Q, fam.d_integral(s + tau, s)) * x;
            case EstimateTarget::UnstableBeta: {
                const Vec y =
                    detail::commuting_unstable_prop(fam, dd.Q, fam.d_integral(s + tau, s)) * x;
                return fam.at(s + tau) * y;
            }
            case EstimateTarget::StableBeta: {
                Vec y;
                if (fam.commuting())
                    y = detail::commuting_stable_prop(fam, dd.P, fam.d_integral(s, s + tau)) * x;
                else
                    y = ef.apply(s + tau, s, dd.P * x);
                return fam.at(s) * y;
            }
        }
        return Vec();
    };
    const auto rhs_factor = [&](double tau, const Vec& x) {
        const double xn = beta_target ? norm_beta(x) : x.norm();
        double f = xn;
        if (power_in_factor) f *= std::pow(tau, -alpha);
        switch (target) {
            case EstimateTarget::StableAlpha: return f * std::exp(-0.5 * delta * tau);
            case EstimateTarget::UnstableAlpha: return f * std::exp(-delta * tau);
            case EstimateTarget::UnstableBeta: return f * std::exp(-delta * tau);
            case EstimateTarget::StableBeta: return f * std::exp(-0.25 * delta * tau);
        }
        return f;
    };

    const auto probes = probe_vectors(ef.dim());
    const auto taus = logspace(opt.tau_lo, opt.tau_hi, opt.n_tau);
    const auto power_taus = logspace(opt.power_lo, opt.power_hi, opt.n_power);

    fit.decay_rate = std::numeric_limits<double>::infinity();
    std::vector<double> power_lx, power_ly;
    for (double s : opt.base_times) {
        for (const Vec& x : probes) {
            std::vector<double> fx, fy;
            double series_max = 0.0;
            for (double tau : taus) {
                const Vec y = lhs_vec(s, tau, x);
                const double lhs = norm_alpha(y);
                series_max = std::max(series_max, lhs);
                fit.prefactor = std::max(fit.prefactor, lhs / rhs_factor(tau, x));
                const double g = power_in_factor ? lhs * std::pow(tau, alpha) : lhs;
                fx.push_back(tau);
                fy.push_back(std::log(std::max(g, 1e-280)));
            }
            // probes annihilated by the projection carry no rate information
            if (series_max > 1e-200) {
                const LineFit lf = fit_line(fx, fy);
                fit.decay_rate = std::min(fit.decay_rate, -lf.slope);
                fit.max_fit_residual = std::max(fit.max_fit_residual, lf.max_residual);
                if (fit.samples.empty())
                    for (size_t i = 0; i < taus.size(); ++i)
                        fit.samples.emplace_back(taus[i],
                                                 norm_alpha(lhs_vec(s, taus[i], x)));
            }
            for (double tau : power_taus) {
                const Vec y = lhs_vec(s, tau, x);
                const double lhs = norm_alpha(y);
                if (lhs < 1e-200) continue;
                fit.prefactor = std::max(fit.prefactor, lhs / rhs_factor(tau, x));
                power_lx.push_back(std::log(tau));
                power_ly.push_back(std::log(lhs));
            }
        }
    }
    fit.power_exponent = power_lx.size() >= 2 ? fit_line(power_lx, power_ly).slope : 0.0;
    fit.rate_ok = fit.decay_rate >= fit.required_rate * (1.0 - opt.rate_tol_frac);
    return fit;
}

// ---------------------------------------------------------------------------
// Acquistapace-Terreni checks

struct ATOptions {
    double theta = 3.0 * M_PI / 4.0;
    double gamma = 1.0;  // Hoelder exponent tried for the constant-domain bound
    std::vector<double> t_probes = {-3.1, 0.0, 1.7};
    std::vector<double> midpoints = linspace(-5.0, 5.0, 41);
    std::vector<double> gaps = logspace(1e-8, 5.0, 20);
    std::vector<double> r_probes = {0.0, 1.3, -2.7};
    int n_radii = 21;
    double K_cap = 1e6;
    double L_cap = 1e6;
};

struct ATReport {
    double K_fit = 0.0;
    bool at1_ok = false;
    double L_fit = 0.0;
    double gamma = 1.0;
    bool at3_ok = false;
    bool passes() const { return at1_ok && at3_ok; }
};

/// Verifies the sectorial resolvent bound on a finite sector grid and the
/// constant-domain Hoelder bound on sampled pairs; reports the smallest
/// admissible K and L seen on the grids.
inline ATReport check_AT(const LinearFamily& fam, ATOptions opt = {}) {
    ATReport rep;
    rep.gamma = opt.gamma;
    const double omega = fam.omega();
    const int n = fam.dim();

    bool at1_ok = true;
    double k_fit = 0.0;
    const auto radii = logspace(1e-3, 1e3, opt.n_radii);
    const std::vector<double> args = {0.0, 0.5 * opt.theta, -0.5 * opt.theta, opt.theta,
                                      -opt.theta};
    for (double t : opt.t_probes) {
        const Mat shifted = fam.at(t) - omega * Mat::Identity(n, n);
        try {
            // lambda = 0 must lie in the resolvent set as well.
            Eigen::FullPivLU<Mat> lu(shifted);
            if (!lu.isInvertible()) throw NumericError("singular at lambda = 0");
            for (double r : radii) {
                for (double arg : args) {
                    const std::complex<double> lambda = std::polar(r, arg);
                    CMat res = lambda * CMat::Identity(n, n) - shifted.cast<std::complex<double>>();
                    Eigen::FullPivLU<CMat> clu(res);
                    if (!clu.isInvertible()) throw NumericError("sector point in spectrum");
                    k_fit = std::max(k_fit, (1.0 + std::abs(lambda)) * op_norm(CMat(clu.inverse())));
                }
            }
        } catch (const NumericError&) {
            at1_ok = false;
        }
    }
    rep.K_fit = k_fit;
    rep.at1_ok = at1_ok && k_fit <= opt.K_cap;

    double l_fit = 0.0;
    if (fam.form() == FamilyForm::Constant) {
        l_fit = 0.0;
    } else if (fam.form() == FamilyForm::ScalarModulated) {
        // (A(t)-A(s)) R(omega, A(r)) = (d(t)-d(s)) * A R(omega, d(r) A)
        std::vector<double> c_r;
        for (double r : opt.r_probes) {
            const Mat a_r = fam.at(r);
            const Mat res = omega * Mat::Identity(n, n) - a_r;
            Eigen::FullPivLU<Mat> lu(res);
            if (!lu.isInvertible())
                throw NumericError("evolution.check_AT: omega lies in the spectrum of A(r)");
            c_r.push_back(op_norm(Mat(fam.base() * lu.inverse())));
        }
        const double c_max = *std::max_element(c_r.begin(), c_r.end());
        for (double m : opt.midpoints)
            for (double g : opt.gaps) {
                const double dd_ts = std::abs(fam.d(m + 0.5 * g) - fam.d(m - 0.5 * g));
                l_fit = std::max(l_fit, dd_ts * c_max / std::pow(g, opt.gamma));
            }
    } else {
        for (double r : opt.r_probes) {
            const Mat a_r = fam.at(r);
            const Mat res = omega * Mat::Identity(n, n) - a_r;
            Eigen::FullPivLU<Mat> lu(res);
            if (!lu.isInvertible())
                throw NumericError("evolution.check_AT: omega lies in the spectrum of A(r)");
            const Mat rinv = lu.inverse();
            for (size_t mi = 0; mi < opt.midpoints.size(); mi += 4)
                for (double g : opt.gaps) {
                    const double m = opt.midpoints[mi];
                    const Mat diff = fam.at(m + 0.5 * g) - fam.at(m - 0.5 * g);
                    l_fit = std::max(l_fit, op_norm(Mat(diff * rinv)) / std::pow(g, opt.gamma));
                }
        }
    }
    rep.L_fit = l_fit;
    rep.at3_ok = l_fit <= opt.L_cap;
    return rep;
}

// ---------------------------------------------------------------------------
// translation compatibility of the shifted family

struct H4Options {
    double C = 1.0;
    double alpha0 = 0.5;  // H(sigma) = C sigma^{-alpha0} e^{-delta sigma / 8}
    std::vector<double> t_probes = {-5.0, -3.0, -1.0, 0.0, 1.0, 2.5, 5.0};
    std::vector<double> gaps = {0.25, 0.5, 1.0, 2.0, 4.0, 8.0};
};

struct H4Report {
    double tau = 0.0;
    double epsilon = 0.0;
    double sup_ratio = 0.0;  // max over the grid of LHS / H(t-s)
    bool dominated = false;
};

/// Measures ||A(t+tau)U(t+tau,s+tau) - A(t)U(t,s)|| in the ambient-to-alpha
/// operator norm on a (t, s) grid and checks domination by epsilon * H(t-s).
inline H4Report check_H4(const EvolutionFamily& ef, const DichotomyData& dd, double tau,
                         double epsilon, double alpha, H4Options opt = {}) {
    const LinearFamily& fam = ef.family();
    if (!fam.commuting())
        throw PreconditionError("evolution.check_H4: unsupported family form (scalar-modulated only)");
    const AlphaNormOp norm_alpha(fam.at(0.0), fam.omega(), alpha);
    const auto probes = probe_vectors(ef.dim());
    const double delta = dd.delta;
    const auto H = [&](double sigma) {
        return opt.C * std::pow(sigma, -opt.alpha0) * std::exp(-delta * sigma / 8.0);
    };

    H4Report rep;
    rep.tau = tau;
    rep.epsilon = epsilon;
    for (double t : opt.t_probes) {
        for (double g : opt.gaps) {
            const double s = t - g;
            const Mat m_shift = fam.at(t + tau) * detail::commuting_stable_prop(
                                                      fam, dd.P, fam.d_integral(s + tau, t + tau));
            const Mat m_base =
                fam.at(t) * detail::commuting_stable_prop(fam, dd.P, fam.d_integral(s, t));
            const Mat diff = m_shift - m_base;
            double lhs = 0.0;
            for (const Vec& x : probes) lhs = std::max(lhs, norm_alpha(diff * x));
            rep.sup_ratio = std::max(rep.sup_ratio, lhs / H(g));
        }
    }
    rep.dominated = rep.sup_ratio <= epsilon;
    return rep;
}

}  // namespace wpap
