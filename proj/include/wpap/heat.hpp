#pragma once

#include <functional>
#include <random>
#include <vector>

#include "wpap/common.hpp"
#include "wpap/mild.hpp"

namespace wpap {

/// Interval (0, length) with n interior points and homogeneous Dirichlet
/// boundary; mesh width h = length / (n + 1).
struct Domain1D {
    double length = 1.0;
    int n = 31;

    double h() const { return length / (n + 1); }
    std::vector<double> nodes() const {
        std::vector<double> xs;
        xs.reserve(static_cast<size_t>(n));
        for (int i = 1; i <= n; ++i) xs.push_back(i * h());
        return xs;
    }
};

inline void validate_domain(const Domain1D& d) {
    if (d.n < 3 || !(d.length > 0))
        throw PreconditionError("heat_demo.Domain1D: need n >= 3 interior points and length > 0");
}

/// Second-difference Dirichlet Laplacian (1/h^2) tridiag(1, -2, 1).
inline Mat assemble_laplacian(const Domain1D& d) {
    validate_domain(d);
    const double ih2 = 1.0 / (d.h() * d.h());
    Mat a = Mat::Zero(d.n, d.n);
    for (int i = 0; i < d.n; ++i) {
        a(i, i) = -2.0 * ih2;
        if (i > 0) a(i, i - 1) = ih2;
        if (i + 1 < d.n) a(i, i + 1) = ih2;
    }
    return a;
}

/// Centered first difference with Dirichlet ghost values at both ends.
inline Mat assemble_gradient(const Domain1D& d) {
    validate_domain(d);
    const double i2h = 1.0 / (2.0 * d.h());
    Mat g = Mat::Zero(d.n, d.n);
    for (int i = 0; i < d.n; ++i) {
        if (i > 0) g(i, i - 1) = -i2h;
        if (i + 1 < d.n) g(i, i + 1) = i2h;
    }
    return g;
}

/// kth Dirichlet eigenvalue of the discrete Laplacian (k = 1..n).
inline double fd_laplacian_eigenvalue(const Domain1D& d, int k) {
    const double s = std::sin(0.5 * k * M_PI / (d.n + 1));
    return -4.0 * s * s / (d.h() * d.h());
}

/// First discrete eigenvector, samples of sin(pi x / length), sup-normalized.
inline Vec first_mode(const Domain1D& d) {
    Vec v(d.n);
    const auto xs = d.nodes();
    for (int i = 0; i < d.n; ++i) v(i) = std::sin(M_PI * xs[static_cast<size_t>(i)] / d.length);
    return v / v.maxCoeff();
}

// ---------------------------------------------------------------------------
// coefficients

using Field = std::function<double(double, double)>;  // (t, x)

/// a_gamma(t, x) = 3 + sin(|x| t) + sin(gamma |x| t); gamma is passed as a
/// rational convergent of the intended irrational.
inline Field a_gamma_field(double gamma) {
    return [gamma](double t, double x) {
        const double r = std::abs(x);
        return 3.0 + std::sin(r * t) + std::sin(gamma * r * t);
    };
}

struct HeatCoefficients {
    Field a;                      // diffusion coefficient, positive and Hoelder in t
    Field b, c;                   // gradient coefficients (null = 1)
    Field e_field, h_field;       // WPAP scalar fields driving F and G (null = 0)
    Field e_field_ap, h_field_ap; // their AP components, when known
    double K_nl = 0.0;            // nonlinearity scale
};

struct HeatHypothesesReport {
    double inf_a = 0.0;      // uniform lower bound m0 of the diffusion field
    double hoelder_L = 0.0;  // Hoelder-in-t constant at the probed exponent
    double hoelder_mu = 1.0;
    bool ok = false;
};

inline HeatHypothesesReport check_heat_hypotheses(const HeatCoefficients& c, const Domain1D& d,
                                                  double t_span = 20.0, double hoelder_mu = 1.0) {
    HeatHypothesesReport rep;
    rep.hoelder_mu = hoelder_mu;
    rep.inf_a = std::numeric_limits<double>::infinity();
    const auto xs = d.nodes();
    for (double t : linspace(-t_span, t_span, 801))
        for (double x : xs) rep.inf_a = std::min(rep.inf_a, c.a(t, x));
    for (double t : linspace(-t_span, t_span, 101)) {
        for (double gap : {1e-4, 1e-2, 0.1, 0.5, 2.0}) {
            for (double x : xs) {
                const double diff = std::abs(c.a(t + gap, x) - c.a(t, x));
                rep.hoelder_L = std::max(rep.hoelder_L, diff / std::pow(gap, hoelder_mu));
            }
        }
    }
    rep.ok = rep.inf_a > 0.0 && std::isfinite(rep.hoelder_L);
    return rep;
}

// ---------------------------------------------------------------------------
// problem assembly

struct HeatProblemOptions {
    double mu = 0.1, alpha = 0.6, beta = 0.8;
    StepperConfig stepper{0.02, 1e-8};
    DichotomyOptions dichotomy{};
    double coeff_probe_span = 20.0;
};

/// A(t) = diag(a(t, x_i)) * Laplacian, B/C = diag(b/c) * centered gradient,
/// F/G the paper-example nonlinearities K e(t,x)/(1 + |grad|). Collapses to a
/// constant family when a does not depend on t.
inline MildProblem build_heat_problem(const Domain1D& d, const HeatCoefficients& coeffs,
                                      int weight_m, HeatProblemOptions opt = {}) {
    validate_domain(d);
    if (!(opt.alpha > 0.5))
        throw PreconditionError("heat_demo.build_heat_problem: the example requires alpha > 1/2");
    if (!coeffs.a) throw PreconditionError("heat_demo.build_heat_problem: diffusion field a required");

    const auto rep = check_heat_hypotheses(coeffs, d, opt.coeff_probe_span);
    if (!(rep.inf_a > 0.0))
        throw PreconditionError("heat_demo.build_heat_problem: inf a <= 0 on the probe grid");

    const Mat lap = assemble_laplacian(d);
    const Mat grad = assemble_gradient(d);
    const auto xs = d.nodes();
    const int n = d.n;

    // t-invariance probe decides between the constant and tabulated forms
    bool t_invariant = true;
    for (double x : xs) {
        const double ref = coeffs.a(0.0, x);
        for (double t : {-7.3, -1.1, 2.9, 11.0})
            if (std::abs(coeffs.a(t, x) - ref) > 1e-13) t_invariant = false;
    }
    const Field a_field = coeffs.a;
    LinearFamily family = t_invariant
        ? LinearFamily::constant([&] {
              Vec diag(n);
              for (int i = 0; i < n; ++i) diag(i) = a_field(0.0, xs[static_cast<size_t>(i)]);
              return Mat(diag.asDiagonal() * lap);
          }())
        : LinearFamily::tabulated(
              [a_field, xs, lap, n](double t) {
                  Vec diag(n);
                  for (int i = 0; i < n; ++i) diag(i) = a_field(t, xs[static_cast<size_t>(i)]);
                  return Mat(diag.asDiagonal() * lap);
              },
              n);

    EvolutionFamily ef(std::move(family), opt.stepper);
    DichotomyData dd = dichotomy(ef, opt.dichotomy);

    const auto diag_of = [xs, n](const Field& f) -> std::function<Vec(double)> {
        if (!f) return nullptr;
        return [f, xs, n](double t) {
            Vec v(n);
            for (int i = 0; i < n; ++i) v(i) = f(t, xs[static_cast<size_t>(i)]);
            return v;
        };
    };
    OperatorFamily B = OperatorFamily::constant(grad);
    B.diag_field = diag_of(coeffs.b);
    OperatorFamily C = OperatorFamily::constant(grad);
    C.diag_field = diag_of(coeffs.c);

    const auto nonlinearity = [xs, n](const Field& field, double K) -> Forcing {
        if (!field || K == 0.0) return nullptr;
        return [field, K, xs, n](double t, const Vec& w) {
            Vec out(n);
            for (int i = 0; i < n; ++i)
                out(i) = K * field(t, xs[static_cast<size_t>(i)]) / (1.0 + std::abs(w(i)));
            return out;
        };
    };
    Forcing f = nonlinearity(coeffs.e_field, coeffs.K_nl);
    Forcing g = nonlinearity(coeffs.h_field, coeffs.K_nl);

    // Lipschitz constant of the nonlinearities, measured on the discrete range.
    double K_meas = 0.0;
    std::mt19937 rng(20240814u);
    std::uniform_real_distribution<double> dist(-4.0, 4.0);
    for (int trial = 0; trial < 48; ++trial) {
        const double t = -10.0 + 20.0 * (trial / 48.0);
        Vec w1(n), w2(n);
        for (int i = 0; i < n; ++i) {
            w1(i) = dist(rng);
            w2(i) = trial % 3 == 0 ? 0.0 : dist(rng);
        }
        const double dw = (w1 - w2).norm();
        if (dw < 1e-12) continue;
        if (f) K_meas = std::max(K_meas, (f(t, w1) - f(t, w2)).norm() / dw);
        if (g) K_meas = std::max(K_meas, (g(t, w1) - g(t, w2)).norm() / dw);
    }

    return make_mild_problem(std::move(ef), std::move(dd), std::move(B), std::move(C), std::move(f),
                             std::move(g), 1.05 * K_meas, Weight::polynomial(weight_m), opt.mu,
                             opt.alpha, opt.beta);
}

/// Constant-coefficient benchmark: a = 1, forcing sin(t) times the first
/// discrete mode, no nonlinearity. Its exact response is the single-mode
/// convolution against e^{lambda_1 t}.
inline MildProblem build_single_mode_problem(const Domain1D& d, HeatProblemOptions opt = {}) {
    validate_domain(d);
    HeatCoefficients coeffs;
    coeffs.a = [](double, double) { return 1.0; };
    MildProblem p = build_heat_problem(d, coeffs, 0, opt);
    const Vec v1 = first_mode(d);
    p.g = [v1](double t, const Vec&) { return Vec(std::sin(t) * v1); };
    p.lipschitz_K = 0.0;
    return p;
}

// ---------------------------------------------------------------------------
// demo driver

struct HeatDemoConfig {
    Domain1D domain{1.0, 31};
    HeatCoefficients coeffs;
    int weight_m = 2;
    HeatProblemOptions problem{};
    SolveOptions solve{};
    std::vector<double> horizons = {5.0, 10.0, 20.0, 40.0};
    PapOptions pap{};
};

struct HeatDemoResult {
    MildSolution full;
    bool has_ap_reference = false;
    MildSolution ap_reference;
    SampledPath remainder;           // full - ap_reference on the report grid
    WpapVerification verification;   // remainder deviation under rho_m
    ErgodicDeviation deviation_rho0; // same remainder under the flat weight
    DichotomyData dd;
    double contraction = 0.0;
    HeatHypothesesReport hypotheses;
};

/// Solves the demo problem, then re-solves with the almost periodic forcing
/// components alone; the difference is the ergodic remainder whose weighted
/// deviation must decay. Decisions are cross-checked under rho_0.
inline HeatDemoResult run_demo(const HeatDemoConfig& cfg) {
    HeatDemoResult out;
    out.hypotheses = check_heat_hypotheses(cfg.coeffs, cfg.domain, cfg.problem.coeff_probe_span);

    MildProblem p = build_heat_problem(cfg.domain, cfg.coeffs, cfg.weight_m, cfg.problem);
    out.dd = p.dd;
    SolveOptions sopt = cfg.solve;
    if (sopt.t_report < cfg.horizons.back()) sopt.t_report = cfg.horizons.back();
    out.full = solve(p, sopt);
    out.contraction = out.full.report.contraction_estimate;

    const bool split = (cfg.coeffs.e_field_ap || !cfg.coeffs.e_field) &&
                       (cfg.coeffs.h_field_ap || !cfg.coeffs.h_field) &&
                       (cfg.coeffs.e_field_ap || cfg.coeffs.h_field_ap);
    if (split) {
        HeatCoefficients ap_only = cfg.coeffs;
        ap_only.e_field = cfg.coeffs.e_field_ap;
        ap_only.h_field = cfg.coeffs.h_field_ap;
        MildProblem p_ap = build_heat_problem(cfg.domain, ap_only, cfg.weight_m, cfg.problem);
        out.ap_reference = solve(p_ap, sopt, nullptr, &out.full.report.constants);
        out.has_ap_reference = true;

        out.remainder = SampledPath::zeros(out.full.u.t_lo, out.full.u.t_hi(), out.full.u.step,
                                           out.full.u.dim);
        for (int i = 0; i < out.remainder.size(); ++i)
            out.remainder.at(i) = out.full.u.at(i) - out.ap_reference.u.at(i);
        out.verification = verify_wpap(out.full.u, p, &out.ap_reference.u, cfg.horizons, cfg.pap);
        out.deviation_rho0 = is_pap0(out.remainder, Weight::polynomial(0), cfg.horizons, cfg.pap);
    } else {
        out.verification = verify_wpap(out.full.u, p, nullptr, cfg.horizons, cfg.pap);
    }
    return out;
}

}  // namespace wpap
