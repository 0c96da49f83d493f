#include <catch2/catch.hpp>
#include <cmath>

#include "wpap/heat.hpp"

using namespace wpap;

namespace {

// closed-form FD eigenvalue oracle: 2 (cos(k pi h / l) - 1) / h^2
double fd_eig_oracle(const Domain1D& d, int k) {
    const double h = d.h();
    return 2.0 * (std::cos(k * M_PI * h / d.length) - 1.0) / (h * h);
}

// discrete-mode oracle for the single-mode benchmark: Im(e^{it} / (i - lambda))
double mode_response(double lambda, double t) {
    return (std::exp(std::complex<double>(0.0, t)) / (std::complex<double>(0.0, 1.0) - lambda))
        .imag();
}

HeatProblemOptions fast_options() {
    HeatProblemOptions o;
    o.stepper.substep = 0.05;
    return o;
}

}  // namespace

TEST_CASE("laplacian assembly") {
    const Domain1D d{1.0, 3};
    const Mat lap = assemble_laplacian(d);

    CHECK(op_norm(lap - lap.transpose()) < 1e-14);
    // interior row sums vanish; boundary-adjacent rows keep the Dirichlet drop
    CHECK(lap.row(1).sum() == Approx(0.0).margin(1e-10));
    CHECK(lap.row(0).sum() == Approx(-16.0).margin(1e-10));
    CHECK(lap.row(2).sum() == Approx(-16.0).margin(1e-10));

    Eigen::SelfAdjointEigenSolver<Mat> es(lap);
    std::vector<double> eigs(es.eigenvalues().data(), es.eigenvalues().data() + 3);
    std::sort(eigs.begin(), eigs.end());
    // oracle values at n = 3, l = 1: about {-54.6, -32, -9.37}
    CHECK(eigs[0] == Approx(fd_eig_oracle(d, 3)).epsilon(1e-10));
    CHECK(eigs[1] == Approx(fd_eig_oracle(d, 2)).epsilon(1e-10));
    CHECK(eigs[2] == Approx(fd_eig_oracle(d, 1)).epsilon(1e-10));
    CHECK(eigs[2] == Approx(-9.3726).epsilon(1e-4));
    CHECK(eigs[1] == Approx(-32.0).epsilon(1e-10));
    CHECK(eigs[0] == Approx(-54.6274).epsilon(1e-4));
    for (double e : eigs) CHECK(e < 0.0);

    CHECK(fd_laplacian_eigenvalue(d, 1) == Approx(fd_eig_oracle(d, 1)).epsilon(1e-12));
    CHECK_THROWS_AS(assemble_laplacian(Domain1D{1.0, 2}), PreconditionError);
}

TEST_CASE("gradient assembly") {
    const Domain1D d{1.0, 5};
    const Mat g = assemble_gradient(d);
    // centered stencil with Dirichlet ghosts: antisymmetric band
    CHECK(op_norm(g + g.transpose()) < 1e-14);
    Vec linear(5);
    const auto xs = d.nodes();
    for (int i = 0; i < 5; ++i) linear(i) = xs[static_cast<size_t>(i)];
    const Vec gl = g * linear;
    for (int i = 1; i < 4; ++i) CHECK(gl(i) == Approx(1.0).margin(1e-12));  // interior slope
}

TEST_CASE("resolvent scaling identity for constant diffusion") {
    const Domain1D d{1.0, 7};
    const Mat lap = assemble_laplacian(d);
    const double a = 2.7, omega = 1.3;
    Vec phi(7);
    for (int i = 0; i < 7; ++i) phi(i) = std::sin(0.8 * i) + 0.1 * i;
    const Vec direct = resolvent_apply(Mat(a * lap), omega, phi);
    const Vec scaled = resolvent_apply(lap, omega / a, phi) / a;
    CHECK((direct - scaled).norm() < 1e-10 * direct.norm());
}

TEST_CASE("coefficient hypotheses for a_gamma") {
    const Domain1D d{1.0, 15};
    HeatCoefficients c;
    c.a = a_gamma_field(1.4142135623730951);
    const auto rep = check_heat_hypotheses(c, d);
    CHECK(rep.ok);
    CHECK(rep.inf_a >= 1.0);  // grid minimization oracle; exact inf is 1 in the limit
    CHECK(rep.inf_a <= 3.0);
    CHECK(rep.hoelder_L <= 2.45);  // |da/dt| <= |x| (1 + gamma) <= 2.42 on (0,1)
}

TEST_CASE("problem assembly guards") {
    const Domain1D d{1.0, 7};
    HeatCoefficients c;
    c.a = [](double, double) { return 1.0; };

    HeatProblemOptions bad = fast_options();
    bad.alpha = 0.45;
    CHECK_THROWS_AS(build_heat_problem(d, c, 2, bad), PreconditionError);

    HeatCoefficients sick;
    sick.a = [](double t, double) { return std::sin(t); };  // violates (H.6)
    CHECK_THROWS_AS(build_heat_problem(d, sick, 2, fast_options()), PreconditionError);
}

TEST_CASE("constant diffusion collapses to a constant family") {
    const Domain1D d{1.0, 7};
    HeatCoefficients c;
    c.a = [](double, double x) { return 1.0 + 0.5 * x; };  // t-invariant, x-dependent
    const auto p = build_heat_problem(d, c, 0, fast_options());
    CHECK(p.family.family().form() == FamilyForm::Constant);
    CHECK_FALSE(p.dd.has_unstable);
    CHECK(p.dd.delta > 0.0);

    HeatCoefficients ct;
    ct.a = a_gamma_field(1.4142135623730951);
    const auto pt = build_heat_problem(d, ct, 0, fast_options());
    CHECK(pt.family.family().form() == FamilyForm::Tabulated);
}

TEST_CASE("single-mode benchmark matches the discrete-mode oracle") {
    const Domain1D d{1.0, 15};
    auto p = build_single_mode_problem(d, fast_options());
    SolveOptions opt;
    opt.t_report = 10.0;
    const auto sol = solve(p, opt);
    CHECK(sol.report.converged);

    const double lam = fd_laplacian_eigenvalue(d, 1);
    const Vec v1 = first_mode(d);
    double sup_err = 0.0;
    for (double t = -10.0; t <= 10.0; t += 0.25) {
        const Vec want = mode_response(lam, t) * v1;
        sup_err = std::max(sup_err, (sol.u.value(t) - want).lpNorm<Eigen::Infinity>());
    }
    CHECK(sup_err < 1e-4);
}

TEST_CASE("mesh refinement is second order against the continuum mode") {
    SolveOptions opt;
    opt.t_report = 6.0;
    const double lam_cont = -M_PI * M_PI;

    const auto run = [&](int n) {
        const Domain1D d{1.0, n};
        auto p = build_single_mode_problem(d, fast_options());
        const auto sol = solve(p, opt);
        const auto xs = d.nodes();
        double sup_err = 0.0;
        for (double t = -6.0; t <= 6.0; t += 0.25) {
            const Vec u = sol.u.value(t);
            for (int i = 0; i < d.n; ++i) {
                const double want =
                    mode_response(lam_cont, t) * std::sin(M_PI * xs[static_cast<size_t>(i)]);
                sup_err = std::max(sup_err, std::abs(u(i) - want));
            }
        }
        return sup_err;
    };
    const double e_coarse = run(15);
    const double e_fine = run(31);
    CHECK(e_coarse / e_fine == Approx(4.0).margin(0.5));  // second-order stencil
}

TEST_CASE("heat propagator preserves positivity of forced responses") {
    const Domain1D d{1.0, 9};
    HeatCoefficients c;
    c.a = [](double, double) { return 1.0; };
    auto p = build_heat_problem(d, c, 0, fast_options());
    const auto xs = d.nodes();
    p.g = [xs](double t, const Vec&) {
        Vec out(static_cast<int>(xs.size()));
        for (size_t i = 0; i < xs.size(); ++i)
            out(static_cast<int>(i)) = (1.0 + std::sin(t)) * xs[i] * (1.0 - xs[i]);
        return out;
    };
    SampledPath zero = SampledPath::zeros(-20.0, 20.0, 0.05, d.n);
    for (double t : {-3.0, 0.0, 1.7, 6.2}) {
        const Vec g3 = gamma3(zero, p, t);
        for (int i = 0; i < d.n; ++i) CHECK(g3(i) >= -1e-10);
    }
}

TEST_CASE("zero-forcing demo returns the zero solution") {
    HeatDemoConfig cfg;
    cfg.domain = Domain1D{1.0, 7};
    cfg.coeffs.a = a_gamma_field(1.4142135623730951);
    cfg.coeffs.K_nl = 0.0;
    cfg.problem = fast_options();
    cfg.solve.t_report = 5.0;
    cfg.solve.grid_step = 0.1;
    cfg.horizons = {0.6, 1.2, 2.4, 4.8};
    const auto res = run_demo(cfg);
    CHECK(res.full.report.converged);
    CHECK(res.full.u.sup_norm() == 0.0);
    CHECK(res.contraction == 0.0);
}

TEST_CASE("small quasi-periodic demo decays under rho_2 and rho_0 alike") {
    HeatDemoConfig cfg;
    cfg.domain = Domain1D{1.0, 7};
    cfg.coeffs.a = a_gamma_field(1.4142135623730951);
    cfg.coeffs.K_nl = 0.05;
    cfg.coeffs.h_field = [](double t, double x) {
        return (std::sin(t) + 2.0 * std::exp(-std::abs(t))) * (1.0 + 0.3 * x);
    };
    cfg.coeffs.h_field_ap = [](double t, double x) { return std::sin(t) * (1.0 + 0.3 * x); };
    cfg.weight_m = 2;
    cfg.problem = fast_options();
    cfg.solve.grid_step = 0.1;
    cfg.horizons = {2.5, 5.0, 10.0, 20.0};
    const auto res = run_demo(cfg);

    CHECK(res.full.report.converged);
    CHECK(res.contraction < 0.95);
    REQUIRE(res.has_ap_reference);
    CHECK(res.verification.deviation.decays_to_zero);
    for (size_t i = 1; i < res.verification.deviation.values.size(); ++i)
        CHECK(res.verification.deviation.values[i] <=
              0.75 * res.verification.deviation.values[i - 1] + 1e-300);
    // rho_m nesting: the flat-weight decision agrees
    CHECK(res.deviation_rho0.decays_to_zero == res.verification.deviation.decays_to_zero);
}
