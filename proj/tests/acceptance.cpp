// Acceptance suite: one criterion per section, one pass/fail line each.
// Exit code is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wpap/heat.hpp"
#include "wpap/mild.hpp"
#include "wpap/pap.hpp"
#include "wpap/runner.hpp"
#include "wpap/weights.hpp"

using namespace wpap;
namespace fs = std::filesystem;

namespace {

struct Harness {
    int failures = 0;

    void criterion(int index, const std::string& name, double budget_s,
                   const std::function<bool(std::string&)>& body) {
        const auto t0 = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = false;
        try {
            ok = body(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs > budget_s) {
            ok = false;
            detail += (detail.empty() ? "" : "; ") + std::string("over time budget");
        }
        std::printf("[%s] criterion %d: %s (%.2fs%s)\n", ok ? "PASS" : "FAIL", index,
                    name.c_str(), secs, detail.empty() ? "" : ("; " + detail).c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
};

bool check(bool cond, const std::string& what, std::string& detail) {
    if (!cond && detail.empty()) detail = what;
    return cond;
}

std::vector<Weight> six_weight_corpus() {
    return {Weight::polynomial(0, "rho0"),
            Weight::polynomial(1, "rho1"),
            Weight::polynomial(2, "rho2"),
            Weight::polynomial(3, "rho3"),
            Weight::expression([](double t) { return 2.0 + t * t; }, "shifted"),
            Weight::expression([](double t) { return 2.0 + std::sin(t); }, "wobble")};
}

double rk4_oracle_sup_diff(const SampledPath& u) {
    // u' = -0.95 u + sin t from t = -50 (burn-in 40 units before the window);
    // compared against the solution path at every integrator step in [-10, 10]
    const double h = 0.002;
    const int steps = static_cast<int>(std::round(60.0 / h));
    double y = 0.0, sup = 0.0;
    const auto rhs = [](double tt, double yy) { return -0.95 * yy + std::sin(tt); };
    for (int i = 0; i < steps; ++i) {
        const double t = -50.0 + i * h;
        const double k1 = rhs(t, y);
        const double k2 = rhs(t + h / 2, y + h / 2 * k1);
        const double k3 = rhs(t + h / 2, y + h / 2 * k2);
        const double k4 = rhs(t + h, y + h * k3);
        y += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        const double t1 = t + h;
        if (t1 >= -10.0 && t1 <= 10.0) sup = std::max(sup, std::abs(u.value(t1)(0) - y));
    }
    return sup;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

int main() {
    Harness h;

    // ------------------------------------------------------------------
    h.criterion(1, "weight algebra: masses and the equivalence relation", 1.0,
                [](std::string& d) {
        bool ok = true;
        for (double T : {0.5, 1.0, 5.0, 33.0, 160.0})
            ok &= check(std::abs(ergodic_mass(Weight::constant(1.0), T).value - 2.0 * T) <= 1e-12,
                        "m(T,1) != 2T", d);
        ok &= check(std::abs(ergodic_mass(Weight::polynomial(1), 3.0).value - 24.0) <= 1e-9,
                    "m(3, 1+t^2) != 24", d);

        const auto corpus = six_weight_corpus();
        const std::vector<double> horizons = {20.0, 40.0, 80.0, 160.0};
        const size_t n = corpus.size();
        std::vector<std::vector<bool>> eq(n, std::vector<bool>(n));
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < n; ++j)
                eq[i][j] = weights_equivalent(corpus[i], corpus[j], horizons).equivalent;
        for (size_t i = 0; i < n; ++i) {
            ok &= check(eq[i][i], "reflexivity failed", d);
            for (size_t j = 0; j < n; ++j) {
                ok &= check(eq[i][j] == eq[j][i], "symmetry failed", d);
                for (size_t k = 0; k < n; ++k)
                    if (eq[i][j] && eq[j][k]) ok &= check(eq[i][k], "transitivity failed", d);
            }
        }
        return ok;
    });

    // ------------------------------------------------------------------
    h.criterion(2, "pap0 decisions match the closed-form oracles", 10.0, [](std::string& d) {
        bool ok = true;
        const Weight one = Weight::constant(1.0);
        const std::vector<double> horizons = {20.0, 40.0, 80.0, 160.0};
        PapOptions opt;
        opt.sample_step = 0.02;

        const auto dev_decay =
            is_pap0_scalar([](double t) { return std::exp(-std::abs(t)); }, one, horizons, opt);
        ok &= check(dev_decay.decays_to_zero, "decay function rejected", d);
        ok &= check(std::abs(dev_decay.values.back() - (1.0 - std::exp(-160.0)) / 160.0) <= 1e-3,
                    "decay deviation misses (1-e^-T)/T", d);

        const auto dev_sin =
            is_pap0_scalar([](double t) { return std::sin(t); }, one, horizons, opt);
        ok &= check(!dev_sin.decays_to_zero, "sin accepted", d);
        ok &= check(std::abs(dev_sin.values.back() - 2.0 / M_PI) <= 1e-3,
                    "sin deviation misses 2/pi", d);

        const std::vector<CorpusFunction> corpus = {
            {"decay", [](double t) { return std::exp(-std::abs(t)); }},
            {"wave", [](double t) { return std::sin(t); }},
            {"cauchy", [](double t) { return 1.0 / (1.0 + t * t); }},
            {"mix", [](double t) { return std::sin(std::sqrt(2.0) * t) + std::exp(-std::abs(t)); }},
        };
        const auto pairs = std::vector<std::pair<Weight, Weight>>{
            {Weight::constant(1.0), Weight::constant(2.0)},
            {Weight::polynomial(1),
             Weight::expression([](double t) { return 2.0 + t * t; }, "shifted")},
            {Weight::polynomial(0),
             Weight::expression([](double t) { return 2.0 + std::sin(t); }, "wobble")}};
        for (const auto& [w1, w2] : pairs) {
            const auto rep = equivalence_transfers_pap0(w1, w2, corpus, horizons, opt);
            ok &= check(rep.all_agree, "equivalent weights disagree on " + w1.name(), d);
        }
        return ok;
    });

    // ------------------------------------------------------------------
    h.criterion(3, "convolution and composition closure decisions", 30.0, [](std::string& d) {
        bool ok = true;
        const Weight one = Weight::constant(1.0);
        const std::vector<double> horizons = {20.0, 40.0, 80.0, 160.0};

        const TabulatedKernel box =
            TabulatedKernel::sample([](double) { return 1.0; }, 0.0, 1.0, 0.01);
        const TabulatedKernel expk =
            TabulatedKernel::sample([](double s) { return 0.5 * std::exp(-s); }, 0.0, 8.0, 0.01);
        const std::vector<std::function<double(double)>> conforming = {
            [](double t) { return std::exp(-std::abs(t)); },
            [](double t) { return 1.0 / (1.0 + t * t); },
            [](double t) { return std::exp(-2.0 * std::abs(t)); },
        };
        int conv_cases = 0;
        for (const auto& f : conforming) {
            const auto path = SampledPath::sample_scalar(f, -165.0, 165.0, 0.02);
            for (const auto& k : {box, expk}) {
                ok &= check(convolve_and_test(path, k, one, horizons).decays_to_zero,
                            "conforming convolution rejected", d);
                ++conv_cases;
            }
        }
        ok &= check(conv_cases >= 6, "fewer than 6 convolution cases", d);
        for (const auto& cf : {std::function<double(double)>([](double t) { return std::sin(t); }),
                               std::function<double(double)>([](double t) { return std::cos(t); })}) {
            const auto path = SampledPath::sample_scalar(cf, -165.0, 165.0, 0.02);
            ok &= check(!convolve_and_test(path, box, one, horizons).decays_to_zero,
                        "counterexample convolution accepted", d);
        }

        const auto decay_path = SampledPath::sample_scalar(
            [](double t) { return 0.5 * std::exp(-2.0 * std::abs(t)); }, -165.0, 165.0, 0.02);
        const auto cauchy_path = SampledPath::sample_scalar(
            [](double t) { return 0.25 / (1.0 + t * t); }, -165.0, 165.0, 0.02);
        const std::vector<WpapDecomposition> hs = {
            {APSignal::sine(1.0), decay_path, one},
            {APSignal::sine(std::sqrt(2.0)), cauchy_path, one},
        };
        std::vector<ComposedForcing> forcings(3);
        forcings[0].ap_component = [](double, double u) { return u; };
        forcings[0].lipschitz_sup = 1.0;
        forcings[1].ap_component = [](double, double u) { return std::sin(u); };
        forcings[1].lipschitz_sup = 1.0;
        forcings[2].ap_component = [](double, double u) { return u * u; };
        forcings[2].lipschitz_sup = 4.0;
        int comp_cases = 0;
        for (const auto& hd : hs)
            for (const auto& F : forcings) {
                ok &= check(compose_and_test(F, hd, one, horizons).decays_to_zero,
                            "conforming composition rejected", d);
                ++comp_cases;
            }
        ok &= check(comp_cases >= 6, "fewer than 6 composition cases", d);

        ComposedForcing wrong;
        wrong.ap_component = [](double, double u) { return u; };
        wrong.ergodic_component = [](double t, double) { return std::cos(t); };
        wrong.lipschitz_sup = 1.0;
        ok &= check(!compose_and_test(wrong, hs[0], one, horizons).decays_to_zero,
                    "counterexample composition accepted", d);
        return ok;
    });

    // ------------------------------------------------------------------
    h.criterion(4, "dichotomy decay estimates at the stated rates", 60.0, [](std::string& d) {
        bool ok = true;
        Mat split(2, 2);
        split << -1.0, 0.0, 0.0, 1.0;
        EvolutionFamily diag(LinearFamily::constant(split, 2.0), StepperConfig{0.01, 1e-10});
        const APSignal mod = APSignal::sine(1.0) + APSignal::sine(std::sqrt(2.0));
        EvolutionFamily scal(
            LinearFamily::scalar_modulated(Mat::Constant(1, 1, -1.0), mod, 3.0),
            StepperConfig{0.01, 1e-10});

        for (const EvolutionFamily* ef : {&diag, &scal}) {
            const auto dd = dichotomy(*ef);
            const double tol = 0.05;
            const auto f11 =
                fit_estimate(*ef, dd, EstimateTarget::StableAlpha, 0.6, 0.8, 0.1);
            ok &= check(f11.vacuous || f11.decay_rate >= 0.5 * dd.delta * (1 - tol),
                        "stable-alpha rate below delta/2", d);
            const auto f21 =
                fit_estimate(*ef, dd, EstimateTarget::UnstableAlpha, 0.6, 0.8, 0.1);
            ok &= check(f21.vacuous || f21.decay_rate >= dd.delta * (1 - tol),
                        "unstable-alpha rate below delta", d);
            const auto fb1 =
                fit_estimate(*ef, dd, EstimateTarget::UnstableBeta, 0.6, 0.8, 0.1);
            ok &= check(fb1.vacuous || fb1.decay_rate >= dd.delta * (1 - tol),
                        "unstable-beta rate below delta", d);
            const auto fb2 = fit_estimate(*ef, dd, EstimateTarget::StableBeta, 0.6, 0.8, 0.1);
            ok &= check(fb2.vacuous || fb2.decay_rate >= 0.25 * dd.delta * (1 - tol),
                        "stable-beta rate below delta/4", d);

            for (auto [r, s, t] : {std::array<double, 3>{-2.0, 0.7, 1.9},
                                   std::array<double, 3>{-0.3, 2.0, 6.5},
                                   std::array<double, 3>{1.0, 4.4, 12.0}}) {
                const Mat defect =
                    ef->propagator(t, s) * ef->propagator(s, r) - ef->propagator(t, r);
                ok &= check(op_norm(defect) <= 1e-8, "cocycle defect above 1e-8", d);
            }
        }
        return ok;
    });

    // ------------------------------------------------------------------
    h.criterion(5, "fixed point matches the closed form and the integrator", 120.0,
                [](std::string& d) {
        bool ok = true;
        EvolutionFamily ef(LinearFamily::constant(Mat::Constant(1, 1, -1.0)));
        DichotomyData dd = dichotomy(ef);

        auto p1 = make_mild_problem(
            ef, dd, OperatorFamily::identity(1), OperatorFamily::identity(1), nullptr,
            [](double t, const Vec&) { return Vec::Constant(1, std::sin(t)); }, 0.0,
            Weight::constant(1.0), 0.1, 0.6, 0.8);
        const auto sol1 = solve(p1);
        double sup1 = 0.0;
        for (double t = -10.0; t <= 10.0; t += 0.01)
            sup1 = std::max(sup1,
                            std::abs(sol1.u.value(t)(0) - 0.5 * (std::sin(t) - std::cos(t))));
        ok &= check(sup1 <= 1e-6, "closed-form benchmark sup error above 1e-6", d);

        auto p2 = make_mild_problem(
            ef, dd, OperatorFamily::identity(1), OperatorFamily::identity(1), nullptr,
            [](double t, const Vec& w) { return Vec::Constant(1, std::sin(t) + 0.05 * w(0)); },
            0.05, Weight::constant(1.0), 0.1, 0.6, 0.8);
        SolveOptions opt;
        opt.solve_tol = 1e-10;
        const auto sol2 = solve(p2, opt);
        ok &= check(rk4_oracle_sup_diff(sol2.u) <= 1e-4,
                    "integrator benchmark sup error above 1e-4", d);
        ok &= check(sol2.report.observed_ratio <= sol2.report.contraction_estimate * 1.1,
                    "observed ratio above a priori bound", d);

        const GammaEvaluator ge(p2, opt.gamma);
        const double t_ext = opt.t_report + ge.S_stable();
        const SampledPath init = random_path(-t_ext, t_ext, opt.grid_step, 1, 1.0, 2024u);
        const auto sol2b = solve(p2, opt, &init);
        double diff = 0.0;
        for (int i = 0; i < sol2.u.size(); ++i)
            diff = std::max(diff, (sol2.u.at(i) - sol2b.u.at(i)).norm());
        ok &= check(diff <= 10.0 * opt.solve_tol, "initializations disagree", d);
        return ok;
    });

    // ------------------------------------------------------------------
    h.criterion(6, "heat demo: benchmarks, refinement order, ergodic remainder", 600.0,
                [](std::string& d) {
        bool ok = true;
        HeatProblemOptions hopt;

        // single-mode benchmark vs the discrete-mode oracle at n = 31
        const Domain1D d31{1.0, 31};
        auto p31 = build_single_mode_problem(d31, hopt);
        SolveOptions sopt;
        sopt.t_report = 10.0;
        const auto sol31 = solve(p31, sopt);
        const double lam_d = fd_laplacian_eigenvalue(d31, 1);
        const Vec v1 = first_mode(d31);
        const auto mode = [](double lambda, double t) {
            return (std::exp(std::complex<double>(0.0, t)) /
                    (std::complex<double>(0.0, 1.0) - lambda))
                .imag();
        };
        double sup_fd = 0.0;
        for (double t = -10.0; t <= 10.0; t += 0.05)
            sup_fd = std::max(sup_fd, (sol31.u.value(t) - mode(lam_d, t) * v1)
                                          .lpNorm<Eigen::Infinity>());
        ok &= check(sup_fd <= 1e-4, "single-mode benchmark misses the oracle at n=31", d);

        // mesh refinement against the continuum mode: halving h cuts the
        // error by the second-order factor
        const auto continuum_error = [&](int n) {
            const Domain1D dom{1.0, n};
            auto p = build_single_mode_problem(dom, hopt);
            SolveOptions so;
            so.t_report = 6.0;
            const auto sol = solve(p, so);
            const auto xs = dom.nodes();
            double sup = 0.0;
            for (double t = -6.0; t <= 6.0; t += 0.1) {
                const Vec u = sol.u.value(t);
                for (int i = 0; i < dom.n; ++i)
                    sup = std::max(sup, std::abs(u(i) - mode(-M_PI * M_PI, t) *
                                                            std::sin(M_PI * xs[size_t(i)])));
            }
            return sup;
        };
        const double e31 = continuum_error(31);
        const double e63 = continuum_error(63);
        const double factor = e31 / e63;
        ok &= check(factor >= 3.5 && factor <= 4.5,
                    "refinement factor " + std::to_string(factor) + " outside [3.5, 4.5]", d);

        // full quasi-periodic demo with a small nonlinearity scale
        HeatDemoConfig cfg;
        cfg.domain = Domain1D{1.0, 31};
        cfg.coeffs.a = a_gamma_field(1.4142135623730951);
        cfg.coeffs.K_nl = 0.02;
        cfg.coeffs.h_field = [](double t, double x) {
            return (std::sin(t) + 2.0 * std::exp(-std::abs(t))) * (1.0 + 0.3 * x);
        };
        cfg.coeffs.h_field_ap = [](double t, double x) { return std::sin(t) * (1.0 + 0.3 * x); };
        cfg.weight_m = 2;
        cfg.problem.stepper.substep = 0.04;
        cfg.solve.grid_step = 0.1;
        cfg.solve.solve_tol = 1e-8;
        cfg.horizons = {5.0, 10.0, 20.0, 40.0};
        const auto res = run_demo(cfg);
        ok &= check(res.full.report.converged, "demo did not converge", d);
        ok &= check(res.has_ap_reference, "demo missing the AP reference solve", d);
        const auto& dev = res.verification.deviation;
        ok &= check(dev.decays_to_zero, "remainder deviation does not decay", d);
        for (size_t i = 1; i < dev.values.size(); ++i)
            ok &= check(dev.values[i] <= 0.75 * dev.values[i - 1] + 1e-300,
                        "remainder ratio above 0.75", d);
        return ok;
    });

    // ------------------------------------------------------------------
    h.criterion(7, "determinism: reruns are byte-identical", 600.0, [](std::string& d) {
        const fs::path cli = WPAP_CLI_PATH;
        const fs::path cfgs = WPAP_CONFIG_DIR;
        const fs::path base = fs::temp_directory_path() / "wpap_acceptance_det";
        fs::remove_all(base);
        const std::vector<std::pair<std::string, std::string>> runs = {
            {"classify-weight", "classify_weights.cfg"},
            {"test-pap0", "pap0_corpus.cfg"},
            {"verify-dichotomy", "dichotomy_modulated.cfg"},
            {"fit-estimates", "fit_estimates.cfg"},
            {"solve-mild", "solve_scalar_benchmark.cfg"},
            {"heat-demo", "heat_zero.cfg"},
        };
        bool ok = true;
        for (const auto& [sub, cfg] : runs) {
            const fs::path out_a = base / (sub + "_a");
            const fs::path out_b = base / (sub + "_b");
            for (const fs::path& out : {out_a, out_b}) {
                const std::string cmd = cli.string() + " " + sub + " --config " +
                                        (cfgs / cfg).string() + " --out " + out.string() +
                                        " > /dev/null";
                if (std::system(cmd.c_str()) != 0) {
                    ok = check(false, sub + " run failed", d);
                    break;
                }
            }
            if (!ok) break;
            for (const auto& entry : fs::directory_iterator(out_a)) {
                const std::string fname = entry.path().filename().string();
                if (fname == "manifest.json") {
                    auto a = nlohmann::json::parse(slurp(entry.path()));
                    auto b = nlohmann::json::parse(slurp(out_b / fname));
                    a.erase("timings_ms");
                    b.erase("timings_ms");
                    ok &= check(a == b, sub + ": manifests differ beyond timings", d);
                } else {
                    ok &= check(slurp(entry.path()) == slurp(out_b / fname),
                                sub + ": " + fname + " differs between reruns", d);
                }
            }
        }
        return ok;
    });

    std::printf("%s: %d criterion(s) failed\n", h.failures == 0 ? "OK" : "FAILED", h.failures);
    return h.failures;
}
