#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include "wpap/config.hpp"
#include "wpap/heat.hpp"
#include "wpap/io.hpp"
#include "wpap/mild.hpp"
#include "wpap/pap.hpp"

namespace wpap {

struct RunOptions {
    std::string subcommand;
    std::string out_dir;
    unsigned seed = 0;
    bool seed_set = false;
    bool override_gate = false;
};

namespace rundetail {

class Timer {
public:
    Timer(RunManifest& m, std::string key) : m_(m), key_(std::move(key)), t0_(clock_t::now()) {}
    ~Timer() {
        m_.timings_ms[key_] =
            std::chrono::duration<double, std::milli>(clock_t::now() - t0_).count();
    }

private:
    using clock_t = std::chrono::steady_clock;
    RunManifest& m_;
    std::string key_;
    clock_t::time_point t0_;
};

inline std::map<std::string, Weight> read_weights(const ConfigDoc& doc,
                                                  std::vector<std::string>& violations) {
    std::map<std::string, Weight> out;
    for (const ConfigSection* sec : doc.all("weight")) {
        if (sec->name.empty()) {
            violations.push_back("[weight] sections must be named");
            continue;
        }
        out.emplace(sec->name, read_weight(*sec, violations));
    }
    return out;
}

inline Weight resolve_weight(const std::string& name, const std::map<std::string, Weight>& pool,
                             std::vector<std::string>& violations) {
    const auto it = pool.find(name);
    if (it != pool.end()) return it->second;
    violations.push_back("unknown weight '" + name + "' (declare a [weight " + name + "] section)");
    return Weight::constant(1.0);
}

/// Builds the evolution family of a [family] section. Forms: constant,
/// scalar_modulated (trig-polynomial d), expression_scaled (tabulated d(t)A).
inline EvolutionFamily read_family(const ConfigDoc& doc, std::vector<std::string>& violations) {
    const ConfigSection* sec = doc.find("family");
    if (!sec) {
        violations.push_back("missing [family] section");
        throw ConfigError(std::move(violations));
    }
    SectionReader r(*sec, violations);
    const std::string form = r.get_string("form", "constant");
    const Mat a = r.get_matrix("A");
    const double omega = r.get_double("omega", 0.0);
    StepperConfig stepper;
    stepper.substep = r.get_positive("substep", 0.01);

    const auto finish_and_throw_if_bad = [&] {
        r.finish();
        if (!violations.empty()) throw ConfigError(violations);
    };

    if (a.size() == 0) {
        violations.push_back("[family] A: matrix literal required");
        throw ConfigError(std::move(violations));
    }
    if (form == "constant") {
        finish_and_throw_if_bad();
        return EvolutionFamily(LinearFamily::constant(a, omega), stepper);
    }
    if (form == "scalar_modulated") {
        APSignal d = r.get_signal_terms("d_terms");
        const double offset = r.get_double("d_offset", 0.0);
        finish_and_throw_if_bad();
        return EvolutionFamily(LinearFamily::scalar_modulated(a, d, offset, omega), stepper);
    }
    if (form == "expression_scaled") {
        Expr e = r.get_expr("scale_expr", {"t"});
        if (!e.valid()) r.complain("scale_expr", "required for expression_scaled families");
        finish_and_throw_if_bad();
        return EvolutionFamily(
            LinearFamily::tabulated([e, a](double t) { return Mat(e.eval1(t) * a); },
                                    static_cast<int>(a.rows()), omega),
            stepper);
    }
    violations.push_back("[family] form: unknown family form '" + form + "'");
    throw ConfigError(std::move(violations));
}

inline Json deviation_json(const ErgodicDeviation& dev) {
    Json j;
    j["horizons"] = dev.horizons;
    j["values"] = dev.values;
    j["decays_to_zero"] = dev.decays_to_zero;
    j["fitted_rate"] = dev.fitted_rate;
    return j;
}

inline Json fit_json(const EstimateFit& fit) {
    static const std::map<EstimateTarget, std::string> names = {
        {EstimateTarget::StableAlpha, "stable-alpha"},
        {EstimateTarget::UnstableAlpha, "unstable-alpha"},
        {EstimateTarget::UnstableBeta, "unstable-beta"},
        {EstimateTarget::StableBeta, "stable-beta"}};
    Json j;
    j["target"] = names.at(fit.target);
    j["prefactor"] = fit.prefactor;
    j["decay_rate"] = fit.vacuous ? Json("vacuous") : Json(fit.decay_rate);
    j["power_exponent"] = fit.power_exponent;
    j["required_rate"] = fit.required_rate;
    j["rate_ok"] = fit.rate_ok;
    j["vacuous"] = fit.vacuous;
    return j;
}

inline Json report_json(const FixedPointReport& rep) {
    Json j;
    j["iterations"] = rep.iterations;
    j["residuals"] = rep.residuals;
    j["contraction_estimate"] = rep.contraction_estimate;
    j["observed_ratio"] = rep.observed_ratio;
    j["a_posteriori_error"] =
        std::isfinite(rep.a_posteriori_error) ? Json(rep.a_posteriori_error) : Json("unbounded");
    j["converged"] = rep.converged;
    j["gate_overridden"] = rep.gate_overridden;
    j["varpi"] = rep.varpi;
    j["lipschitz_K"] = rep.lipschitz_K;
    j["delta"] = rep.delta;
    j["alpha_norm_spread"] = rep.alpha_norm_spread;
    j["constants"] = {{"c_alpha", rep.constants.c_alpha},
                      {"m_alpha", rep.constants.m_alpha},
                      {"m_alpha_beta", rep.constants.m_alpha_beta},
                      {"n_alpha_mu", rep.constants.n_alpha_mu},
                      {"k_alpha", rep.constants.k_alpha}};
    return j;
}

// ---------------------------------------------------------------------------
// subcommands

inline void run_classify_weight(const ConfigDoc& doc, const std::filesystem::path& out,
                                RunManifest& man) {
    std::vector<std::string> violations;
    WeightClassOptions opt;
    std::vector<double> horizons = {20.0, 40.0, 80.0, 160.0};
    std::vector<double> taus = {1.0, 2.5, 7.0};
    if (const ConfigSection* sec = doc.find("classify")) {
        SectionReader r(*sec, violations);
        horizons = r.get_horizons("horizons", horizons);
        taus = r.get_list("taus").empty() ? taus : r.get_list("taus");
        r.finish();
    }
    const auto weights = read_weights(doc, violations);
    if (weights.empty()) violations.push_back("classify-weight: no [weight] sections declared");
    if (!violations.empty()) throw ConfigError(std::move(violations));

    Json verdicts = Json::array();
    CsvWriter masses(out / "masses.csv", {"weight", "T", "mass"});
    for (const auto& [name, w] : weights) {
        Timer t(man, "classify:" + name);
        const WeightClass c = classify_weight(w, horizons, taus, opt);
        Json j;
        j["weight_id"] = name;
        j["in_U_infinity"] = c.in_U_infinity;
        j["in_U_B"] = c.in_U_B;
        j["translation_invariant"] = c.translation_invariant;
        j["evidence"] = {{"horizons", c.horizons},
                         {"masses", c.masses},
                         {"window_sups", c.window_sups},
                         {"late_inf", c.late_inf},
                         {"taus", c.taus},
                         {"max_ratio_translate", c.max_ratio_translate},
                         {"max_ratio_mass", c.max_ratio_mass}};
        verdicts.push_back(j);
        for (size_t i = 0; i < c.horizons.size(); ++i)
            masses.row(name, {c.horizons[i], c.masses[i]});
    }
    write_json(out / "verdicts.json", verdicts);
    man.files = {"verdicts.json", "masses.csv"};
}

inline void run_test_pap0(const ConfigDoc& doc, const std::filesystem::path& out,
                          RunManifest& man) {
    std::vector<std::string> violations;
    const auto weights = read_weights(doc, violations);
    const ConfigSection* sec = doc.find("pap0");
    if (!sec) violations.push_back("missing [pap0] section");
    PapOptions popt;
    std::vector<double> horizons = {20.0, 40.0, 80.0, 160.0};
    Weight w = Weight::constant(1.0);
    if (sec) {
        SectionReader r(*sec, violations);
        w = resolve_weight(r.get_string("weight", "one"), weights, violations);
        horizons = r.get_horizons("horizons", horizons);
        popt.tol = r.get_positive("tol", popt.tol);
        popt.decay_threshold = r.get_positive("decay_threshold", popt.decay_threshold);
        popt.sample_step = r.get_positive("step", popt.sample_step);
        r.finish();
    }
    struct Fn {
        std::string name;
        Expr expr;
    };
    std::vector<Fn> fns;
    for (const ConfigSection* fsec : doc.all("function")) {
        SectionReader r(*fsec, violations);
        fns.push_back({fsec->name, r.get_expr("expr", {"t"})});
        r.finish();
    }
    if (fns.empty()) violations.push_back("test-pap0: no [function] sections declared");
    if (!violations.empty()) throw ConfigError(std::move(violations));

    CsvWriter dev_csv(out / "deviations.csv", {"function", "T", "value"});
    Json decisions = Json::array();
    for (const auto& fn : fns) {
        Timer t(man, "pap0:" + fn.name);
        const Expr e = fn.expr;
        const auto dev =
            is_pap0_scalar([e](double t) { return e.eval1(t); }, w, horizons, popt);
        for (size_t i = 0; i < dev.horizons.size(); ++i)
            dev_csv.row(fn.name, {dev.horizons[i], dev.values[i]});
        Json j = deviation_json(dev);
        j["function"] = fn.name;
        decisions.push_back(j);
    }
    write_json(out / "decisions.json", decisions);
    man.files = {"deviations.csv", "decisions.json"};
}

inline void run_verify_dichotomy(const ConfigDoc& doc, const std::filesystem::path& out,
                                 RunManifest& man) {
    std::vector<std::string> violations;
    EvolutionFamily ef = read_family(doc, violations);
    DichotomyOptions dopt;
    if (const ConfigSection* sec = doc.find("dichotomy")) {
        SectionReader r(*sec, violations);
        dopt.fit_lo = r.get_positive("fit_lo", dopt.fit_lo);
        dopt.fit_hi = r.get_positive("fit_hi", dopt.fit_hi);
        dopt.fit_samples = r.get_int("fit_samples", dopt.fit_samples);
        r.finish();
    }
    if (!violations.empty()) throw ConfigError(std::move(violations));

    DichotomyData dd;
    {
        Timer t(man, "dichotomy");
        dd = dichotomy(ef, dopt);
    }
    Json j;
    j["delta"] = dd.delta;
    j["N"] = dd.N;
    j["stable_rate"] = dd.has_stable ? Json(dd.stable_rate) : Json("vacuous");
    j["unstable_rate"] = dd.has_unstable ? Json(dd.unstable_rate) : Json("vacuous");
    j["commute_defect"] = dd.commute_defect;
    std::vector<std::vector<double>> p_rows;
    for (int i = 0; i < dd.P.rows(); ++i)
        p_rows.emplace_back(dd.P.row(i).begin(), dd.P.row(i).end());
    j["P"] = p_rows;
    write_json(out / "dichotomy.json", j);

    CsvWriter decay(out / "decay.csv", {"base_s", "tau", "stable_norm", "unstable_norm"});
    for (double s : dopt.base_times)
        for (double tau : logspace(dopt.fit_lo, dopt.fit_hi, dopt.fit_samples))
            decay.row({s, tau, stable_decay_norm(ef, dd, s, tau),
                       ef.family().commuting() ? unstable_decay_norm(ef, dd, s, tau) : 0.0});
    man.files = {"dichotomy.json", "decay.csv"};
}

inline void run_fit_estimates(const ConfigDoc& doc, const std::filesystem::path& out,
                              RunManifest& man) {
    std::vector<std::string> violations;
    EvolutionFamily ef = read_family(doc, violations);
    double alpha = 0.6, beta = 0.8, mu = 0.1;
    std::vector<std::string> target_names = {"stable-alpha", "unstable-alpha", "unstable-beta",
                                             "stable-beta"};
    if (const ConfigSection* sec = doc.find("estimates")) {
        SectionReader r(*sec, violations);
        alpha = r.get_positive("alpha", alpha);
        beta = r.get_positive("beta", beta);
        mu = r.get_double("mu", mu);
        const std::string t = r.get_string("targets");
        if (!t.empty()) {
            target_names.clear();
            std::istringstream in(t);
            std::string one;
            while (in >> one) target_names.push_back(one);
        }
        r.finish();
    }
    static const std::map<std::string, EstimateTarget> by_name = {
        {"stable-alpha", EstimateTarget::StableAlpha},
        {"unstable-alpha", EstimateTarget::UnstableAlpha},
        {"unstable-beta", EstimateTarget::UnstableBeta},
        {"stable-beta", EstimateTarget::StableBeta}};
    std::vector<EstimateTarget> targets;
    for (const auto& n : target_names) {
        const auto it = by_name.find(n);
        if (it == by_name.end())
            violations.push_back("[estimates] targets: unknown target '" + n + "'");
        else
            targets.push_back(it->second);
    }
    if (!violations.empty()) throw ConfigError(std::move(violations));

    DichotomyData dd = dichotomy(ef);
    Json fits = Json::array();
    CsvWriter curves(out / "curves.csv", {"target", "tau", "lhs"});
    for (size_t i = 0; i < targets.size(); ++i) {
        Timer t(man, "fit:" + target_names[i]);
        const auto fit = fit_estimate(ef, dd, targets[i], alpha, beta, mu);
        fits.push_back(fit_json(fit));
        for (const auto& [tau, lhs] : fit.samples) curves.row(target_names[i], {tau, lhs});
    }
    Json j;
    j["delta"] = dd.delta;
    j["fits"] = fits;
    write_json(out / "estimates.json", j);
    man.files = {"estimates.json", "curves.csv"};
}

/// Shared assembly of a mild problem from [family] + [problem] sections.
inline MildProblem read_mild_problem(const ConfigDoc& doc, SolveOptions& sopt,
                                     std::vector<std::string>& violations) {
    EvolutionFamily ef = read_family(doc, violations);
    const int n = ef.dim();
    const ConfigSection* sec = doc.find("problem");
    if (!sec) {
        violations.push_back("missing [problem] section");
        throw ConfigError(std::move(violations));
    }
    const auto weights = read_weights(doc, violations);
    SectionReader r(*sec, violations);

    Weight w = Weight::constant(1.0);
    if (r.has("weight")) w = resolve_weight(r.get_string("weight"), weights, violations);
    const double mu = r.get_double("mu", 0.1);
    const double alpha = r.get_positive("alpha", 0.6);
    const double beta = r.get_positive("beta", 0.8);
    const double K = r.get_double("K", 0.0);

    OperatorFamily B = OperatorFamily::identity(n);
    OperatorFamily C = OperatorFamily::identity(n);
    if (r.has("B")) B = OperatorFamily::constant(r.get_matrix("B"));
    if (r.has("C")) C = OperatorFamily::constant(r.get_matrix("C"));
    if (r.has("B_terms")) {
        B.scalar = r.get_signal_terms("B_terms");
        B.offset = r.get_double("B_offset", 0.0);
    }
    if (r.has("C_terms")) {
        C.scalar = r.get_signal_terms("C_terms");
        C.offset = r.get_double("C_offset", 0.0);
    }

    std::vector<std::string> vars = {"t"};
    if (n == 1) {
        vars.push_back("u");
    } else {
        for (int i = 1; i <= n; ++i) vars.push_back("u" + std::to_string(i));
    }
    const auto read_forcing = [&](const std::string& key) -> Forcing {
        std::vector<Expr> comps;
        bool any = false;
        if (n == 1) {
            if (r.has(key)) {
                comps.push_back(r.get_expr(key, vars));
                any = true;
            }
        } else {
            for (int i = 1; i <= n; ++i) {
                const std::string k = key + std::to_string(i);
                if (r.has(k)) {
                    comps.push_back(r.get_expr(k, vars));
                    any = true;
                } else {
                    comps.push_back(Expr());
                }
            }
        }
        if (!any) return nullptr;
        return [comps, n](double t, const Vec& u) {
            std::vector<double> args;
            args.reserve(static_cast<size_t>(n) + 1);
            args.push_back(t);
            for (int i = 0; i < n; ++i) args.push_back(u(i));
            Vec out = Vec::Zero(n);
            for (size_t i = 0; i < comps.size(); ++i)
                if (comps[i].valid()) out(static_cast<int>(i)) = comps[i](args);
            return out;
        };
    };
    Forcing f = read_forcing("f");
    Forcing g = read_forcing("g");

    sopt.t_report = r.get_positive("t_report", sopt.t_report);
    sopt.grid_step = r.get_positive("grid_step", sopt.grid_step);
    sopt.solve_tol = r.get_positive("solve_tol", sopt.solve_tol);
    sopt.max_iters = r.get_int("max_iters", sopt.max_iters);
    sopt.gamma.quad_tol = r.get_positive("quad_tol", sopt.gamma.quad_tol);
    r.finish();
    if (!violations.empty()) throw ConfigError(violations);

    DichotomyData dd = dichotomy(ef);
    return make_mild_problem(std::move(ef), std::move(dd), std::move(B), std::move(C),
                             std::move(f), std::move(g), K, std::move(w), mu, alpha, beta);
}

inline void run_solve_mild(const ConfigDoc& doc, const std::filesystem::path& out,
                           RunManifest& man, bool override_gate) {
    std::vector<std::string> violations;
    SolveOptions sopt;
    MildProblem p = read_mild_problem(doc, sopt, violations);
    sopt.override_contraction_gate = override_gate;

    bool want_certificate = false;
    double cert_eps = 1e-2, cert_window = 7.0;
    if (const ConfigSection* vsec = doc.find("verify")) {
        SectionReader r(*vsec, violations);
        want_certificate = r.get_string("mode", "certificate") == "certificate";
        cert_eps = r.get_positive("eps", cert_eps);
        cert_window = r.get_positive("window", cert_window);
        r.finish();
        if (!violations.empty()) throw ConfigError(violations);
    }

    MildSolution sol;
    {
        Timer t(man, "solve");
        sol = solve(p, sopt);
    }
    CsvWriter csv(out / "solution.csv", [&] {
        std::vector<std::string> cols = {"t"};
        for (int i = 1; i <= p.family.dim(); ++i) cols.push_back("u" + std::to_string(i));
        return cols;
    }());
    for (int i = 0; i < sol.u.size(); ++i) {
        const double t = sol.u.time_at(i);
        if (t < -sopt.t_report - 1e-9 || t > sopt.t_report + 1e-9) continue;
        std::vector<double> row = {t};
        for (int k = 0; k < sol.u.dim; ++k) row.push_back(sol.u.at(i)(k));
        csv.row(row);
    }
    Json rep = report_json(sol.report);
    if (want_certificate) {
        Timer t(man, "verify");
        const auto ver = verify_wpap(sol.u, p, nullptr, {}, {}, cert_eps, cert_window);
        Json c;
        c["passed"] = ver.certificate.passed;
        c["epsilon"] = ver.certificate.epsilon;
        c["window_length"] = ver.certificate.window_length;
        c["found_taus"] = ver.certificate.found_taus;
        c["window_defects"] = ver.certificate.window_defects;
        rep["wpap_certificate"] = c;
    }
    write_json(out / "report.json", rep);
    man.files = {"solution.csv", "report.json"};
}

inline void run_heat_demo(const ConfigDoc& doc, const std::filesystem::path& out,
                          RunManifest& man, bool override_gate) {
    std::vector<std::string> violations;
    const ConfigSection* sec = doc.find("heat");
    if (!sec) violations.push_back("missing [heat] section");
    if (!violations.empty()) throw ConfigError(std::move(violations));
    SectionReader r(*sec, violations);

    HeatDemoConfig cfg;
    cfg.domain.n = r.get_int("n", 31);
    cfg.domain.length = r.get_positive("length", 1.0);
    cfg.weight_m = r.get_int("m", 2);
    const double gamma = r.get_double("gamma", 1.4142135623730951);
    cfg.coeffs.K_nl = r.get_double("K", 0.0);
    cfg.problem.mu = r.get_double("mu", 0.1);
    cfg.problem.alpha = r.get_positive("alpha", 0.6);
    cfg.problem.beta = r.get_positive("beta", 0.8);
    cfg.problem.stepper.substep = r.get_positive("substep", 0.02);
    cfg.solve.t_report = r.get_positive("t_report", 40.0);
    cfg.solve.grid_step = r.get_positive("grid_step", 0.05);
    cfg.solve.solve_tol = r.get_positive("solve_tol", 1e-8);
    cfg.solve.override_contraction_gate = override_gate;
    cfg.horizons = r.get_horizons("horizons", {5.0, 10.0, 20.0, 40.0});
    const int field_stride = std::max(1, r.get_int("field_stride", 10));

    const auto read_field = [&](const std::string& key) -> Field {
        if (!r.has(key)) return nullptr;
        const Expr e = r.get_expr(key, {"t", "x"});
        if (!e.valid()) return nullptr;
        return [e](double t, double x) { return e.eval2(t, x); };
    };
    cfg.coeffs.a = read_field("a");
    if (!cfg.coeffs.a) cfg.coeffs.a = a_gamma_field(gamma);
    cfg.coeffs.b = read_field("b");
    cfg.coeffs.c = read_field("c");
    cfg.coeffs.e_field = read_field("e");
    cfg.coeffs.h_field = read_field("h");
    cfg.coeffs.e_field_ap = read_field("e_ap");
    cfg.coeffs.h_field_ap = read_field("h_ap");
    r.finish();
    if (!violations.empty()) throw ConfigError(std::move(violations));

    HeatDemoResult res;
    {
        Timer t(man, "heat-demo");
        res = run_demo(cfg);
    }

    CsvWriter field(out / "field.csv", {"t", "x", "value"});
    const auto xs = cfg.domain.nodes();
    for (int i = 0; i < res.full.u.size(); i += field_stride) {
        const double t = res.full.u.time_at(i);
        if (std::abs(t) > cfg.solve.t_report + 1e-9) continue;
        for (int k = 0; k < res.full.u.dim; ++k)
            field.row({t, xs[static_cast<size_t>(k)], res.full.u.at(i)(k)});
    }

    Json j;
    j["converged"] = res.full.report.converged;
    j["contraction"] = res.contraction;
    j["report"] = report_json(res.full.report);
    j["dichotomy"] = {{"delta", res.dd.delta}, {"N", res.dd.N}};
    j["hypotheses"] = {{"inf_a", res.hypotheses.inf_a},
                       {"hoelder_L", res.hypotheses.hoelder_L},
                       {"ok", res.hypotheses.ok}};
    j["has_ap_reference"] = res.has_ap_reference;
    if (res.has_ap_reference) {
        j["remainder_deviation"] = deviation_json(res.verification.deviation);
        j["remainder_deviation_flat"] = deviation_json(res.deviation_rho0);
        CsvWriter dev(out / "deviation.csv", {"T", "value_weighted", "value_flat"});
        for (size_t i = 0; i < res.verification.deviation.horizons.size(); ++i)
            dev.row({res.verification.deviation.horizons[i],
                     res.verification.deviation.values[i], res.deviation_rho0.values[i]});
        man.files = {"field.csv", "deviation.csv", "report.json"};
    } else {
        j["certificate_passed"] = res.verification.certificate.passed;
        man.files = {"field.csv", "report.json"};
    }
    write_json(out / "report.json", j);
}

}  // namespace rundetail

/// Dispatches one subcommand run and writes the manifest last. Reruns with an
/// identical config produce byte-identical payloads (timings excepted).
inline RunManifest run(const ConfigDoc& doc, const RunOptions& opt) {
    namespace fs = std::filesystem;
    if (opt.out_dir.empty()) throw ConfigError({"output directory required"});
    fs::create_directories(opt.out_dir);
    const fs::path out(opt.out_dir);

    RunManifest man;
    man.subcommand = opt.subcommand;
    char hash[20];
    std::snprintf(hash, sizeof(hash), "%016llx",
                  static_cast<unsigned long long>(fnv1a(doc.raw)));
    man.config_hash = hash;

    unsigned seed = 1;
    if (const ConfigSection* sec = doc.find("run")) {
        std::vector<std::string> violations;
        SectionReader r(*sec, violations);
        seed = static_cast<unsigned>(r.get_int("seed", 1));
        r.get_string("subcommand");  // informational; the CLI argument decides
        r.finish();
        if (!violations.empty()) throw ConfigError(std::move(violations));
    }
    if (opt.seed_set) seed = opt.seed;
    man.seed = seed;

    if (opt.subcommand == "classify-weight")
        rundetail::run_classify_weight(doc, out, man);
    else if (opt.subcommand == "test-pap0")
        rundetail::run_test_pap0(doc, out, man);
    else if (opt.subcommand == "verify-dichotomy")
        rundetail::run_verify_dichotomy(doc, out, man);
    else if (opt.subcommand == "fit-estimates")
        rundetail::run_fit_estimates(doc, out, man);
    else if (opt.subcommand == "solve-mild")
        rundetail::run_solve_mild(doc, out, man, opt.override_gate);
    else if (opt.subcommand == "heat-demo")
        rundetail::run_heat_demo(doc, out, man, opt.override_gate);
    else
        throw ConfigError({"unknown subcommand '" + opt.subcommand + "'"});

    write_manifest(out, man);
    return man;
}

}  // namespace wpap
