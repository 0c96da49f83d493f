#include <catch2/catch.hpp>
#include <cmath>
#include <complex>

#include "wpap/ap_signal.hpp"

using namespace wpap;

namespace {
const double kSqrt2 = std::sqrt(2.0);

APSignal two_tone() { return APSignal::sine(1.0) + APSignal::sine(kSqrt2); }
}  // namespace

TEST_CASE("evaluation of trigonometric polynomials") {
    CHECK(APSignal::sine(1.0).eval_scalar(M_PI / 2) == Approx(1.0).margin(1e-14));
    CHECK(two_tone().eval_scalar(0.0) == Approx(0.0).margin(1e-14));
    CHECK(APSignal::cosine(3.0, 2.0).eval_scalar(M_PI / 3) == Approx(-2.0).margin(1e-13));
}

TEST_CASE("sum evaluation is pointwise linear") {
    const APSignal a = APSignal::sine(1.0, 0.7);
    const APSignal b = APSignal::cosine(kSqrt2, -1.3) + APSignal::constant(0.4);
    const APSignal s = a + b;
    for (double t : {-7.7, -1.0, 0.0, 0.3, 12.9})
        CHECK(s.eval_scalar(t) == Approx(a.eval_scalar(t) + b.eval_scalar(t)).margin(1e-13));
}

TEST_CASE("term bookkeeping") {
    APSignal s = APSignal::sine(1.0);
    CHECK(s.term_count() == 2);
    // merging the conjugate pair into the existing frequencies doubles sin t
    s.add_term(1.0, std::complex<double>(0.0, -0.5));
    s.add_term(-1.0, std::complex<double>(0.0, 0.5));
    CHECK(s.term_count() == 2);
    CHECK(s.eval_scalar(M_PI / 2) == Approx(2.0).margin(1e-13));

    CHECK(APSignal::sine(2.0).conjugate_symmetric());
    CHECK(APSignal::cosine(2.0).conjugate_symmetric());
    APSignal lopsided(1);
    lopsided.add_term(1.0, std::complex<double>(0.0, 1.0));
    CHECK_FALSE(lopsided.conjugate_symmetric());

    CHECK(APSignal::sine(1.0).sup_norm_bound() == Approx(1.0));
    CHECK(two_tone().lipschitz_bound() == Approx(1.0 + kSqrt2));
}

TEST_CASE("translation certificate for sin t") {
    const auto cert = translation_certificate(APSignal::sine(1.0), 0.1, 7.0, 0.0, 70.0);
    CHECK(cert.passed);
    REQUIRE(cert.found_taus.size() == 10);
    for (double tau : cert.found_taus) {
        const double k = std::round(tau / (2.0 * M_PI));
        CHECK(std::abs(tau - 2.0 * M_PI * k) < 0.11);  // defect < eps forces tau near 2 pi k
    }
    for (double d : cert.window_defects) CHECK(d < 0.1);
}

TEST_CASE("doubling search finds a window for the two-tone signal") {
    const double l = find_window_length(two_tone(), 0.2);
    CHECK(l <= 4096.0);
    const auto cert = translation_certificate(two_tone(), 0.2, l, l, 6.0 * l);
    CHECK(cert.passed);
}

TEST_CASE("decaying functions fail the certificate") {
    const auto f = [](double t) { return Vec::Constant(1, std::exp(-std::abs(t))); };
    const auto cert = translation_certificate(f, 1.0, 0.1, 10.0, 5.0, 55.0);
    CHECK_FALSE(cert.passed);
}

TEST_CASE("coarse tau grids are rejected") {
    CertificateConfig cfg;
    cfg.tau_step = 1.0;  // eps / L = 0.1
    CHECK_THROWS_AS(translation_certificate(APSignal::sine(1.0), 0.1, 7.0, 0.0, 70.0, cfg),
                    PreconditionError);
    CHECK_THROWS_AS(translation_certificate(APSignal::sine(1.0), 0.1, 7.0, 0.0, 20.0),
                    PreconditionError);  // fewer than 5 windows
}

TEST_CASE("bohr mean recovers coefficients with O(1/T) defect") {
    const APSignal s = APSignal::sine(1.0);
    const std::complex<double> want(0.0, -0.5);

    // closed-form finite-horizon oracle: -i/2 (1 - sin(2T) / (2T))
    const auto finite_oracle = [](double T) {
        return std::complex<double>(0.0, -0.5 * (1.0 - std::sin(2.0 * T) / (2.0 * T)));
    };
    double prev_defect = 0.0;
    for (double T : {10.0, 20.0, 40.0}) {
        const std::complex<double> got = bohr_coefficient(s, 1.0, T)(0);
        CHECK(std::abs(got - finite_oracle(T)) < 1e-9);
        const double defect = std::abs(got - want);
        if (prev_defect > 0.0) CHECK(defect < 0.8 * prev_defect);
        prev_defect = defect;
    }
    CHECK(std::abs(s.exact_coefficient(1.0)(0) - want) < 1e-15);
}

TEST_CASE("bohr mean vanishes off the frequency set") {
    const APSignal s = APSignal::sine(1.0);
    // oracle: sum of coefficient * sinc((freq - lambda) T) over the terms
    const auto oracle = [&](double lambda, double T) {
        std::complex<double> acc = 0.0;
        for (const auto& [freq, c] : s.terms()) {
            const double x = (freq - lambda) * T;
            acc += c(0) * (x == 0.0 ? 1.0 : std::sin(x) / x);
        }
        return acc;
    };
    const std::complex<double> got40 = bohr_coefficient(s, kSqrt2, 40.0)(0);
    CHECK(std::abs(got40 - oracle(kSqrt2, 40.0)) < 1e-9);
    CHECK(std::abs(got40) < 0.05);
    CHECK(std::abs(bohr_coefficient(s, kSqrt2, 160.0)(0)) < 0.5 * std::abs(got40));
    CHECK(std::abs(s.exact_coefficient(kSqrt2)(0)) == 0.0);
}

TEST_CASE("bohr mean of a constant is the constant") {
    const APSignal c3 = APSignal::constant(3.0);
    for (double T : {1.0, 7.0, 33.0})
        CHECK(std::abs(bohr_coefficient(c3, 0.0, T)(0) - 3.0) < 1e-12);
}

TEST_CASE("convolution with an integrable kernel preserves the certificate") {
    const TabulatedKernel box = TabulatedKernel::sample([](double) { return 1.0; }, 0.0, 1.0, 0.01);
    CHECK(box.l1_mass() == Approx(1.0).epsilon(0.02));

    const APSignal h = APSignal::sine(1.0);
    const APSignal hc = h.convolved(box);
    // oracle: (sin * box)(t) = cos(t - 1) - cos(t)
    for (double t : {-3.0, 0.0, 0.4, 2.2, 9.1})
        CHECK(hc.eval_scalar(t) == Approx(std::cos(t - 1.0) - std::cos(t)).margin(1e-6));

    const auto cert = translation_certificate(hc, 0.1, 7.0, 0.0, 70.0);
    CHECK(cert.passed);
}
