#include <catch2/catch.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "wpap/config.hpp"
#include "wpap/expr.hpp"
#include "wpap/runner.hpp"

using namespace wpap;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TEST_CASE("expression parsing and precedence") {
    const Expr e = Expr::parse("2 + 3*t^2 - sin(pi/2)", {"t"});
    CHECK(e.eval1(2.0) == Approx(2.0 + 12.0 - 1.0));

    CHECK(Expr::parse("exp(-t^2)", {"t"}).eval1(2.0) == Approx(std::exp(-4.0)));
    CHECK(Expr::parse("-t^2", {"t"}).eval1(3.0) == Approx(-9.0));
    CHECK(Expr::parse("(-t)^2", {"t"}).eval1(3.0) == Approx(9.0));
    CHECK(Expr::parse("2^-2", {"t"}).eval1(0.0) == Approx(0.25));
    CHECK(Expr::parse("2^3^2", {"t"}).eval1(0.0) == Approx(512.0));  // right assoc
    CHECK(Expr::parse("max(t, u) + min(t, u)", {"t", "u"}).eval2(3.0, 5.0) == Approx(8.0));
    CHECK(Expr::parse("abs(-3) + sqrt(9) + erf(0)", {}).operator()({}) == Approx(6.0));

    CHECK_THROWS_AS(Expr::parse("sin(t", {"t"}), ConfigError);
    CHECK_THROWS_AS(Expr::parse("nope(t)", {"t"}), ConfigError);
    CHECK_THROWS_AS(Expr::parse("t + y", {"t"}), ConfigError);
    CHECK_THROWS_AS(Expr::parse("t t", {"t"}), ConfigError);
}

TEST_CASE("document parsing") {
    const auto doc = ConfigDoc::parse_string(
        "# comment\n"
        "[weight one]\n"
        "kind = constant\n"
        "value = 2.5   # trailing comment\n"
        "\n"
        "[pap0]\n"
        "weight = one\n");
    REQUIRE(doc.sections.size() == 2);
    CHECK(doc.sections[0].kind == "weight");
    CHECK(doc.sections[0].name == "one");
    CHECK(doc.sections[0].entries.size() == 2);
    CHECK(doc.find("pap0") != nullptr);
    CHECK(doc.find("weight", "one") != nullptr);
    CHECK(doc.find("weight", "two") == nullptr);

    CHECK_THROWS_AS(ConfigDoc::parse_string("key = value\n"), ConfigError);  // outside section
    CHECK_THROWS_AS(ConfigDoc::parse_string("[weight one\n"), ConfigError);
    CHECK_THROWS_AS(ConfigDoc::parse_string("[s]\njust a line\n"), ConfigError);
}

TEST_CASE("violations are collected and name the key") {
    const auto doc = ConfigDoc::parse_string(
        "[weight w]\n"
        "kind = constant\n"
        "value = -3\n"
        "mystery = 1\n");
    std::vector<std::string> violations;
    read_weight(doc.sections[0], violations);
    REQUIRE(violations.size() == 2);
    CHECK(violations[0].find("value") != std::string::npos);
    CHECK(violations[1].find("mystery") != std::string::npos);
}

TEST_CASE("horizon schedules below the growth floor are rejected") {
    const auto doc = ConfigDoc::parse_string(
        "[pap0]\n"
        "horizons = 10 12 14.4 17.28\n");  // ratio 1.2
    std::vector<std::string> violations;
    SectionReader r(doc.sections[0], violations);
    r.get_horizons("horizons", {});
    CHECK(!violations.empty());
    CHECK(violations[0].find("1.5") != std::string::npos);
}

TEST_CASE("minimal run configs fill defaults") {
    const auto doc = ConfigDoc::parse_string(
        "[pap0]\n"
        "weight = one\n"
        "[weight one]\n"
        "kind = constant\n"
        "[function decay]\n"
        "expr = exp(-abs(t))\n");
    const auto tmp = std::filesystem::temp_directory_path() / "wpap_cfg_min";
    std::filesystem::remove_all(tmp);
    RunOptions opt;
    opt.subcommand = "test-pap0";
    opt.out_dir = tmp.string();
    const auto man = run(doc, opt);
    CHECK(man.files.size() == 2);
    CHECK(std::filesystem::exists(tmp / "decisions.json"));
    CHECK(std::filesystem::exists(tmp / "manifest.json"));
}

TEST_CASE("unknown keys are rejected, not ignored") {
    const auto doc = ConfigDoc::parse_string(
        "[pap0]\n"
        "weight = one\n"
        "typo_key = 3\n"
        "[weight one]\n"
        "kind = constant\n"
        "[function f]\n"
        "expr = sin(t)\n");
    RunOptions opt;
    opt.subcommand = "test-pap0";
    opt.out_dir = (std::filesystem::temp_directory_path() / "wpap_cfg_bad").string();
    try {
        run(doc, opt);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("typo_key") != std::string::npos);
    }
}

TEST_CASE("negative tolerances are rejected by name") {
    const auto doc = ConfigDoc::parse_string(
        "[pap0]\n"
        "weight = one\n"
        "tol = -0.5\n"
        "[weight one]\n"
        "kind = constant\n"
        "[function f]\n"
        "expr = sin(t)\n");
    RunOptions opt;
    opt.subcommand = "test-pap0";
    opt.out_dir = (std::filesystem::temp_directory_path() / "wpap_cfg_tol").string();
    try {
        run(doc, opt);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("tol") != std::string::npos);
        CHECK(std::string(e.what()).find("positive") != std::string::npos);
    }
}

TEST_CASE("reruns reproduce byte-identical payloads") {
    const auto doc = ConfigDoc::parse_string(
        "[family]\n"
        "form = constant\n"
        "A = [[-1]]\n"
        "[problem]\n"
        "K = 0\n"
        "g = sin(t)\n"
        "t_report = 4\n"
        "grid_step = 0.1\n");
    const auto base = std::filesystem::temp_directory_path();
    for (const char* name : {"wpap_det_a", "wpap_det_b"}) {
        RunOptions opt;
        opt.subcommand = "solve-mild";
        opt.out_dir = (base / name).string();
        std::filesystem::remove_all(opt.out_dir);
        run(doc, opt);
    }
    CHECK(slurp(base / "wpap_det_a" / "solution.csv") == slurp(base / "wpap_det_b" / "solution.csv"));
    CHECK(slurp(base / "wpap_det_a" / "report.json") == slurp(base / "wpap_det_b" / "report.json"));
}
