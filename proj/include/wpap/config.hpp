#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "wpap/ap_signal.hpp"
#include "wpap/common.hpp"
#include "wpap/expr.hpp"
#include "wpap/linalg.hpp"
#include "wpap/weights.hpp"

namespace wpap {

/// Line-oriented configuration:
///   # comment
///   [kind name]
///   key = value
/// Section kinds declare objects (weights, signals, families); values stay
/// raw strings until a typed reader consumes them.
struct ConfigSection {
    std::string kind;
    std::string name;
    std::vector<std::pair<std::string, std::string>> entries;
    int line = 0;

    std::string label() const { return name.empty() ? kind : kind + " " + name; }
};

struct ConfigDoc {
    std::vector<ConfigSection> sections;
    std::string raw;

    static ConfigDoc parse_string(const std::string& text) {
        ConfigDoc doc;
        doc.raw = text;
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        std::vector<std::string> violations;
        ConfigSection* current = nullptr;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const auto trim = [](std::string s) {
                const auto a = s.find_first_not_of(" \t\r");
                if (a == std::string::npos) return std::string();
                const auto b = s.find_last_not_of(" \t\r");
                return s.substr(a, b - a + 1);
            };
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']') {
                    violations.push_back("line " + std::to_string(lineno) + ": unterminated section heading");
                    continue;
                }
                std::istringstream head(line.substr(1, line.size() - 2));
                ConfigSection sec;
                head >> sec.kind;
                std::string rest;
                std::getline(head, rest);
                sec.name = trim(rest);
                sec.line = lineno;
                doc.sections.push_back(std::move(sec));
                current = &doc.sections.back();
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                violations.push_back("line " + std::to_string(lineno) + ": expected 'key = value'");
                continue;
            }
            if (!current) {
                violations.push_back("line " + std::to_string(lineno) + ": entry outside any section");
                continue;
            }
            current->entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        }
        if (!violations.empty()) throw ConfigError(std::move(violations));
        return doc;
    }

    static ConfigDoc parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError({"cannot open config file: " + path});
        std::ostringstream buf;
        buf << in.rdbuf();
        return parse_string(buf.str());
    }

    const ConfigSection* find(const std::string& kind, const std::string& name = "") const {
        for (const auto& s : sections)
            if (s.kind == kind && (name.empty() || s.name == name)) return &s;
        return nullptr;
    }

    std::vector<const ConfigSection*> all(const std::string& kind) const {
        std::vector<const ConfigSection*> out;
        for (const auto& s : sections)
            if (s.kind == kind) out.push_back(&s);
        return out;
    }
};

/// Typed accessor over one section. Every read marks its key as consumed;
/// unconsumed keys are reported as violations (unknown keys are rejected,
/// not ignored). All violations across a run are collected before throwing.
class SectionReader {
public:
    SectionReader(const ConfigSection& sec, std::vector<std::string>& violations)
        : sec_(sec), violations_(violations) {}

    bool has(const std::string& key) const {
        return std::any_of(sec_.entries.begin(), sec_.entries.end(),
                           [&](const auto& e) { return e.first == key; });
    }

    std::string get_string(const std::string& key, const std::string& fallback = "") {
        consumed_.insert(key);
        for (const auto& [k, v] : sec_.entries)
            if (k == key) return v;
        return fallback;
    }

    double get_double(const std::string& key, double fallback) {
        const std::string raw = get_string(key);
        if (raw.empty()) return fallback;
        try {
            size_t used = 0;
            const double v = std::stod(raw, &used);
            if (used != raw.size()) throw std::invalid_argument(raw);
            return v;
        } catch (const std::exception&) {
            complain(key, "is not a number: '" + raw + "'");
            return fallback;
        }
    }

    double get_positive(const std::string& key, double fallback) {
        const double v = get_double(key, fallback);
        if (!(v > 0.0)) complain(key, "must be positive");
        return v;
    }

    int get_int(const std::string& key, int fallback) {
        return static_cast<int>(get_double(key, fallback));
    }

    std::vector<double> get_list(const std::string& key) {
        const std::string raw = get_string(key);
        std::vector<double> out;
        std::istringstream in(raw);
        double v;
        while (in >> v) out.push_back(v);
        if (!in.eof()) complain(key, "contains non-numeric entries");
        return out;
    }

    /// Horizon schedules must be increasing with ratio >= 1.5.
    std::vector<double> get_horizons(const std::string& key, std::vector<double> fallback) {
        if (!has(key)) {
            consumed_.insert(key);
            return fallback;
        }
        auto v = get_list(key);
        if (v.size() < 3) complain(key, "needs at least 3 horizons");
        for (size_t i = 0; i + 1 < v.size(); ++i)
            if (!(v[i + 1] >= 1.5 * v[i]))
                complain(key, "horizon schedule must grow by a ratio of at least 1.5");
        return v;
    }

    Expr get_expr(const std::string& key, const std::vector<std::string>& vars,
                  const std::string& fallback = "") {
        const std::string raw = get_string(key, fallback);
        if (raw.empty()) return Expr();
        try {
            return Expr::parse(raw, vars);
        } catch (const ConfigError& e) {
            for (const auto& v : e.violations()) complain(key, v);
            return Expr();
        }
    }

    /// Trigonometric-polynomial literal: list of (frequency, re, im) triples.
    APSignal get_signal_terms(const std::string& key) {
        APSignal s(1);
        std::string raw = get_string(key);
        std::replace_if(raw.begin(), raw.end(),
                        [](char c) { return c == '(' || c == ')' || c == ','; }, ' ');
        std::istringstream in(raw);
        double freq, re, im;
        while (in >> freq >> re >> im) s.add_term(freq, std::complex<double>(re, im));
        if (!in.eof()) complain(key, "expects (frequency, re, im) triples");
        return s;
    }

    /// Matrix literal: rows separated by ';' or closing brackets, entries by
    /// spaces or commas; both "-1 0; 0 1" and "[[-1, 0], [0, 1]]" parse.
    Mat get_matrix(const std::string& key) {
        std::string raw = get_string(key);
        std::replace(raw.begin(), raw.end(), ']', ';');
        std::replace_if(raw.begin(), raw.end(),
                        [](char c) { return c == '[' || c == ','; }, ' ');
        std::vector<std::vector<double>> rows;
        std::istringstream lines(raw);
        std::string row;
        while (std::getline(lines, row, ';')) {
            std::istringstream in(row);
            std::vector<double> r;
            double v;
            while (in >> v) r.push_back(v);
            if (!r.empty()) rows.push_back(std::move(r));
        }
        if (rows.empty()) {
            complain(key, "matrix literal is empty");
            return Mat();
        }
        const size_t cols = rows[0].size();
        for (const auto& r : rows)
            if (r.size() != cols) {
                complain(key, "matrix rows have unequal lengths");
                return Mat();
            }
        Mat m(static_cast<int>(rows.size()), static_cast<int>(cols));
        for (size_t i = 0; i < rows.size(); ++i)
            for (size_t j = 0; j < cols; ++j)
                m(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
        return m;
    }

    void complain(const std::string& key, const std::string& what) {
        violations_.push_back("[" + sec_.label() + "] " + key + ": " + what);
    }

    /// Call after all reads: leftover keys are violations.
    void finish() {
        for (const auto& [k, v] : sec_.entries)
            if (!consumed_.count(k))
                violations_.push_back("[" + sec_.label() + "] unknown key '" + k + "'");
    }

private:
    const ConfigSection& sec_;
    std::vector<std::string>& violations_;
    std::set<std::string> consumed_;
};

/// Builds a Weight from a [weight <name>] section.
inline Weight read_weight(const ConfigSection& sec, std::vector<std::string>& violations) {
    SectionReader r(sec, violations);
    const std::string kind = r.get_string("kind", "constant");
    Weight w = Weight::constant(1.0, sec.name);
    if (kind == "constant") {
        w = Weight::constant(r.get_positive("value", 1.0), sec.name);
    } else if (kind == "polynomial") {
        const int m = r.get_int("m", 0);
        if (m < 0)
            r.complain("m", "polynomial exponent must be >= 0");
        else
            w = Weight::polynomial(m, sec.name);
    } else if (kind == "expression") {
        Expr e = r.get_expr("expr", {"t"});
        if (e.valid())
            w = Weight::expression([e](double t) { return e.eval1(t); }, sec.name);
        else
            r.complain("expr", "required for expression weights");
    } else if (kind == "tabulated") {
        Expr e = r.get_expr("expr", {"t"});
        const double lo = r.get_double("range_lo", -40.0);
        const double hi = r.get_double("range_hi", 40.0);
        const double step = r.get_positive("step", 0.05);
        if (e.valid() && hi > lo) {
            std::vector<double> ts, vs;
            for (double t = lo; t <= hi + 1e-12; t += step) {
                ts.push_back(t);
                vs.push_back(e.eval1(t));
            }
            w = Weight::tabulated(std::move(ts), std::move(vs), sec.name);
        } else {
            r.complain("expr", "tabulated weights need expr and range_hi > range_lo");
        }
    } else {
        r.complain("kind", "unknown weight kind '" + kind + "'");
    }
    r.finish();
    return w;
}

}  // namespace wpap
