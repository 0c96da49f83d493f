#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wpap/common.hpp"

namespace wpap {

using Json = nlohmann::json;

/// Full-precision decimal rendering (17 significant digits) for CSV payloads.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& columns)
        : out_(path) {
        if (!out_) throw NumericError("io: cannot open " + path.string() + " for writing");
        for (size_t i = 0; i < columns.size(); ++i)
            out_ << (i ? "," : "") << columns[i];
        out_ << "\n";
    }

    void row(const std::vector<double>& values) {
        for (size_t i = 0; i < values.size(); ++i)
            out_ << (i ? "," : "") << format_double(values[i]);
        out_ << "\n";
    }

    void row(const std::string& tag, const std::vector<double>& values) {
        out_ << tag;
        for (double v : values) out_ << "," << format_double(v);
        out_ << "\n";
    }

private:
    std::ofstream out_;
};

inline void write_json(const std::filesystem::path& path, const Json& j) {
    std::ofstream out(path);
    if (!out) throw NumericError("io: cannot open " + path.string() + " for writing");
    out << j.dump(2) << "\n";
}

/// Per-run provenance record: config fingerprint, versions, produced files,
/// and timings. Timings are the only rerun-variable payload and live under
/// their own key so determinism checks can mask them.
struct RunManifest {
    std::string config_hash;
    std::string version = "0.1.0";
    std::string subcommand;
    unsigned seed = 1;
    std::vector<std::string> files;
    std::map<std::string, double> timings_ms;
};

inline void write_manifest(const std::filesystem::path& dir, RunManifest m) {
    std::sort(m.files.begin(), m.files.end());
    Json j;
    j["config_hash"] = m.config_hash;
    j["version"] = m.version;
    j["subcommand"] = m.subcommand;
    j["seed"] = m.seed;
    j["files"] = m.files;
    Json t = Json::object();
    for (const auto& [k, v] : m.timings_ms) t[k] = v;
    j["timings_ms"] = t;
    write_json(dir / "manifest.json", j);
}

}  // namespace wpap
