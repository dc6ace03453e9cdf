#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "loqec/experiment.hpp"

namespace loqec {

inline constexpr int kConfigVersion = 1;

enum class OutputFormat { Csv, Json };

inline std::string to_string(OutputFormat f) { return f == OutputFormat::Csv ? "csv" : "json"; }

inline OutputFormat parse_format(const std::string& s) {
    if (s == "csv") return OutputFormat::Csv;
    if (s == "json") return OutputFormat::Json;
    throw ValidationError("unknown output format '" + s + "' (expected csv or json)");
}

struct NamedRun {
    std::string name;
    ExperimentConfig config;
};

struct HomScanSpec {
    std::vector<double> delays_s;
    double sigma_s = 1e-12;
};

struct RunManifest {
    int config_version = kConfigVersion;
    ExperimentConfig experiment;
    /// Empty means a single run named "sweep" using `experiment` as is.
    std::vector<NamedRun> runs;
    std::optional<HomScanSpec> hom_scan;
    OutputFormat format = OutputFormat::Csv;
    std::filesystem::path output_path = ".";

    std::vector<NamedRun> resolved_runs() const {
        if (runs.empty()) return {{"sweep", experiment}};
        return runs;
    }
};

namespace detail {

using nlohmann::json;

inline void require_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
    if (!obj.is_object()) throw ValidationError(where + ": expected an object");
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.contains(key)) throw ValidationError("unknown key '" + (where.empty() ? key : where + "." + key) + "'");
    }
}

inline std::string join(const std::string& where, const std::string& key) { return where.empty() ? key : where + "." + key; }

inline double number_at(const json& obj, const std::string& where, const std::string& key) {
    const auto& v = obj.at(key);
    if (!v.is_number()) throw ValidationError(join(where, key) + ": expected a number");
    return v.get<double>();
}

inline std::vector<double> numbers_at(const json& obj, const std::string& where, const std::string& key) {
    const auto& v = obj.at(key);
    if (!v.is_array()) throw ValidationError(join(where, key) + ": expected an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number()) throw ValidationError(join(where, key) + ": expected an array of numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

/// Applies whichever experiment fields are present in `obj` on top of `cfg`.
inline void apply_experiment(const json& obj, const std::string& where, ExperimentConfig& cfg) {
    require_keys(obj, where, {"qubit_hwp_angle", "wiring", "overlap_v", "imperfection_eps", "pc_enabled", "thetas",
                              "pair_rate", "duration", "seed"});
    if (obj.contains("qubit_hwp_angle")) cfg.qubit_hwp_angle = number_at(obj, where, "qubit_hwp_angle");
    if (obj.contains("wiring")) {
        if (!obj["wiring"].is_string()) throw ValidationError(join(where, "wiring") + ": expected \"A:C/B:D\" or \"A:D/B:C\"");
        try {
            cfg.wiring = parse_wiring(obj["wiring"].get<std::string>());
        } catch (const ValidationError& e) {
            throw ValidationError(join(where, "wiring") + ": " + e.what());
        }
    }
    if (obj.contains("overlap_v")) cfg.overlap_v = number_at(obj, where, "overlap_v");
    if (obj.contains("imperfection_eps")) cfg.imperfection_eps = number_at(obj, where, "imperfection_eps");
    if (obj.contains("pc_enabled")) {
        if (!obj["pc_enabled"].is_boolean()) throw ValidationError(join(where, "pc_enabled") + ": expected true or false");
        cfg.pc_enabled = obj["pc_enabled"].get<bool>();
    }
    if (obj.contains("thetas")) cfg.thetas = numbers_at(obj, where, "thetas");
    if (obj.contains("pair_rate")) cfg.pair_rate = number_at(obj, where, "pair_rate");
    if (obj.contains("duration")) cfg.duration = number_at(obj, where, "duration");
    if (obj.contains("seed")) {
        if (!obj["seed"].is_number_unsigned()) throw ValidationError(join(where, "seed") + ": expected a non-negative integer");
        cfg.seed = obj["seed"].get<std::uint64_t>();
    }
    try {
        cfg.validate();
    } catch (const ValidationError& e) {
        throw ValidationError((where.empty() ? std::string("experiment") : where) + ": " + e.what());
    }
}

} // namespace detail

inline RunManifest parse_manifest(const nlohmann::json& doc) {
    using detail::json;
    detail::require_keys(doc, "", {"config_version", "experiment", "runs", "hom_scan", "outputs"});
    if (!doc.contains("config_version")) throw ValidationError("missing key 'config_version'");
    if (!doc["config_version"].is_number_integer() || doc["config_version"].get<int>() != kConfigVersion)
        throw ValidationError("config_version: unsupported value " + doc["config_version"].dump() + " (expected " +
                              std::to_string(kConfigVersion) + ")");

    RunManifest m;
    if (doc.contains("experiment")) detail::apply_experiment(doc["experiment"], "experiment", m.experiment);

    if (doc.contains("runs")) {
        if (!doc["runs"].is_array()) throw ValidationError("runs: expected an array");
        std::set<std::string> names;
        for (std::size_t i = 0; i < doc["runs"].size(); ++i) {
            const auto& r = doc["runs"][i];
            const std::string where = "runs[" + std::to_string(i) + "]";
            detail::require_keys(r, where, {"name", "experiment"});
            if (!r.contains("name") || !r["name"].is_string()) throw ValidationError(where + ".name: expected a string");
            NamedRun run{r["name"].get<std::string>(), m.experiment};
            if (run.name.empty() || run.name.find_first_of("/\\") != std::string::npos)
                throw ValidationError(where + ".name: must be a non-empty file stem");
            if (!names.insert(run.name).second) throw ValidationError(where + ".name: duplicate run name '" + run.name + "'");
            if (r.contains("experiment")) detail::apply_experiment(r["experiment"], where + ".experiment", run.config);
            m.runs.push_back(std::move(run));
        }
    }

    if (doc.contains("hom_scan")) {
        const auto& h = doc["hom_scan"];
        detail::require_keys(h, "hom_scan", {"delays_s", "sigma_s"});
        HomScanSpec spec;
        if (h.contains("delays_s")) spec.delays_s = detail::numbers_at(h, "hom_scan", "delays_s");
        if (h.contains("sigma_s")) spec.sigma_s = detail::number_at(h, "hom_scan", "sigma_s");
        if (!(spec.sigma_s > 0.0)) throw ValidationError("hom_scan.sigma_s: must be positive");
        m.hom_scan = std::move(spec);
    }

    if (doc.contains("outputs")) {
        const auto& o = doc["outputs"];
        detail::require_keys(o, "outputs", {"format", "path"});
        if (o.contains("format")) {
            if (!o["format"].is_string()) throw ValidationError("outputs.format: expected \"csv\" or \"json\"");
            try {
                m.format = parse_format(o["format"].get<std::string>());
            } catch (const ValidationError& e) {
                throw ValidationError(std::string("outputs.format: ") + e.what());
            }
        }
        if (o.contains("path")) {
            if (!o["path"].is_string()) throw ValidationError("outputs.path: expected a string");
            m.output_path = o["path"].get<std::string>();
        }
    }
    return m;
}

inline RunManifest parse_manifest(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(std::string("manifest is not valid JSON: ") + e.what());
    }
    return parse_manifest(doc);
}

inline RunManifest load_manifest(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw UsageError("cannot read manifest " + file.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_manifest(buf.str());
}

} // namespace loqec
