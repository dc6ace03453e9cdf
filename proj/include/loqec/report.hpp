#pragma once

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "loqec/experiment.hpp"
#include "loqec/manifest.hpp"

namespace loqec {

inline constexpr int kSchemaVersion = 1;

/// Shortest round-trip decimal; locale independent, so reruns are byte-identical.
inline std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

inline std::string format_number(std::int64_t x) { return std::to_string(x); }

inline const std::vector<std::string>& sweep_columns() {
    static const std::vector<std::string> c{"theta_deg", "p_d1_d2", "p_d1_d3", "counts_d1_d2", "counts_d1_d3"};
    return c;
}

inline const std::vector<std::string>& summary_columns() {
    static const std::vector<std::string> c{
        "run",                     "seed",                   "success_probability",    "fidelity_45",
        "fidelity_d1_d2",          "fidelity_d1_d3",         "offset_d1_d2",           "amplitude_d1_d2",
        "phase_deg_d1_d2",         "visibility_d1_d2",       "offset_d1_d3",           "amplitude_d1_d3",
        "phase_deg_d1_d3",         "visibility_d1_d3",       "counts_offset_d1_d2",    "counts_amplitude_d1_d2",
        "counts_phase_deg_d1_d2",  "counts_visibility_d1_d2", "counts_offset_d1_d3",   "counts_amplitude_d1_d3",
        "counts_phase_deg_d1_d3",  "counts_visibility_d1_d3"};
    return c;
}

inline const std::vector<std::string>& hom_columns() {
    static const std::vector<std::string> c{"delay_s", "overlap_v", "p_coincidence"};
    return c;
}

inline const std::vector<std::string>& fit_columns() {
    static const std::vector<std::string> c{"offset", "amplitude", "phase_deg", "visibility"};
    return c;
}

namespace detail {

inline std::string csv_line(const std::vector<std::string>& cells) {
    std::string s;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) s += ',';
        s += cells[i];
    }
    return s + '\n';
}

/// Fit parameters followed by visibility; NaN throughout when the fit is unavailable.
inline std::vector<double> fit_values(const std::optional<MalusFit>& f) {
    if (!f) return std::vector<double>(4, std::nan(""));
    return {f->offset, f->amplitude, f->phase_deg, f->offset > 0.0 ? visibility(*f) : std::nan("")};
}

inline std::vector<double> summary_values(const SweepResult& r) {
    std::vector<double> v{r.success_probability, r.fidelity_45, r.fidelity_d1_d2, r.fidelity_d1_d3};
    for (const auto& f : {std::optional<MalusFit>(r.fit_d1_d2), std::optional<MalusFit>(r.fit_d1_d3), r.counts_fit_d1_d2,
                          r.counts_fit_d1_d3}) {
        const auto x = fit_values(f);
        v.insert(v.end(), x.begin(), x.end());
    }
    return v;
}

inline nlohmann::ordered_json json_number(double x) {
    if (!std::isfinite(x)) return nullptr;
    return x;
}

inline void write_file(const std::filesystem::path& file, const std::string& content) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw UsageError("cannot write " + file.string());
    out << content;
    out.close();
    if (!out) throw UsageError("failed writing " + file.string());
}

} // namespace detail

inline nlohmann::ordered_json config_json(const ExperimentConfig& c) {
    nlohmann::ordered_json j;
    j["qubit_hwp_angle"] = c.qubit_hwp_angle;
    j["wiring"] = to_string(c.wiring);
    j["overlap_v"] = c.overlap_v;
    j["imperfection_eps"] = c.imperfection_eps;
    j["pc_enabled"] = c.pc_enabled;
    j["thetas"] = c.thetas;
    j["pair_rate"] = c.pair_rate;
    j["duration"] = c.duration;
    j["seed"] = c.seed;
    return j;
}

inline std::string sweep_csv(const SweepResult& r) {
    std::string s = detail::csv_line(sweep_columns());
    for (std::size_t i = 0; i < r.thetas.size(); ++i) {
        s += detail::csv_line({format_number(r.thetas[i]), format_number(r.p_d1_d2[i]), format_number(r.p_d1_d3[i]),
                               format_number(r.counts_d1_d2[i]), format_number(r.counts_d1_d3[i])});
    }
    return s;
}

inline std::string summary_csv(const std::vector<std::pair<std::string, SweepResult>>& runs) {
    std::string s = detail::csv_line(summary_columns());
    for (const auto& [name, r] : runs) {
        std::vector<std::string> cells{name, std::to_string(r.seed)};
        for (double x : detail::summary_values(r)) cells.push_back(format_number(x));
        s += detail::csv_line(cells);
    }
    return s;
}

inline std::string sweep_json(const std::string& name, const ExperimentConfig& cfg, const SweepResult& r) {
    nlohmann::ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["config"] = config_json(cfg);
    j["rows"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < r.thetas.size(); ++i) {
        nlohmann::ordered_json row;
        row["theta_deg"] = r.thetas[i];
        row["p_d1_d2"] = r.p_d1_d2[i];
        row["p_d1_d3"] = r.p_d1_d3[i];
        row["counts_d1_d2"] = r.counts_d1_d2[i];
        row["counts_d1_d3"] = r.counts_d1_d3[i];
        j["rows"].push_back(std::move(row));
    }
    nlohmann::ordered_json summary;
    summary["run"] = name;
    summary["seed"] = r.seed;
    const auto values = detail::summary_values(r);
    const auto& cols = summary_columns();
    for (std::size_t i = 0; i < values.size(); ++i) summary[cols[i + 2]] = detail::json_number(values[i]);
    j["summary"] = std::move(summary);
    return j.dump(2) + '\n';
}

inline std::string hom_csv(const std::vector<HomPoint>& pts) {
    std::string s = detail::csv_line(hom_columns());
    for (const auto& p : pts)
        s += detail::csv_line({format_number(p.delay_s), format_number(p.overlap_v), format_number(p.p_coincidence)});
    return s;
}

inline std::string hom_json(const HomScanSpec& spec, const std::vector<HomPoint>& pts) {
    nlohmann::ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["config"] = {{"delays_s", spec.delays_s}, {"sigma_s", spec.sigma_s}};
    j["rows"] = nlohmann::ordered_json::array();
    for (const auto& p : pts) j["rows"].push_back({{"delay_s", p.delay_s}, {"overlap_v", p.overlap_v}, {"p_coincidence", p.p_coincidence}});
    double dip = pts.empty() ? 0.0 : pts.front().p_coincidence;
    for (const auto& p : pts) dip = std::min(dip, p.p_coincidence);
    j["summary"] = {{"points", pts.size()}, {"min_p_coincidence", dip}};
    return j.dump(2) + '\n';
}

inline std::string fit_csv(const MalusFit& f) {
    std::vector<std::string> cells;
    for (double x : detail::fit_values(f)) cells.push_back(format_number(x));
    return detail::csv_line(fit_columns()) + detail::csv_line(cells);
}

inline std::string fit_json(const std::string& input, const std::string& column, const MalusFit& f) {
    nlohmann::ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["config"] = {{"input", input}, {"column", column}};
    j["rows"] = nlohmann::ordered_json::array();
    nlohmann::ordered_json summary;
    const auto values = detail::fit_values(f);
    for (std::size_t i = 0; i < values.size(); ++i) summary[fit_columns()[i]] = detail::json_number(values[i]);
    j["summary"] = std::move(summary);
    return j.dump(2) + '\n';
}

/// theta_deg plus one numeric column from a CSV table with a header row.
struct CurveColumn {
    std::vector<double> thetas;
    std::vector<double> values;
};

inline CurveColumn read_curve_csv(std::istream& in, const std::string& column) {
    auto split = [](const std::string& line) {
        std::vector<std::string> cells;
        std::string cell;
        for (char ch : line) {
            if (ch == ',') {
                cells.push_back(cell);
                cell.clear();
            } else if (ch != '\r') {
                cell += ch;
            }
        }
        cells.push_back(cell);
        return cells;
    };
    auto parse = [](const std::string& s, std::size_t line_no) {
        double x = 0.0;
        const auto r = std::from_chars(s.data(), s.data() + s.size(), x);
        if (r.ec != std::errc() || r.ptr != s.data() + s.size())
            throw ValidationError("line " + std::to_string(line_no) + ": '" + s + "' is not a number");
        return x;
    };

    std::string line;
    if (!std::getline(in, line)) throw ValidationError("input is empty");
    const auto header = split(line);
    auto find = [&](const std::string& name) {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw ValidationError("input has no column '" + name + "'");
    };
    const std::size_t ti = find("theta_deg"), vi = find(column);

    CurveColumn c;
    for (std::size_t no = 2; std::getline(in, line); ++no) {
        if (line.empty() || line == "\r") continue;
        const auto cells = split(line);
        if (cells.size() != header.size()) throw ValidationError("line " + std::to_string(no) + ": wrong number of fields");
        c.thetas.push_back(parse(cells[ti], no));
        c.values.push_back(parse(cells[vi], no));
    }
    return c;
}

} // namespace loqec
