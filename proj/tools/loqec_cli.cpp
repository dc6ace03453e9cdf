// loqec: run analyzer sweeps, HOM scans and Malus fits from a JSON manifest.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "loqec/experiment.hpp"
#include "loqec/manifest.hpp"
#include "loqec/report.hpp"

namespace fs = std::filesystem;
using namespace loqec;

namespace {

struct CommonOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string output;
    std::string format;
    bool quiet = false;
};

struct FitOptions {
    std::string input;
    std::string column = "counts_d1_d3";
    std::string output;
    std::string format = "csv";
    bool quiet = false;
};

RunManifest load(const CommonOptions& o) {
    RunManifest m = load_manifest(o.config);
    if (!o.output.empty()) m.output_path = o.output;
    if (!o.format.empty()) m.format = parse_format(o.format);
    if (o.seed) {
        m.experiment.seed = *o.seed;
        for (auto& r : m.runs) r.config.seed = *o.seed;
    }
    return m;
}

void prepare_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw UsageError("cannot create output directory " + dir.string());
}

int run_sweep_cmd(const CommonOptions& o) {
    const RunManifest m = load(o);
    prepare_dir(m.output_path);
    std::vector<std::pair<std::string, SweepResult>> results;
    for (const auto& run : m.resolved_runs()) {
        SweepResult r = run_sweep(run.config, Execution::Parallel);
        if (m.format == OutputFormat::Csv) {
            detail::write_file(m.output_path / (run.name + ".csv"), sweep_csv(r));
        } else {
            detail::write_file(m.output_path / (run.name + ".json"), sweep_json(run.name, run.config, r));
        }
        if (!o.quiet) {
            std::cout << run.name << ": V(D1:D2)=" << format_number(r.visibility_d1_d2)
                      << " V(D1:D3)=" << format_number(r.visibility_d1_d3) << " F45=" << format_number(r.fidelity_45)
                      << '\n';
        }
        results.emplace_back(run.name, std::move(r));
    }
    if (m.format == OutputFormat::Csv) detail::write_file(m.output_path / "summary.csv", summary_csv(results));
    return 0;
}

int hom_scan_cmd(const CommonOptions& o) {
    const RunManifest m = load(o);
    if (!m.hom_scan) throw ValidationError("missing key 'hom_scan'");
    if (m.hom_scan->delays_s.empty()) throw ValidationError("hom_scan.delays_s: delay grid is empty");
    const auto pts = hom_scan(m.hom_scan->delays_s, m.hom_scan->sigma_s);
    prepare_dir(m.output_path);
    if (m.format == OutputFormat::Csv) {
        detail::write_file(m.output_path / "hom_scan.csv", hom_csv(pts));
    } else {
        detail::write_file(m.output_path / "hom_scan.json", hom_json(*m.hom_scan, pts));
    }
    if (!o.quiet) std::cout << "hom_scan: " << pts.size() << " points\n";
    return 0;
}

int fit_cmd(const FitOptions& o) {
    std::ifstream in(o.input);
    if (!in) throw UsageError("cannot read " + o.input);
    const auto curve = read_curve_csv(in, o.column);
    const MalusFit f = fit_malus(curve.thetas, curve.values);
    const auto format = parse_format(o.format);
    const std::string text = format == OutputFormat::Csv ? fit_csv(f) : fit_json(o.input, o.column, f);
    if (!o.output.empty()) {
        prepare_dir(o.output);
        detail::write_file(fs::path(o.output) / (format == OutputFormat::Csv ? "fit.csv" : "fit.json"), text);
    }
    if (!o.quiet || o.output.empty()) std::cout << text;
    return 0;
}

void add_common(CLI::App* sub, CommonOptions& o) {
    sub->add_option("--config", o.config, "JSON run manifest")->required();
    sub->add_option("--seed", o.seed, "override the manifest seed");
    sub->add_option("--output", o.output, "output directory (overrides outputs.path)");
    sub->add_option("--format", o.format, "csv or json (overrides outputs.format)")->check(CLI::IsMember({"csv", "json"}));
    sub->add_flag("--quiet", o.quiet, "suppress the console summary");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-photon encoding and bit-flip correction simulator"};
    app.require_subcommand(1);

    CommonOptions sweep_opts, hom_opts;
    FitOptions fit_opts;

    auto* sweep = app.add_subcommand("run-sweep", "analytic curves, Poisson counts and fits for each run");
    add_common(sweep, sweep_opts);
    auto* hom = app.add_subcommand("hom-scan", "coincidence probability over a delay grid");
    add_common(hom, hom_opts);
    auto* fit = app.add_subcommand("fit", "fit offset + amplitude cos 2(theta - phase) to one column of a curve file");
    fit->add_option("--input", fit_opts.input, "CSV with a theta_deg column")->required();
    fit->add_option("--column", fit_opts.column, "column to fit")->capture_default_str();
    fit->add_option("--output", fit_opts.output, "also write fit.csv / fit.json into this directory");
    fit->add_option("--format", fit_opts.format, "csv or json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    fit->add_flag("--quiet", fit_opts.quiet, "do not echo the record when writing a file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sweep) return run_sweep_cmd(sweep_opts);
        if (*hom) return hom_scan_cmd(hom_opts);
        if (*fit) return fit_cmd(fit_opts);
    } catch (const FitError& e) {
        std::cerr << "loqec: fit error: " << e.what() << '\n';
        return 3;
    } catch (const ValidationError& e) {
        std::cerr << "loqec: invalid configuration: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        std::cerr << "loqec: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "loqec: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
