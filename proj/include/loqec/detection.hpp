#pragma once

#include <algorithm>
#include <functional>
#include <span>
#include <string_view>
#include <thread>
#include <vector>

#include "loqec/elements.hpp"
#include "loqec/state.hpp"

namespace loqec {

enum class DetectorId { D1, D2, D3 };

inline std::string_view to_string(DetectorId d) {
    switch (d) {
    case DetectorId::D1: return "D1";
    case DetectorId::D2: return "D2";
    case DetectorId::D3: return "D3";
    }
    return "?";
}

/// Bucket detector behind a polarization projection.
struct DetectorSpec {
    DetectorId id;
    PolarizationProjector projector;
};

/// D2 sees |0> reflected from the Z-measurement PBS; D3 sees |1> transmitted.
inline DetectorSpec detector_d2(const PathId& z_path = paths::kD) { return {DetectorId::D2, {z_path, ket_zero()}}; }
inline DetectorSpec detector_d3(const PathId& z_path = paths::kD) { return {DetectorId::D3, {z_path, ket_one()}}; }
/// D1 behind the rotatable analyzer.
inline DetectorSpec detector_d1(double theta_deg, const PathId& out_path = paths::kC) {
    return {DetectorId::D1, {out_path, linear(theta_deg)}};
}

struct MeasurementBranch {
    DetectorId detector = DetectorId::D2;
    int temporal = 0; // temporal mode in which the measured photon was found
    SinglePhotonState conditional;

    double probability() const { return conditional.norm_squared(); }
};

/// Fires `action` on branches heralded by `trigger`.
struct FeedForwardRule {
    DetectorId trigger;
    LinearElement action;
};

/// The feed-forward used for correction: D3 drives the Pockels cell on the output fiber.
inline FeedForwardRule d3_bit_flip(const PathId& out_path = paths::kC) {
    return {DetectorId::D3, pockels(out_path, true)};
}

/// Z-measurement of the photon on `path`: one branch per (outcome, temporal mode)
/// with non-zero weight.
inline std::vector<MeasurementBranch> z_measure(const TwoPhotonState& s, const PathId& path) {
    std::vector<MeasurementBranch> out;
    for (const auto& det : {detector_d2(path), detector_d3(path)}) {
        for (auto& m : condition_on(s, det.projector).members) {
            out.push_back({det.id, m.temporal, std::move(m.state)});
        }
    }
    return out;
}

/// Applies the rule's element to triggered branches when the Pockels cell is connected.
inline std::vector<MeasurementBranch> apply_feedforward(std::vector<MeasurementBranch> branches, const FeedForwardRule& rule,
                                                        bool pc_enabled) {
    if (!pc_enabled) return branches;
    for (auto& b : branches) {
        if (b.detector == rule.trigger) b.conditional = apply_element(b.conditional, rule.action);
    }
    return branches;
}

struct PostSelection {
    TwoPhotonState state;
    double success_probability = 0.0;
};

/// Keeps only terms with one photon on each of `out1`, `out2`.
inline PostSelection coincidence_postselect(const TwoPhotonState& s, const PathId& out1 = paths::kA,
                                            const PathId& out2 = paths::kB) {
    TwoPhotonState::Amplitudes kept;
    for (const auto& [pair, c] : s.amplitudes()) {
        if (pair.occupancy(out1) == 1 && pair.occupancy(out2) == 1) kept.emplace(pair, c);
    }
    TwoPhotonState post(s.paths(), std::move(kept));
    const double p = post.norm_squared();
    return {std::move(post), p};
}

/// Total probability of the branches heralded by `detector`.
inline double branch_probability(std::span<const MeasurementBranch> branches, DetectorId detector) {
    double p = 0.0;
    for (const auto& b : branches)
        if (b.detector == detector) p += b.probability();
    return p;
}

/// Joint probability of `detector` together with D1 behind the analyzer at `theta_deg`.
inline double coincidence_probability(std::span<const MeasurementBranch> branches, DetectorId detector, double theta_deg,
                                      const PathId& out_path = paths::kC) {
    const auto d1 = detector_d1(theta_deg, out_path);
    double p = 0.0;
    for (const auto& b : branches)
        if (b.detector == detector) p += analyzer_probability(b.conditional, d1.projector);
    return p;
}

enum class Execution { Serial, Parallel };

struct AnalyzerCurve {
    std::vector<double> thetas;
    std::vector<double> p_d1_d2;
    std::vector<double> p_d1_d3;
};

/// Coincidence probabilities (D1:D2) and (D1:D3) for each analyzer angle.
/// Each angle is evaluated independently, so parallel and serial runs agree bit for bit.
inline AnalyzerCurve analyzer_curve(std::span<const MeasurementBranch> branches, std::span<const double> thetas,
                                    Execution exec = Execution::Serial, const PathId& out_path = paths::kC) {
    AnalyzerCurve curve{{thetas.begin(), thetas.end()}, std::vector<double>(thetas.size()), std::vector<double>(thetas.size())};
    auto eval = [&](std::size_t i) {
        curve.p_d1_d2[i] = coincidence_probability(branches, DetectorId::D2, thetas[i], out_path);
        curve.p_d1_d3[i] = coincidence_probability(branches, DetectorId::D3, thetas[i], out_path);
    };
    const std::size_t workers = exec == Execution::Parallel ? std::max(1u, std::thread::hardware_concurrency()) : 1;
    if (workers == 1 || thetas.size() < 2) {
        for (std::size_t i = 0; i < thetas.size(); ++i) eval(i);
        return curve;
    }
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t i = w; i < thetas.size(); i += workers) eval(i);
            });
        }
    }
    return curve;
}

} // namespace loqec
