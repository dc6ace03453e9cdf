#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "loqec/detection.hpp"
#include "loqec/elements.hpp"
#include "loqec/state.hpp"

namespace loqec {

/// One analyzer sweep of the error-correction apparatus.
///
/// `overlap_v` is the two-photon overlap seen by interference, |<q|a>|^2 for the
/// qubit and ancilla wavepackets. It is the depth of the HOM dip measured during
/// alignment and equals the visibility of the corrected analyzer curves.
struct ExperimentConfig {
    double qubit_hwp_angle = 22.5; // degrees; 22.5 prepares |0>
    WiringConfig wiring = WiringConfig::AC_BD;
    double overlap_v = 1.0;
    double imperfection_eps = 0.0;
    bool pc_enabled = true;
    std::vector<double> thetas = default_thetas();
    double pair_rate = 1000.0; // pairs per second reaching the encoder
    double duration = 60.0;    // seconds
    std::uint64_t seed = 0;

    /// -90 to 90 degrees in 10 degree steps.
    static std::vector<double> default_thetas() {
        std::vector<double> t;
        for (int d = -90; d <= 90; d += 10) t.push_back(d);
        return t;
    }

    void validate() const {
        if (thetas.empty()) throw ValidationError("thetas must not be empty");
        if (!(overlap_v >= 0.0 && overlap_v <= 1.0)) throw ValidationError("overlap_v must lie in [0, 1]");
        if (!(imperfection_eps >= 0.0 && imperfection_eps <= 1.0)) throw ValidationError("imperfection_eps must lie in [0, 1]");
        if (!(pair_rate >= 0.0) || !std::isfinite(pair_rate)) throw ValidationError("pair_rate must be >= 0");
        if (!(duration >= 0.0) || !std::isfinite(duration)) throw ValidationError("duration must be >= 0");
        for (double t : thetas)
            if (!std::isfinite(t)) throw ValidationError("thetas must be finite");
    }
};

/// counts(theta) = offset + amplitude * cos 2(theta - phase)
struct MalusFit {
    double offset = 0.0;
    double amplitude = 0.0;
    double phase_deg = 0.0;

    double operator()(double theta_deg) const { return offset + amplitude * std::cos(2.0 * radians(theta_deg - phase_deg)); }
};

struct SweepResult {
    std::vector<double> thetas;
    std::vector<double> p_d1_d2;
    std::vector<double> p_d1_d3;
    std::vector<std::int64_t> counts_d1_d2;
    std::vector<std::int64_t> counts_d1_d3;
    MalusFit fit_d1_d2;
    MalusFit fit_d1_d3;
    double visibility_d1_d2 = 0.0;
    double visibility_d1_d3 = 0.0;
    /// Cardinal-point fidelity of the whole output (D1:D2 plus D1:D3) with the input state.
    double fidelity_45 = 0.0;
    double fidelity_d1_d2 = 0.0;
    double fidelity_d1_d3 = 0.0;
    double success_probability = 0.0;
    /// Weight of events with both photons in one encoder output; never reaches a coincidence.
    double discarded_probability = 0.0;
    /// Sum of all Z-measurement branch weights (equals success_probability).
    double branch_probability = 0.0;
    std::optional<MalusFit> counts_fit_d1_d2;
    std::optional<MalusFit> counts_fit_d1_d3;
    std::uint64_t seed = 0;
};

/// Least-squares fit on {1, cos 2theta, sin 2theta} with the period fixed at 180 degrees.
inline MalusFit fit_malus(std::span<const double> thetas_deg, std::span<const double> values) {
    if (thetas_deg.size() != values.size()) throw FitError("fit_malus: theta and value counts differ");
    if (thetas_deg.size() < 3) throw FitError("fit_malus: need at least 3 points");
    const auto n = Eigen::Index(thetas_deg.size());
    Eigen::MatrixXd design(n, 3);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double a = 2.0 * radians(thetas_deg[std::size_t(i)]);
        design(i, 0) = 1.0;
        design(i, 1) = std::cos(a);
        design(i, 2) = std::sin(a);
        y(i) = values[std::size_t(i)];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    if (qr.rank() < 3) throw FitError("fit_malus: analyzer angles do not determine a 180-degree sinusoid");
    const Eigen::Vector3d coef = qr.solve(y);
    MalusFit fit;
    fit.offset = coef(0);
    fit.amplitude = std::hypot(coef(1), coef(2));
    fit.phase_deg = fit.amplitude > 0.0 ? degrees(std::atan2(coef(2), coef(1))) / 2.0 : 0.0;
    return fit;
}

inline MalusFit fit_malus(std::span<const double> thetas_deg, std::span<const std::int64_t> counts) {
    std::vector<double> v(counts.begin(), counts.end());
    return fit_malus(thetas_deg, std::span<const double>(v));
}

inline double visibility(const MalusFit& fit) {
    if (!(fit.offset > 0.0)) throw ValidationError("visibility: fit offset must be positive");
    return fit.amplitude / fit.offset;
}

/// P(expected) / (P(expected) + P(orthogonal)).
inline double fidelity(double p_expected, double p_orthogonal) {
    const double total = p_expected + p_orthogonal;
    if (!(total > 0.0)) throw ValidationError("fidelity undefined: both analyzer probabilities are zero");
    return p_expected / total;
}

enum class LogicalValue { Zero, One };

/// Fidelity from the analyzer set to +45 (|0>) and -45 (|1>).
inline double fidelity_45(double p_plus45, double p_minus45, LogicalValue expected) {
    return expected == LogicalValue::Zero ? fidelity(p_plus45, p_minus45) : fidelity(p_minus45, p_plus45);
}

/// Jones vector prepared by HWP1 from the horizontally polarized source photon.
inline Jones qubit_jones(double hwp_angle_deg) {
    const auto plate = hwp(hwp_angle_deg, paths::kQubitIn);
    const auto& m = plate.matrix();
    return {m(0, 0), m(1, 0)};
}

struct EncodedQubit {
    TwoPhotonState state; // normalized, paths A and B
    double success_probability = 0.0;
};

namespace detail {

/// Qubit and ancilla through the encoding PBS, post-selected on one photon in each of A and B.
/// The returned state keeps its post-selected (sub-unit) norm.
inline PostSelection encode(const Jones& qubit, double overlap_v) {
    if (!(overlap_v >= 0.0 && overlap_v <= 1.0)) throw ValidationError("overlap_v must lie in [0, 1]");
    const SinglePhotonSpec q(paths::kQubitIn, qubit);
    const SinglePhotonSpec a(paths::kAncillaIn, ket_zero());
    TwoPhotonState s = product_state(q, a);
    s = delay(paths::kQubitIn, DistinguishabilitySpec(std::sqrt(overlap_v)))(s);
    s = apply_element(s, pbs(paths::kQubitIn, paths::kAncillaIn, paths::kA, paths::kB));
    return coincidence_postselect(s, paths::kA, paths::kB);
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace detail

/// Encodes alpha|0> + beta|1> into the two-photon code on fibers A and B.
inline EncodedQubit encode_qubit(Complex alpha, Complex beta, double overlap_v = 1.0) {
    if (std::abs(std::norm(alpha) + std::norm(beta) - 1.0) > 1e-12) throw ValidationError("encode_qubit: |alpha|^2 + |beta|^2 must be 1");
    auto post = detail::encode(from_computational(alpha, beta), overlap_v);
    return {post.state.normalized(), post.success_probability};
}

/// Independent Poisson draws with mean pair_rate * duration * p for each entry.
/// Entry i of stream `stream` always draws from the same generator state, so the
/// result does not depend on evaluation order.
inline std::vector<std::int64_t> sample_counts(std::span<const double> probabilities, double pair_rate, double duration,
                                               std::uint64_t seed, std::uint64_t stream = 0) {
    std::vector<std::int64_t> out(probabilities.size());
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        const double p = probabilities[i];
        const double mean = pair_rate * duration * p;
        if (!(mean >= 0.0) || !std::isfinite(mean)) throw ValidationError("sample_counts: negative or non-finite mean");
        if (p > 0.5 + 1e-12) throw ValidationError("sample_counts: probability exceeds the post-selected scale 1/2");
        if (mean == 0.0) continue;
        std::mt19937_64 rng(detail::splitmix64(seed ^ detail::splitmix64((stream << 32) ^ i)));
        std::poisson_distribution<std::int64_t> poisson(mean);
        out[i] = poisson(rng);
    }
    return out;
}

/// Analytic sweep: preparation, encoding, wiring, Z-measurement on D, feed-forward
/// and analysis on C. No sampling.
inline SweepResult run_analytic(const ExperimentConfig& cfg, Execution exec = Execution::Serial) {
    cfg.validate();

    TwoPhotonState s = product_state({paths::kQubitIn, ket_h()}, {paths::kAncillaIn, ket_h()});
    s = apply_element(s, hwp(cfg.qubit_hwp_angle, paths::kQubitIn));
    s = apply_element(s, hwp(22.5, paths::kAncillaIn));
    s = delay(paths::kQubitIn, DistinguishabilitySpec(std::sqrt(cfg.overlap_v)))(s);
    s = apply_element(s, pbs(paths::kQubitIn, paths::kAncillaIn, paths::kA, paths::kB));
    const double before_postselect = s.norm_squared();
    auto [encoded, success] = coincidence_postselect(s, paths::kA, paths::kB);
    encoded = rewire(encoded, cfg.wiring);

    auto branches = z_measure(encoded, paths::kD);
    branches = apply_feedforward(std::move(branches), d3_bit_flip(paths::kC), cfg.pc_enabled);

    SweepResult r;
    r.seed = cfg.seed;
    r.success_probability = success;
    r.discarded_probability = before_postselect - success;
    for (const auto& b : branches) r.branch_probability += b.probability();

    const double eps = cfg.imperfection_eps;
    const double flat_d2 = branch_probability(branches, DetectorId::D2) / 2.0;
    const double flat_d3 = branch_probability(branches, DetectorId::D3) / 2.0;
    auto degrade = [eps](double p, double flat) { return (1.0 - eps) * p + eps * flat; };

    auto curve = analyzer_curve(branches, cfg.thetas, exec, paths::kC);
    r.thetas = std::move(curve.thetas);
    r.p_d1_d2 = std::move(curve.p_d1_d2);
    r.p_d1_d3 = std::move(curve.p_d1_d3);
    for (auto& p : r.p_d1_d2) p = degrade(p, flat_d2);
    for (auto& p : r.p_d1_d3) p = degrade(p, flat_d3);

    r.fit_d1_d2 = fit_malus(r.thetas, r.p_d1_d2);
    r.fit_d1_d3 = fit_malus(r.thetas, r.p_d1_d3);
    r.visibility_d1_d2 = visibility(r.fit_d1_d2);
    r.visibility_d1_d3 = visibility(r.fit_d1_d3);

    // expected output: the prepared linear polarization at 2 * HWP1 angle
    const double expected = 2.0 * cfg.qubit_hwp_angle;
    auto at = [&](DetectorId d, double theta, double flat) {
        return degrade(coincidence_probability(branches, d, theta, paths::kC), flat);
    };
    const double d2_ok = at(DetectorId::D2, expected, flat_d2), d2_bad = at(DetectorId::D2, expected + 90.0, flat_d2);
    const double d3_ok = at(DetectorId::D3, expected, flat_d3), d3_bad = at(DetectorId::D3, expected + 90.0, flat_d3);
    r.fidelity_d1_d2 = fidelity(d2_ok, d2_bad);
    r.fidelity_d1_d3 = fidelity(d3_ok, d3_bad);
    r.fidelity_45 = fidelity(d2_ok + d3_ok, d2_bad + d3_bad);
    return r;
}

/// run_analytic plus Poisson counts for both coincidence channels.
inline SweepResult run_sweep(const ExperimentConfig& cfg, Execution exec = Execution::Serial) {
    SweepResult r = run_analytic(cfg, exec);
    r.counts_d1_d2 = sample_counts(r.p_d1_d2, cfg.pair_rate, cfg.duration, cfg.seed, 0);
    r.counts_d1_d3 = sample_counts(r.p_d1_d3, cfg.pair_rate, cfg.duration, cfg.seed, 1);
    auto try_fit = [&](const std::vector<std::int64_t>& counts) -> std::optional<MalusFit> {
        const MalusFit f = fit_malus(r.thetas, std::span<const std::int64_t>(counts));
        if (!(f.offset > 0.0)) return std::nullopt;
        return f;
    };
    r.counts_fit_d1_d2 = try_fit(r.counts_d1_d2);
    r.counts_fit_d1_d3 = try_fit(r.counts_d1_d3);
    return r;
}

struct HomPoint {
    double delay_s = 0.0;
    double overlap_v = 0.0; // wavepacket overlap exp(-tau^2 / 2 sigma^2)
    double p_coincidence = 0.0;
};

/// Two horizontally polarized photons on a 50/50 beam splitter, one delayed by each
/// entry of `delays_s`: P = (1 - v^2) / 2.
inline std::vector<HomPoint> hom_scan(std::span<const double> delays_s, double sigma_s) {
    if (!(sigma_s > 0.0)) throw ValidationError("hom_scan: sigma must be positive");
    const PathId in1{"bs_in1"}, in2{"bs_in2"}, out1{"bs_out1"}, out2{"bs_out2"};
    const auto bs = bs5050(in1, in2, out1, out2);
    std::vector<HomPoint> out;
    out.reserve(delays_s.size());
    for (double tau : delays_s) {
        const auto spec = DistinguishabilitySpec::from_delay(tau, sigma_s);
        const auto s = apply_element(product_state({in1, ket_h()}, {in2, ket_h(), spec.wavepacket()}), bs);
        double p = 0.0;
        for (auto pa : kPolarizations)
            for (auto pb : kPolarizations) {
                p += joint_probability(s, {out1, pa == Polarization::H ? ket_h() : ket_v()},
                                       {out2, pb == Polarization::H ? ket_h() : ket_v()});
            }
        out.push_back({tau, spec.overlap(), p});
    }
    return out;
}

} // namespace loqec
