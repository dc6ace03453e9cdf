#include <cmath>
#include <numeric>
#include <random>

#include "gtest/gtest.h"

#include "generators.hpp"
#include "loqec/experiment.hpp"
#include "oracle.hpp"

using namespace loqec;

namespace {

constexpr double kTol = 1e-12;

/// Dense-tensor reference for the three analyzer curves with wiring A:C/B:D.
/// `wavepacket_overlap` is the amplitude overlap between qubit and ancilla.
struct DenseCurves {
    double d1_d2, d1_d3_off, d1_d3_on;
};

DenseCurves dense_curves(const Jones& qubit, double wavepacket_overlap, double theta) {
    const oracle::ModeIndex idx({paths::kQubitIn, paths::kAncillaIn, paths::kA, paths::kB});
    Eigen::VectorXcd q = Eigen::VectorXcd::Zero(idx.size()), a = Eigen::VectorXcd::Zero(idx.size());
    const double s = std::sqrt(1 - wavepacket_overlap * wavepacket_overlap);
    for (auto pol : kPolarizations) {
        q(idx[{paths::kQubitIn, pol, 0}]) = wavepacket_overlap * qubit[pol];
        q(idx[{paths::kQubitIn, pol, 1}]) = s * qubit[pol];
        a(idx[{paths::kAncillaIn, pol, 0}]) = ket_zero()[pol];
    }
    const auto t = oracle::evolve(oracle::product_tensor(q, a), oracle::dense(pbs(paths::kQubitIn, paths::kAncillaIn, paths::kA, paths::kB), idx));
    const Jones an = linear(theta);
    const Jones flipped{an.h, -an.v}; // analyzer seen through the driven Pockels cell
    return {oracle::joint_probability(t, idx, paths::kA, an, paths::kB, ket_zero()),
            oracle::joint_probability(t, idx, paths::kA, an, paths::kB, ket_one()),
            oracle::joint_probability(t, idx, paths::kA, flipped, paths::kB, ket_one())};
}

ExperimentConfig config(double hwp_angle, double v, bool pc, WiringConfig w = WiringConfig::AC_BD) {
    ExperimentConfig c;
    c.qubit_hwp_angle = hwp_angle;
    c.overlap_v = v;
    c.pc_enabled = pc;
    c.wiring = w;
    return c;
}

void expect_two_photon(const TwoPhotonState& s, Complex hh, Complex vv) {
    EXPECT_NEAR(std::abs(s.amplitude({"A", Polarization::H, 0}, {"B", Polarization::H, 0}) - hh), 0.0, kTol);
    EXPECT_NEAR(std::abs(s.amplitude({"A", Polarization::V, 0}, {"B", Polarization::V, 0}) - vv), 0.0, kTol);
    EXPECT_NEAR(std::abs(s.amplitude({"A", Polarization::H, 0}, {"B", Polarization::V, 0})), 0.0, kTol);
    EXPECT_NEAR(std::abs(s.amplitude({"A", Polarization::V, 0}, {"B", Polarization::H, 0})), 0.0, kTol);
}

} // namespace

TEST(encode_qubit, logical_zero) {
    const auto e = encode_qubit(1.0, 0.0);
    const double r = std::sqrt(0.5);
    // (|00>+|11>)/sqrt2 = (HH + VV)/sqrt2
    expect_two_photon(e.state, r, r);
    EXPECT_NEAR(e.success_probability, 0.5, kTol);
}

TEST(encode_qubit, logical_one) {
    const auto e = encode_qubit(0.0, 1.0);
    const double r = std::sqrt(0.5);
    expect_two_photon(e.state, r, -r);
    EXPECT_NEAR(e.success_probability, 0.5, kTol);
}

TEST(encode_qubit, horizontal_photon_needs_no_interference) {
    const double r = std::sqrt(0.5);
    for (double v : {0.0, 0.5, 1.0}) {
        const auto e = encode_qubit(r, r, v);
        EXPECT_NEAR(joint_probability(e.state, {"A", ket_h()}, {"B", ket_h()}), 1.0, kTol);
        EXPECT_NEAR(e.success_probability, 0.5, kTol);
    }
}

TEST(encode_qubit, rejects_unnormalized_qubit) {
    EXPECT_THROW(encode_qubit(1.0, 1.0), ValidationError);
    EXPECT_THROW(encode_qubit(1.0, 0.0, 1.5), ValidationError);
}

TEST(encode_qubit, success_is_one_half_on_a_one_degree_grid) {
    for (int deg = -90; deg <= 90; ++deg) {
        const auto ab = to_computational(qubit_jones(deg));
        EXPECT_NEAR(encode_qubit(ab[0], ab[1]).success_probability, 0.5, kTol) << deg;
    }
}

TEST(run_analytic, ideal_logical_zero_recovers_fully) {
    const auto r = run_analytic(config(22.5, 1.0, true));
    EXPECT_NEAR(r.visibility_d1_d3, 1.0, 1e-9);
    EXPECT_NEAR(r.fit_d1_d3.phase_deg, 45.0, 1e-9);
    EXPECT_NEAR(r.fidelity_45, 1.0, kTol);
}

TEST(run_analytic, matches_dense_reference_pointwise) {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> ang(-90, 90), u(0, 1);
    for (int i = 0; i < 30; ++i) {
        auto cfg = config(ang(rng), u(rng), false);
        const auto off = run_analytic(cfg);
        cfg.pc_enabled = true;
        const auto on = run_analytic(cfg);
        for (std::size_t k = 0; k < off.thetas.size(); ++k) {
            const auto ref = dense_curves(qubit_jones(cfg.qubit_hwp_angle), std::sqrt(cfg.overlap_v), off.thetas[k]);
            EXPECT_NEAR(off.p_d1_d2[k], ref.d1_d2, kTol);
            EXPECT_NEAR(off.p_d1_d3[k], ref.d1_d3_off, kTol);
            EXPECT_NEAR(on.p_d1_d3[k], ref.d1_d3_on, kTol);
        }
    }
}

TEST(run_analytic, visibility_is_square_of_wavepacket_overlap) {
    // The reference alone: cardinal-point contrast of the D1:D2 curve for input |0>.
    for (double amp : {0.0, 0.3, 0.7, 0.96021, 1.0}) {
        const auto plus = dense_curves(ket_zero(), amp, 45), minus = dense_curves(ket_zero(), amp, -45);
        EXPECT_NEAR((plus.d1_d2 - minus.d1_d2) / (plus.d1_d2 + minus.d1_d2), amp * amp, kTol);
    }
}

TEST(run_analytic, partial_overlap_visibility) {
    const auto r = run_analytic(config(22.5, 0.922, true));
    const auto plus = dense_curves(ket_zero(), std::sqrt(0.922), 45), minus = dense_curves(ket_zero(), std::sqrt(0.922), -45);
    const double reference = (plus.d1_d3_on - minus.d1_d3_on) / (plus.d1_d3_on + minus.d1_d3_on);
    EXPECT_NEAR(reference, 0.922, kTol);
    EXPECT_NEAR(r.visibility_d1_d3, 0.922, 1e-9);
    EXPECT_NEAR(r.visibility_d1_d2, 0.922, 1e-9);
}

TEST(run_analytic, superposition_input_has_unit_visibility_for_any_overlap) {
    for (double v : {0.0, 0.3, 0.922, 1.0}) {
        const auto r = run_analytic(config(0.0, v, true));
        EXPECT_NEAR(r.visibility_d1_d2, 1.0, 1e-9);
        EXPECT_NEAR(r.visibility_d1_d3, 1.0, 1e-9);
    }
}

TEST(run_analytic, imperfection_scales_visibility) {
    for (double eps : {0.0, 0.018, 0.2, 1.0}) {
        auto c = config(0.0, 0.5, true);
        c.imperfection_eps = eps;
        const auto r = run_analytic(c);
        EXPECT_NEAR(r.visibility_d1_d2, 1.0 - eps, 1e-9);
        EXPECT_NEAR(r.visibility_d1_d3, 1.0 - eps, 1e-9);
    }
}

TEST(run_analytic, noiseless_fit_recovers_model_parameters) {
    for (double v : {0.25, 0.922}) {
        const auto r = run_analytic(config(22.5, v, false));
        // D1:D2 = (1 + v cos 2(theta - 45)) / 8; D1:D3 uncorrected peaks at -45
        EXPECT_NEAR(r.fit_d1_d2.offset, 0.125, 1e-9);
        EXPECT_NEAR(r.fit_d1_d2.amplitude, v / 8, 1e-9);
        EXPECT_NEAR(r.fit_d1_d2.phase_deg, 45.0, 1e-9);
        EXPECT_NEAR(r.fit_d1_d3.phase_deg, -45.0, 1e-9);
        for (std::size_t k = 0; k < r.thetas.size(); ++k) EXPECT_NEAR(r.fit_d1_d2(r.thetas[k]), r.p_d1_d2[k], 1e-9);
    }
}

TEST(run_analytic, wiring_swap_is_exact) {
    std::mt19937_64 rng(32);
    std::uniform_real_distribution<double> ang(-90, 90), u(0, 1);
    for (int i = 0; i < 30; ++i) {
        auto a = config(ang(rng), u(rng), u(rng) < 0.5);
        a.imperfection_eps = u(rng) * 0.1;
        auto b = a;
        b.wiring = WiringConfig::AD_BC;
        const auto ra = run_analytic(a), rb = run_analytic(b);
        for (std::size_t k = 0; k < ra.thetas.size(); ++k) {
            EXPECT_NEAR(ra.p_d1_d2[k], rb.p_d1_d2[k], kTol);
            EXPECT_NEAR(ra.p_d1_d3[k], rb.p_d1_d3[k], kTol);
        }
        EXPECT_NEAR(ra.visibility_d1_d2, rb.visibility_d1_d2, 1e-9);
        EXPECT_NEAR(ra.fidelity_45, rb.fidelity_45, kTol);
    }
}

TEST(run_analytic, correction_identity_at_full_overlap) {
    for (double w = -90; w <= 90; w += 3.5) {
        const auto r = run_analytic(config(w, 1.0, true));
        for (std::size_t k = 0; k < r.thetas.size(); ++k) EXPECT_NEAR(r.p_d1_d3[k], r.p_d1_d2[k], kTol);
    }
}

TEST(run_analytic, visibility_overlap_law) {
    for (double v : {0.1, 0.5, 0.922}) {
        for (double w : {22.5, -22.5}) {
            const auto r = run_analytic(config(w, v, true));
            EXPECT_NEAR(r.visibility_d1_d3, v, 1e-9);
            EXPECT_NEAR(r.visibility_d1_d2, v, 1e-9);
        }
        EXPECT_NEAR(run_analytic(config(0.0, v, true)).visibility_d1_d3, 1.0, 1e-9);
    }
}

TEST(run_analytic, probability_bookkeeping) {
    const auto r = run_analytic(config(13.0, 0.4, true));
    EXPECT_NEAR(r.success_probability, 0.5, kTol);
    EXPECT_NEAR(r.discarded_probability, 0.5, kTol);
    EXPECT_NEAR(r.branch_probability, 0.5, kTol);
}

TEST(run_analytic, parallel_matches_serial) {
    auto c = config(10.0, 0.7, true);
    c.thetas.clear();
    for (double t = -90; t <= 90; t += 0.25) c.thetas.push_back(t);
    const auto s = run_analytic(c, Execution::Serial), p = run_analytic(c, Execution::Parallel);
    EXPECT_EQ(s.p_d1_d2, p.p_d1_d2);
    EXPECT_EQ(s.p_d1_d3, p.p_d1_d3);
}

TEST(run_analytic, validates_config) {
    auto c = config(0, 1, true);
    c.thetas.clear();
    EXPECT_THROW(run_analytic(c), ValidationError);
    c = config(0, 1.2, true);
    EXPECT_THROW(run_analytic(c), ValidationError);
    c = config(0, 1, true);
    c.imperfection_eps = -0.1;
    EXPECT_THROW(run_analytic(c), ValidationError);
    c = config(0, 1, true);
    c.duration = -1;
    EXPECT_THROW(run_analytic(c), ValidationError);
    c = config(0, 1, true);
    c.thetas = {0, 90, 180};
    EXPECT_THROW(run_analytic(c), FitError);
}

TEST(fidelity, cardinal_point_rules) {
    EXPECT_EQ(fidelity_45(1.0, 0.0, LogicalValue::Zero), 1.0);
    EXPECT_EQ(fidelity_45(1.0, 0.0, LogicalValue::One), 0.0);
    EXPECT_EQ(fidelity_45(0.3, 0.3, LogicalValue::One), 0.5);
    EXPECT_THROW(fidelity_45(0.0, 0.0, LogicalValue::Zero), ValidationError);
    EXPECT_NEAR(run_analytic(config(22.5, 0.922, true)).fidelity_45, 0.961, kTol);
    EXPECT_NEAR(run_analytic(config(22.5, 0.0, true)).fidelity_45, 0.5, kTol);
    EXPECT_NEAR(run_analytic(config(-22.5, 1.0, true)).fidelity_45, 1.0, kTol);
}

TEST(fidelity, disconnected_cell_splits_fidelity_by_channel) {
    const auto r = run_analytic(config(22.5, 0.922, false));
    EXPECT_NEAR(r.fidelity_d1_d2, 0.961, kTol);
    EXPECT_NEAR(r.fidelity_d1_d3, 1 - 0.961, kTol);
    EXPECT_NEAR(r.fidelity_45, 0.5, kTol);
}

TEST(fit_malus, recovers_its_generator) {
    std::vector<double> t, y;
    for (double th = -90; th <= 90; th += 10) {
        t.push_back(th);
        y.push_back(50 + 46.1 * std::cos(2 * radians(th - 45)));
    }
    const auto f = fit_malus(t, y);
    EXPECT_NEAR(f.offset, 50, 1e-9);
    EXPECT_NEAR(f.amplitude, 46.1, 1e-9);
    EXPECT_NEAR(f.phase_deg, 45, 1e-9);
    EXPECT_NEAR(visibility(f), 0.922, 1e-9);
}

TEST(fit_malus, constant_counts_have_zero_visibility) {
    const std::vector<double> t{-60, -20, 20, 60}, y{7, 7, 7, 7};
    const auto f = fit_malus(t, y);
    EXPECT_NEAR(f.amplitude, 0.0, 1e-12);
    EXPECT_NEAR(visibility(f), 0.0, 1e-12);
}

TEST(fit_malus, rejects_degenerate_designs) {
    EXPECT_THROW(fit_malus(std::vector<double>{0, 10}, std::vector<double>{1, 2}), FitError);
    EXPECT_THROW(fit_malus(std::vector<double>{0, 90, 180, -90}, std::vector<double>{1, 2, 1, 2}), FitError);
    EXPECT_THROW(fit_malus(std::vector<double>{0, 10, 20}, std::vector<double>{1, 2}), FitError);
    EXPECT_THROW(visibility(MalusFit{0.0, 1.0, 0.0}), ValidationError);
}

namespace {

/// Fraction of seeds whose fitted visibility lies within `tol` of the truth for an
/// ideal (V = 1) curve peaking at `peak` mean counts on the default grid.
double calibration_rate(double peak, double tol, int seeds) {
    const auto thetas = ExperimentConfig::default_thetas();
    std::vector<double> p;
    for (double t : thetas) p.push_back(peak / 2 * (1 + std::cos(2 * radians(t - 45))) / 1e5);
    int within = 0;
    for (int seed = 0; seed < seeds; ++seed) {
        const auto counts = sample_counts(p, 1e5, 1.0, std::uint64_t(seed));
        if (std::abs(visibility(fit_malus(thetas, std::span<const std::int64_t>(counts))) - 1.0) <= tol) ++within;
    }
    return double(within) / seeds;
}

/// Delta-method standard deviation of the fitted visibility under Poisson noise.
double predicted_visibility_sd(double peak) {
    const auto thetas = ExperimentConfig::default_thetas();
    const auto n = Eigen::Index(thetas.size());
    Eigen::MatrixXd x(n, 3);
    Eigen::VectorXd mu(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double a = 2 * radians(thetas[std::size_t(i)]);
        x.row(i) << 1, std::cos(a), std::sin(a);
        mu(i) = peak / 2 * (1 + std::sin(a)); // phase 45
    }
    const Eigen::Matrix3d inv = (x.transpose() * x).inverse();
    const Eigen::Matrix3d cov = inv * x.transpose() * mu.asDiagonal() * x * inv;
    const double b0 = peak / 2;
    const Eigen::Vector3d g(-1 / b0, 0, 1 / b0); // d(hypot(b1, b2) / b0) at b = (b0, 0, b0)
    return std::sqrt(g.dot(cov * g));
}

} // namespace

TEST(fit_malus, poisson_noise_matches_delta_method) {
    // Peak 2000 on 19 points: sd(V) is ~0.0076, so +/-0.01 holds for ~81% of seeds, not 95%.
    const int seeds = 2000;
    const double sd = predicted_visibility_sd(2000);
    const double expected = std::erf(0.01 / (sd * std::sqrt(2.0)));
    const double binomial_se = std::sqrt(expected * (1 - expected) / seeds);
    EXPECT_NEAR(calibration_rate(2000, 0.01, seeds), expected, 4 * binomial_se);
    EXPECT_LT(expected, 0.9);

    // The peak at which +/-0.01 does cover 95% of seeds.
    const double peak95 = 2000 * std::pow(1.959964 * sd / 0.01, 2);
    EXPECT_NEAR(calibration_rate(peak95, 0.01, seeds), 0.95, 4 * std::sqrt(0.95 * 0.05 / seeds));
    EXPECT_GE(calibration_rate(1.2 * peak95, 0.01, seeds), 0.95);
}

TEST(sample_counts, zero_probability_gives_zero_counts) {
    const std::vector<double> p(50, 0.0);
    for (std::uint64_t seed = 0; seed < 5; ++seed)
        for (auto c : sample_counts(p, 1e6, 100, seed)) EXPECT_EQ(c, 0);
}

TEST(sample_counts, poisson_mean_within_five_standard_errors) {
    const std::vector<double> p(10000, 0.25);
    const auto c = sample_counts(p, 4000, 1.0, 99);
    const double mean = std::accumulate(c.begin(), c.end(), 0.0) / double(c.size());
    EXPECT_LT(std::abs(mean - 1000), 5 * std::sqrt(1000.0 / 1e4));
}

TEST(sample_counts, deterministic_and_order_free) {
    std::vector<double> p;
    for (int i = 0; i < 40; ++i) p.push_back(0.01 * (i % 7));
    const auto a = sample_counts(p, 1e4, 60, 5), b = sample_counts(p, 1e4, 60, 5);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, sample_counts(p, 1e4, 60, 6));
    EXPECT_NE(a, sample_counts(p, 1e4, 60, 5, 1));
    // a prefix of the vector draws from the same per-index streams
    const auto head = sample_counts(std::span<const double>(p).first(10), 1e4, 60, 5);
    EXPECT_TRUE(std::equal(head.begin(), head.end(), a.begin()));
}

TEST(sample_counts, validation) {
    EXPECT_THROW(sample_counts(std::vector<double>{-0.1}, 10, 10, 0), ValidationError);
    EXPECT_THROW(sample_counts(std::vector<double>{0.1}, -10, 10, 0), ValidationError);
    EXPECT_THROW(sample_counts(std::vector<double>{0.7}, 10, 10, 0), ValidationError);
}

TEST(run_sweep, counts_follow_configuration) {
    auto c = config(22.5, 0.922, true);
    c.seed = 17;
    c.pair_rate = 2e4;
    c.duration = 60;
    const auto a = run_sweep(c), b = run_sweep(c);
    EXPECT_EQ(a.counts_d1_d2, b.counts_d1_d2);
    EXPECT_EQ(a.counts_d1_d3, b.counts_d1_d3);
    ASSERT_TRUE(a.counts_fit_d1_d3.has_value());
    EXPECT_NEAR(visibility(*a.counts_fit_d1_d3), 0.922, 0.02);
    c.duration = 0;
    const auto z = run_sweep(c);
    for (auto n : z.counts_d1_d2) EXPECT_EQ(n, 0);
    EXPECT_FALSE(z.counts_fit_d1_d2.has_value());
    EXPECT_EQ(z.p_d1_d2, a.p_d1_d2);
}

TEST(hom_scan, dip_and_distinguishable_limit) {
    const double sigma = 1.3e-12;
    const std::vector<double> d{0.0, sigma * std::sqrt(2 * std::log(2.0)), 10 * sigma};
    const auto h = hom_scan(d, sigma);
    EXPECT_NEAR(h[0].p_coincidence, 0.0, kTol);
    EXPECT_NEAR(h[1].overlap_v, 0.5, kTol);
    EXPECT_NEAR(h[1].p_coincidence, 0.375, kTol);
    EXPECT_NEAR(h[2].p_coincidence, 0.5, 1e-6);
    EXPECT_THROW(hom_scan(d, 0.0), ValidationError);
}

TEST(hom_scan, matches_dense_reference_and_is_monotone) {
    const double sigma = 1.0;
    std::vector<double> d;
    for (double t = 0; t <= 5; t += 0.1) d.push_back(t);
    const auto h = hom_scan(d, sigma);
    const oracle::ModeIndex idx({"bs_in1", "bs_in2", "bs_out1", "bs_out2"});
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double v = std::exp(-d[i] * d[i] / 2);
        Eigen::VectorXcd x = Eigen::VectorXcd::Zero(idx.size()), y = Eigen::VectorXcd::Zero(idx.size());
        x(idx[{"bs_in1", Polarization::H, 0}]) = 1.0;
        y(idx[{"bs_in2", Polarization::H, 0}]) = v;
        y(idx[{"bs_in2", Polarization::H, 1}]) = std::sqrt(1 - v * v);
        const auto t = oracle::evolve(oracle::product_tensor(x, y), oracle::dense(bs5050("bs_in1", "bs_in2", "bs_out1", "bs_out2"), idx));
        EXPECT_NEAR(h[i].p_coincidence, oracle::joint_probability(t, idx, "bs_out1", ket_h(), "bs_out2", ket_h()), kTol);
        EXPECT_NEAR(h[i].p_coincidence, (1 - v * v) / 2, kTol);
        if (i > 0) {
            EXPECT_GE(h[i].p_coincidence, h[i - 1].p_coincidence);
        }
    }
}
