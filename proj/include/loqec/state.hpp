#pragma once

#include <array>
#include <cmath>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "loqec/errors.hpp"
#include "loqec/linear_element.hpp"
#include "loqec/mode.hpp"
#include "loqec/polarization.hpp"

namespace loqec {

using Wavepacket = std::vector<Complex>;

/// Input description of one photon: where it enters, its polarization, and its
/// wavepacket over the shared orthonormal temporal basis.
class SinglePhotonSpec {
public:
    SinglePhotonSpec(PathId path, Jones jones, Wavepacket wavepacket = {Complex{1.0}})
        : path_(std::move(path)), jones_(jones), wavepacket_(std::move(wavepacket)) {
        if (std::abs(jones_.norm_squared() - 1.0) > 1e-12) {
            throw ValidationError("photon on '" + path_.name() + "': Jones vector must have unit norm");
        }
        if (wavepacket_.empty() || wavepacket_.size() > std::size_t(kTemporalModes)) {
            throw ValidationError("photon on '" + path_.name() + "': wavepacket must have 1 or 2 components");
        }
        double n = 0.0;
        for (auto c : wavepacket_) n += std::norm(c);
        if (std::abs(n - 1.0) > 1e-12) {
            throw ValidationError("photon on '" + path_.name() + "': wavepacket must have unit norm");
        }
        wavepacket_.resize(kTemporalModes);
    }

    const PathId& path() const { return path_; }
    const Jones& jones() const { return jones_; }
    const Wavepacket& wavepacket() const { return wavepacket_; }

private:
    PathId path_;
    Jones jones_;
    Wavepacket wavepacket_;
};

/// Scalar overlap v = <e_first|e_second> between two photon wavepackets.
class DistinguishabilitySpec {
public:
    explicit DistinguishabilitySpec(double overlap_v) : v_(overlap_v) {
        if (!(v_ >= 0.0 && v_ <= 1.0)) throw ValidationError("overlap v must lie in [0, 1]");
    }

    /// Gaussian wavepackets offset by `delay_s`: v = exp(-tau^2 / (2 sigma^2)).
    static DistinguishabilitySpec from_delay(double delay_s, double coherence_s) {
        if (!(coherence_s > 0.0)) throw ValidationError("coherence time must be positive");
        return DistinguishabilitySpec(std::exp(-delay_s * delay_s / (2.0 * coherence_s * coherence_s)));
    }

    double overlap() const { return v_; }

    /// The second photon's wavepacket expressed in the basis (e0 = first photon, e1).
    Wavepacket wavepacket() const { return {Complex{v_}, Complex{std::sqrt(std::max(0.0, 1.0 - v_ * v_))}}; }

private:
    double v_;
};

/// Subnormalized one-photon state (a conditional state left after a measurement).
class SinglePhotonState {
public:
    using Amplitudes = std::map<ModeLabel, Complex>;

    SinglePhotonState() = default;
    explicit SinglePhotonState(Amplitudes amps) : amps_(std::move(amps)) { prune(); }

    static SinglePhotonState from_spec(const SinglePhotonSpec& s) {
        Amplitudes a;
        for (auto pol : kPolarizations)
            for (int t = 0; t < kTemporalModes; ++t) a[ModeLabel(s.path(), pol, t)] = s.jones()[pol] * s.wavepacket()[std::size_t(t)];
        return SinglePhotonState(std::move(a));
    }

    const Amplitudes& amplitudes() const { return amps_; }

    Complex amplitude(const ModeLabel& m) const {
        const auto it = amps_.find(m);
        return it == amps_.end() ? Complex{} : it->second;
    }

    double norm_squared() const {
        double n = 0.0;
        for (const auto& [m, c] : amps_) n += std::norm(c);
        return n;
    }

    bool empty() const { return amps_.empty(); }

private:
    void prune() { std::erase_if(amps_, [](const auto& kv) { return std::abs(kv.second) < kZeroTolerance; }); }

    Amplitudes amps_;
};

/// Two photons over labeled modes, keyed by canonical unordered mode pairs.
///
/// The amplitude on a pair (m, n) with m != n multiplies a+_m a+_n |0>; on (m, m)
/// it multiplies the normalized doubly occupied state (a+_m)^2 |0> / sqrt 2. The
/// squared norm is therefore the plain sum of |amplitude|^2.
class TwoPhotonState {
public:
    using Amplitudes = std::map<ModePair, Complex>;

    TwoPhotonState() = default;

    TwoPhotonState(std::set<PathId> paths, Amplitudes amps) : paths_(std::move(paths)), amps_(std::move(amps)) {
        for (const auto& [pair, c] : amps_) {
            if (!paths_.contains(pair.first().path) || !paths_.contains(pair.second().path)) {
                throw ConfigurationError("amplitude on undeclared path");
            }
        }
        prune();
        if (norm_squared() > 1.0 + 1e-12) throw ValidationError("two-photon state norm exceeds 1");
    }

    const std::set<PathId>& paths() const { return paths_; }
    const Amplitudes& amplitudes() const { return amps_; }

    Complex amplitude(const ModeLabel& a, const ModeLabel& b) const {
        const auto it = amps_.find(ModePair(a, b));
        return it == amps_.end() ? Complex{} : it->second;
    }

    double norm_squared() const {
        double n = 0.0;
        for (const auto& [p, c] : amps_) n += std::norm(c);
        return n;
    }

    TwoPhotonState scaled(double factor) const {
        TwoPhotonState out = *this;
        for (auto& [p, c] : out.amps_) c *= factor;
        out.prune();
        return out;
    }

    TwoPhotonState normalized() const {
        const double n = norm_squared();
        if (n <= 0.0) throw ValidationError("cannot normalize a zero state");
        return scaled(1.0 / std::sqrt(n));
    }

    /// Paths renamed by `rename`; amplitudes are carried over unchanged.
    template <typename F>
    TwoPhotonState relabeled(F&& rename) const {
        std::set<PathId> paths;
        for (const auto& p : paths_) paths.insert(rename(p));
        if (paths.size() != paths_.size()) throw ConfigurationError("path relabeling is not injective");
        Amplitudes amps;
        for (const auto& [pair, c] : amps_) {
            ModeLabel a(rename(pair.first().path), pair.first().pol, pair.first().temporal);
            ModeLabel b(rename(pair.second().path), pair.second().pol, pair.second().temporal);
            amps.emplace(ModePair(a, b), c);
        }
        return TwoPhotonState(std::move(paths), std::move(amps));
    }

private:
    void prune() { std::erase_if(amps_, [](const auto& kv) { return std::abs(kv.second) < kZeroTolerance; }); }

    std::set<PathId> paths_;
    Amplitudes amps_;
};

/// Polarization analyzer on one path: projects onto `state`.
struct PolarizationProjector {
    PathId path;
    Jones state;

    PolarizationProjector(PathId p, Jones s) : path(std::move(p)), state(s) {
        if (std::abs(state.norm_squared() - 1.0) > 1e-12) throw ValidationError("projector state must have unit norm");
    }
};

namespace detail {

inline void accumulate(TwoPhotonState::Amplitudes& amps, const ModeLabel& a, const ModeLabel& b, Complex c) {
    amps[ModePair(a, b)] += c;
}

/// Adds the canonical amplitudes of c * (sum_k x_k a+_k)(sum_l y_l a+_l)|0>.
inline void add_product(TwoPhotonState::Amplitudes& amps, const std::vector<std::pair<ModeLabel, Complex>>& x,
                        const std::vector<std::pair<ModeLabel, Complex>>& y, Complex c) {
    for (const auto& [k, xk] : x)
        for (const auto& [l, yl] : y) accumulate(amps, k, l, k == l ? c * std::numbers::sqrt2 * xk * yl : c * xk * yl);
}

} // namespace detail

/// Normalized state a+_q a+_a |0> for two photons.
///
/// Wavepackets are re-expressed by Gram-Schmidt with the first photon's wavepacket
/// as temporal index 0: the second becomes <e0|a> e0 + |a_perp| e1.
inline TwoPhotonState product_state(const SinglePhotonSpec& q, const SinglePhotonSpec& a) {
    const auto& e0 = q.wavepacket();
    const auto& wa = a.wavepacket();
    Complex c0{};
    for (int t = 0; t < kTemporalModes; ++t) c0 += std::conj(e0[std::size_t(t)]) * wa[std::size_t(t)];
    double residual = 0.0;
    for (int t = 0; t < kTemporalModes; ++t) residual += std::norm(wa[std::size_t(t)] - c0 * e0[std::size_t(t)]);
    const std::array<Complex, 2> q_coeff{Complex{1.0}, Complex{}};
    const std::array<Complex, 2> a_coeff{c0, Complex{std::sqrt(residual)}};

    auto terms = [](const SinglePhotonSpec& s, const std::array<Complex, 2>& coeff) {
        std::vector<std::pair<ModeLabel, Complex>> out;
        for (auto pol : kPolarizations)
            for (int t = 0; t < kTemporalModes; ++t) {
                const Complex amp = s.jones()[pol] * coeff[std::size_t(t)];
                if (amp != Complex{}) out.emplace_back(ModeLabel(s.path(), pol, t), amp);
            }
        return out;
    };

    TwoPhotonState::Amplitudes amps;
    detail::add_product(amps, terms(q, q_coeff), terms(a, a_coeff), Complex{1.0});
    double n = 0.0;
    for (const auto& [p, c] : amps) n += std::norm(c);
    const double scale = 1.0 / std::sqrt(n);
    for (auto& [p, c] : amps) c *= scale;
    return TwoPhotonState({q.path(), a.path()}, std::move(amps));
}

/// Applies a linear element to every photon of the state.
inline TwoPhotonState apply_element(const TwoPhotonState& s, const LinearElement& e) {
    for (const auto& p : e.inputs()) {
        if (!s.paths().contains(p)) {
            throw ConfigurationError(e.name() + ": references undeclared path '" + p.name() + "'");
        }
    }
    std::set<PathId> paths = s.paths();
    for (const auto& p : e.inputs()) paths.erase(p);
    for (const auto& p : e.outputs()) {
        if (paths.contains(p)) throw ConfigurationError(e.name() + ": output path '" + p.name() + "' is already occupied");
        paths.insert(p);
    }

    TwoPhotonState::Amplitudes amps;
    for (const auto& [pair, c] : s.amplitudes()) {
        const auto u = e.image(pair.first());
        if (!pair.doubly_occupied()) {
            detail::add_product(amps, u, e.image(pair.second()), c);
            continue;
        }
        // (a+_m)^2/sqrt2 maps to sum_k u_k^2 |2_k> + sqrt2 sum_{k<l} u_k u_l a+_k a+_l
        for (std::size_t i = 0; i < u.size(); ++i) {
            detail::accumulate(amps, u[i].first, u[i].first, c * u[i].second * u[i].second);
            for (std::size_t j = i + 1; j < u.size(); ++j) {
                detail::accumulate(amps, u[i].first, u[j].first, c * std::numbers::sqrt2 * u[i].second * u[j].second);
            }
        }
    }
    return TwoPhotonState(std::move(paths), std::move(amps));
}

inline SinglePhotonState apply_element(const SinglePhotonState& s, const LinearElement& e) {
    SinglePhotonState::Amplitudes amps;
    for (const auto& [m, c] : s.amplitudes())
        for (const auto& [k, u] : e.image(m)) amps[k] += c * u;
    return SinglePhotonState(std::move(amps));
}

/// Probability that a photon passes `proj` on its path (temporal modes summed).
inline double analyzer_probability(const SinglePhotonState& s, const PolarizationProjector& proj) {
    std::array<Complex, kTemporalModes> amp{};
    for (const auto& [m, c] : s.amplitudes()) {
        if (m.path == proj.path) amp[std::size_t(m.temporal)] += std::conj(proj.state[m.pol]) * c;
    }
    double p = 0.0;
    for (auto a : amp) p += std::norm(a);
    return p;
}

/// Joint detection probability for bucket detectors behind two polarization projectors.
/// Temporal outcomes are summed incoherently.
inline double joint_probability(const TwoPhotonState& s, const PolarizationProjector& a, const PolarizationProjector& b) {
    if (a.path == b.path) throw UsageError("joint_probability needs projectors on distinct paths");
    std::array<std::array<Complex, kTemporalModes>, kTemporalModes> amp{};
    for (const auto& [pair, c] : s.amplitudes()) {
        const ModeLabel* on_a = nullptr;
        const ModeLabel* on_b = nullptr;
        if (pair.first().path == a.path && pair.second().path == b.path) {
            on_a = &pair.first();
            on_b = &pair.second();
        } else if (pair.second().path == a.path && pair.first().path == b.path) {
            on_a = &pair.second();
            on_b = &pair.first();
        } else {
            continue;
        }
        amp[std::size_t(on_a->temporal)][std::size_t(on_b->temporal)] +=
            c * std::conj(a.state[on_a->pol]) * std::conj(b.state[on_b->pol]);
    }
    double p = 0.0;
    for (const auto& row : amp)
        for (auto x : row) p += std::norm(x);
    return p;
}

/// Conditional state of the unmeasured photon for one temporal outcome of the measured one.
struct ConditionalMember {
    int temporal = 0;
    SinglePhotonState state;

    double probability() const { return state.norm_squared(); }
};

/// Incoherent collection of conditional states; total weight is the outcome probability.
struct Ensemble {
    std::vector<ConditionalMember> members;

    double probability() const {
        double p = 0.0;
        for (const auto& m : members) p += m.probability();
        return p;
    }
};

/// Terms with exactly one photon on `path`, and everything else.
inline std::pair<TwoPhotonState, TwoPhotonState> split_by_occupancy(const TwoPhotonState& s, const PathId& path) {
    TwoPhotonState::Amplitudes one;
    TwoPhotonState::Amplitudes rest;
    for (const auto& [pair, c] : s.amplitudes()) (pair.occupancy(path) == 1 ? one : rest).emplace(pair, c);
    return {TwoPhotonState(s.paths(), std::move(one)), TwoPhotonState(s.paths(), std::move(rest))};
}

/// Projects the photon on `proj.path` onto `proj.state`, keeping one member per
/// temporal outcome of that photon. Zero-weight members are dropped.
inline Ensemble condition_on(const TwoPhotonState& s, const PolarizationProjector& proj) {
    std::array<SinglePhotonState::Amplitudes, kTemporalModes> conditional;
    for (const auto& [pair, c] : s.amplitudes()) {
        if (pair.occupancy(proj.path) != 1) {
            throw StructuralError("condition_on: path '" + proj.path.name() + "' does not hold exactly one photon in every term");
        }
        const bool first_measured = pair.first().path == proj.path;
        const ModeLabel& measured = first_measured ? pair.first() : pair.second();
        const ModeLabel& other = first_measured ? pair.second() : pair.first();
        conditional[std::size_t(measured.temporal)][other] += c * std::conj(proj.state[measured.pol]);
    }
    Ensemble out;
    for (int t = 0; t < kTemporalModes; ++t) {
        SinglePhotonState member(std::move(conditional[std::size_t(t)]));
        if (member.norm_squared() > kZeroTolerance * kZeroTolerance) out.members.push_back({t, std::move(member)});
    }
    return out;
}

} // namespace loqec
