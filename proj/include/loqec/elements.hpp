#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <string_view>

#include "loqec/errors.hpp"
#include "loqec/linear_element.hpp"
#include "loqec/state.hpp"

namespace loqec {

/// Half-wave plate with its fast axis at `angle_deg`:
/// Jones matrix [[cos 2w, sin 2w], [sin 2w, -cos 2w]].
inline LinearElement hwp(double angle_deg, const PathId& path) {
    const double w = 2.0 * radians(angle_deg);
    ComplexMatrix m(2, 2);
    m << std::cos(w), std::sin(w), std::sin(w), -std::cos(w);
    return LinearElement("hwp(" + std::to_string(angle_deg) + ")", {path}, {path}, std::move(m));
}

/// Polarizing beam splitter. H is transmitted (in1 -> out1, in2 -> out2) and V is
/// reflected (in1 -> out2, in2 -> out1). Every transfer coefficient is +1.
inline LinearElement pbs(const PathId& in1, const PathId& in2, const PathId& out1, const PathId& out2) {
    const PathId ports[] = {in1, in2, out1, out2};
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
            if (ports[i] == ports[j]) throw ConfigurationError("pbs: repeated path '" + ports[i].name() + "'");
    // channels: 0 = p1:H, 1 = p1:V, 2 = p2:H, 3 = p2:V
    ComplexMatrix m = ComplexMatrix::Zero(4, 4);
    m(0, 0) = 1.0; // in1:H -> out1:H
    m(3, 1) = 1.0; // in1:V -> out2:V
    m(2, 2) = 1.0; // in2:H -> out2:H
    m(1, 3) = 1.0; // in2:V -> out1:V
    return LinearElement("pbs", {in1, in2}, {out1, out2}, std::move(m));
}

/// Polarization-independent 50/50 beam splitter, [[1, 1], [1, -1]] / sqrt 2 per polarization.
inline LinearElement bs5050(const PathId& in1, const PathId& in2, const PathId& out1, const PathId& out2) {
    const PathId ports[] = {in1, in2, out1, out2};
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
            if (ports[i] == ports[j]) throw ConfigurationError("bs5050: repeated path '" + ports[i].name() + "'");
    const double r = std::numbers::sqrt2 / 2;
    ComplexMatrix m = ComplexMatrix::Zero(4, 4);
    for (int pol = 0; pol < 2; ++pol) {
        m(pol, pol) = r;
        m(pol, 2 + pol) = r;
        m(2 + pol, pol) = r;
        m(2 + pol, 2 + pol) = -r;
    }
    return LinearElement("bs5050", {in1, in2}, {out1, out2}, std::move(m));
}

/// Pockels cell with its fast axis horizontal. Driven at the half-wave voltage it
/// applies diag(1, -1), which swaps |0> and |1>; undriven it is the identity.
inline LinearElement pockels(const PathId& path, bool active) {
    ComplexMatrix m = ComplexMatrix::Identity(2, 2);
    if (active) m(1, 1) = -1.0;
    return LinearElement(active ? "pockels(on)" : "pockels(off)", {path}, {path}, std::move(m));
}

/// Moves the photon on one path into the wavepacket v e0 + sqrt(1 - v^2) e1.
///
/// Must run before the photon interferes with anything: every term of the state
/// has to carry that photon in temporal mode 0.
class Delay {
public:
    Delay(PathId path, DistinguishabilitySpec spec) : path_(std::move(path)), spec_(spec) {}

    const PathId& path() const { return path_; }
    const DistinguishabilitySpec& spec() const { return spec_; }

    TwoPhotonState operator()(const TwoPhotonState& s) const {
        if (!s.paths().contains(path_)) throw ConfigurationError("delay: undeclared path '" + path_.name() + "'");
        const Wavepacket wp = spec_.wavepacket();
        auto image = [&](const ModeLabel& m) -> std::vector<std::pair<ModeLabel, Complex>> {
            if (m.path != path_) return {{m, Complex{1.0}}};
            if (m.temporal != 0) {
                throw StructuralError("delay: photon on '" + path_.name() + "' already occupies temporal mode " +
                                      std::to_string(m.temporal));
            }
            std::vector<std::pair<ModeLabel, Complex>> out;
            for (int t = 0; t < kTemporalModes; ++t)
                if (wp[std::size_t(t)] != Complex{}) out.emplace_back(ModeLabel(m.path, m.pol, t), wp[std::size_t(t)]);
            return out;
        };
        TwoPhotonState::Amplitudes amps;
        for (const auto& [pair, c] : s.amplitudes()) {
            if (pair.occupancy(path_) == 2) {
                throw StructuralError("delay: path '" + path_.name() + "' must hold a single photon");
            }
            detail::add_product(amps, image(pair.first()), image(pair.second()), c);
        }
        return TwoPhotonState(s.paths(), std::move(amps));
    }

private:
    PathId path_;
    DistinguishabilitySpec spec_;
};

inline Delay delay(const PathId& path, const DistinguishabilitySpec& spec) { return Delay(path, spec); }

/// Fiber patching between encoder outputs (A, B) and the downstream fibers
/// (C: correction and analysis, D: Z-measurement).
enum class WiringConfig { AC_BD, AD_BC };

inline std::string_view to_string(WiringConfig w) { return w == WiringConfig::AC_BD ? "A:C/B:D" : "A:D/B:C"; }

inline WiringConfig parse_wiring(std::string_view s) {
    if (s == "A:C/B:D") return WiringConfig::AC_BD;
    if (s == "A:D/B:C") return WiringConfig::AD_BC;
    throw ValidationError("unknown wiring '" + std::string(s) + "' (expected A:C/B:D or A:D/B:C)");
}

/// Path permutation realized by the patch; an involution.
inline PathId rewired(const PathId& p, WiringConfig w) {
    const PathId& partner_a = w == WiringConfig::AC_BD ? paths::kC : paths::kD;
    const PathId& partner_b = w == WiringConfig::AC_BD ? paths::kD : paths::kC;
    if (p == paths::kA) return partner_a;
    if (p == partner_a) return paths::kA;
    if (p == paths::kB) return partner_b;
    if (p == partner_b) return paths::kB;
    return p;
}

inline TwoPhotonState rewire(const TwoPhotonState& s, WiringConfig w) {
    return s.relabeled([w](const PathId& p) { return rewired(p, w); });
}

} // namespace loqec
