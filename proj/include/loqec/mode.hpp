#pragma once

#include <compare>
#include <cstdint>
#include <ostream>
#include <string>
#include <utility>

#include "loqec/errors.hpp"
#include "loqec/polarization.hpp"

namespace loqec {

/// Name of a spatial port or fiber.
class PathId {
public:
    PathId() = default;
    explicit PathId(std::string name) : name_(std::move(name)) {}
    PathId(const char* name) : name_(name) {}

    const std::string& name() const { return name_; }

    auto operator<=>(const PathId&) const = default;

    friend std::ostream& operator<<(std::ostream& os, const PathId& p) { return os << p.name_; }

private:
    std::string name_;
};

namespace paths {
inline const PathId kQubitIn{"qubit_in"};
inline const PathId kAncillaIn{"ancilla_in"};
inline const PathId kA{"A"};
inline const PathId kB{"B"};
inline const PathId kC{"C"};
inline const PathId kD{"D"};
} // namespace paths

/// Number of orthonormal temporal wavepackets tracked per photon.
inline constexpr int kTemporalModes = 2;

/// One (path, polarization) channel of a linear element.
struct Channel {
    PathId path;
    Polarization pol = Polarization::H;

    auto operator<=>(const Channel&) const = default;
};

/// A single-photon mode: spatial path, polarization and temporal wavepacket index.
struct ModeLabel {
    PathId path;
    Polarization pol = Polarization::H;
    int temporal = 0;

    ModeLabel() = default;
    ModeLabel(PathId p, Polarization q, int t = 0) : path(std::move(p)), pol(q), temporal(t) {
        if (t < 0 || t >= kTemporalModes) {
            throw ValidationError("temporal index " + std::to_string(t) + " outside the temporal basis");
        }
    }

    Channel channel() const { return {path, pol}; }

    auto operator<=>(const ModeLabel&) const = default;

    friend std::ostream& operator<<(std::ostream& os, const ModeLabel& m) {
        return os << m.path << ':' << to_string(m.pol) << ':' << m.temporal;
    }
};

/// Unordered pair of modes stored with first <= second.
class ModePair {
public:
    ModePair(ModeLabel a, ModeLabel b) {
        if (b < a) std::swap(a, b);
        first_ = std::move(a);
        second_ = std::move(b);
    }

    const ModeLabel& first() const { return first_; }
    const ModeLabel& second() const { return second_; }
    bool doubly_occupied() const { return first_ == second_; }

    /// Photons of this pair found on `path` (0, 1 or 2).
    int occupancy(const PathId& path) const { return int(first_.path == path) + int(second_.path == path); }

    auto operator<=>(const ModePair&) const = default;

private:
    ModeLabel first_;
    ModeLabel second_;
};

} // namespace loqec
