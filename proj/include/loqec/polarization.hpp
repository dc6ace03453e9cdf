#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>

namespace loqec {

using Complex = std::complex<double>;

/// Amplitude magnitude below which a term is treated as absent.
inline constexpr double kZeroTolerance = 1e-12;

enum class Polarization { H = 0, V = 1 };

inline constexpr std::array<Polarization, 2> kPolarizations{Polarization::H, Polarization::V};

inline constexpr const char* to_string(Polarization p) { return p == Polarization::H ? "H" : "V"; }

/// Polarization state over (H, V).
struct Jones {
    Complex h{};
    Complex v{};

    constexpr Complex operator[](Polarization p) const { return p == Polarization::H ? h : v; }
    double norm_squared() const { return std::norm(h) + std::norm(v); }

    friend Jones operator*(Complex c, const Jones& j) { return {c * j.h, c * j.v}; }
    friend Jones operator+(const Jones& a, const Jones& b) { return {a.h + b.h, a.v + b.v}; }
    friend Jones operator-(const Jones& a, const Jones& b) { return {a.h - b.h, a.v - b.v}; }
};

inline Complex inner(const Jones& a, const Jones& b) { return std::conj(a.h) * b.h + std::conj(a.v) * b.v; }

inline double radians(double degrees) { return degrees * std::numbers::pi / 180.0; }
inline double degrees(double radians) { return radians * 180.0 / std::numbers::pi; }

inline Jones ket_h() { return {1.0, 0.0}; }
inline Jones ket_v() { return {0.0, 1.0}; }

/// Linear polarization at `angle_deg` from horizontal.
inline Jones linear(double angle_deg) {
    const double a = radians(angle_deg);
    return {std::cos(a), std::sin(a)};
}

// Computational basis: |0> is +45 degrees, |1> is -45 degrees.
inline Jones ket_zero() { return {std::numbers::sqrt2 / 2, std::numbers::sqrt2 / 2}; }
inline Jones ket_one() { return {std::numbers::sqrt2 / 2, -std::numbers::sqrt2 / 2}; }

/// alpha|0> + beta|1> expressed over (H, V).
inline Jones from_computational(Complex alpha, Complex beta) {
    const double r = std::numbers::sqrt2 / 2;
    return {r * (alpha + beta), r * (alpha - beta)};
}

/// Inverse of from_computational: returns (alpha, beta).
inline std::array<Complex, 2> to_computational(const Jones& j) {
    const double r = std::numbers::sqrt2 / 2;
    return {r * (j.h + j.v), r * (j.h - j.v)};
}

} // namespace loqec
