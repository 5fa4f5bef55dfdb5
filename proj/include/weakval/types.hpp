// types.hpp
// Value types for the signal photon, the meter preparation, postselection
// targets and the conditioned two-qubit output.

#pragma once

#include <cmath>
#include <string>

#include "error.hpp"
#include "linalg.hpp"

namespace weakval {

inline constexpr double norm_tolerance = 1e-12;

/// Single-photon polarization alpha|H> + beta|V>.
class Polarization {
public:
    Polarization(cplx alpha, cplx beta) : alpha_(alpha), beta_(beta) {
        require(std::isfinite(alpha.real()) && std::isfinite(alpha.imag()) &&
                    std::isfinite(beta.real()) && std::isfinite(beta.imag()),
                errc::invalid_state, "polarization amplitudes must be finite");
        require(std::abs(std::norm(alpha) + std::norm(beta) - 1.0) <= norm_tolerance,
                errc::invalid_state, "polarization must satisfy |alpha|^2 + |beta|^2 = 1");
    }

    /// cos(theta)|H> + sin(theta)|V>, theta in radians.
    static Polarization from_angle(double theta) { return {std::cos(theta), std::sin(theta)}; }
    static Polarization from_degrees(double deg) { return from_angle(deg * pi / 180.0); }

    /// Normalizes arbitrary (non-zero) amplitudes.
    static Polarization normalized(cplx alpha, cplx beta) {
        const double n = std::sqrt(std::norm(alpha) + std::norm(beta));
        require(n > 0.0, errc::zero_norm, "cannot normalize a zero vector");
        return {alpha / n, beta / n};
    }

    static Polarization H() { return {1.0, 0.0}; }
    static Polarization V() { return {0.0, 1.0}; }
    static Polarization D() { return {M_SQRT1_2, M_SQRT1_2}; }
    static Polarization A() { return {M_SQRT1_2, -M_SQRT1_2}; }
    static Polarization R() { return {M_SQRT1_2, cplx(0, M_SQRT1_2)}; }

    cplx alpha() const noexcept { return alpha_; }
    cplx beta() const noexcept { return beta_; }
    bool is_real() const noexcept { return alpha_.imag() == 0.0 && beta_.imag() == 0.0; }
    Vec2 vec() const { return Vec2(alpha_, beta_); }

private:
    cplx alpha_;
    cplx beta_;
};

/// Meter preparation gamma|H> + gammabar|V> with real gamma in [0, 1].
class MeterSetting {
public:
    static MeterSetting from_gamma(double gamma) {
        require(std::isfinite(gamma) && gamma >= 0.0 && gamma <= 1.0, errc::invalid_argument,
                "gamma must lie in [0, 1]");
        const double gb = std::sqrt(std::max(0.0, 1.0 - gamma * gamma));
        return MeterSetting(gamma, gb, gamma * gamma - gb * gb);
    }

    /// Inverts K = 2 gamma^2 - 1.
    static MeterSetting from_strength(double K) {
        require(std::isfinite(K) && K >= -1.0 && K <= 1.0, errc::invalid_argument,
                "measurement strength must lie in [-1, 1]");
        return MeterSetting(std::sqrt((1.0 + K) / 2.0), std::sqrt((1.0 - K) / 2.0), K);
    }

    double gamma() const noexcept { return gamma_; }
    double gammabar() const noexcept { return gammabar_; }
    double strength() const noexcept { return strength_; }
    /// Strengths below zero are legal but outside the explored regime.
    bool negative_strength() const noexcept { return gamma_ < M_SQRT1_2; }
    Polarization state() const { return {gamma_, gammabar_}; }

private:
    MeterSetting(double gamma, double gammabar, double strength)
        : gamma_(gamma), gammabar_(gammabar), strength_(strength) {}

    double gamma_;
    double gammabar_;
    double strength_;
};

/// Target state of the signal postselection; A and D are the named cases.
struct PostselectState {
    Polarization state;
    std::string label;

    static PostselectState A() { return {Polarization::A(), "A"}; }
    static PostselectState D() { return {Polarization::D(), "D"}; }
    static PostselectState custom(const Polarization& p) { return {p, "custom"}; }
};

/// Conditioned signal (x) meter state, index 2*signal + meter with H=0, V=1.
/// Amplitudes are stored normalized; the branch weight lives in success_prob.
struct TwoQubitState {
    Vec4 amplitudes = Vec4::Zero();
    double success_prob = 0.0;

    bool empty() const noexcept { return success_prob == 0.0; }
    cplx at(int signal, int meter) const { return amplitudes(2 * signal + meter); }
};

} // namespace weakval
