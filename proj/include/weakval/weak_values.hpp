// weak_values.hpp
// Qubit-level analytic layer: the induced two-outcome POVM, S1 expectation
// values, postselected meter statistics, weak values and the measurement
// strength ("knowledge") of the device.

#pragma once

#include <cmath>
#include <optional>

#include "error.hpp"
#include "linalg.hpp"
#include "types.hpp"

namespace weakval {

struct Povm {
    Mat2 pi_H;
    Mat2 pi_V;
};

/// Pi_i = (1 + (+-K) S1) / 2, + for meter outcome H.
inline Povm povm_elements(const MeterSetting& meter) {
    const double K = meter.strength();
    const Mat2 one = Mat2::Identity();
    return {0.5 * (one + K * pauli::z()), 0.5 * (one - K * pauli::z())};
}

inline double expectation_s1(const Polarization& psi) {
    return std::norm(psi.alpha()) - std::norm(psi.beta());
}

struct MeterProbs {
    double H;
    double V;
};

/// Outcome probabilities <psi|Pi_i|psi>.
inline MeterProbs meter_probabilities(const Polarization& psi, const Povm& povm) {
    const Vec2 v = psi.vec();
    return {(v.adjoint() * povm.pi_H * v)(0).real(), (v.adjoint() * povm.pi_V * v)(0).real()};
}

/// <S1> recovered from meter statistics; undefined at K = 0.
inline double expectation_s1_from_probs(double pH, double pV, double K) {
    if (K == 0.0) fail(errc::indeterminate_strength, "S1 cannot be recovered at zero measurement strength");
    return (pH - pV) / K;
}

/// Postselection probabilities at or below this are treated as impossible.
inline constexpr double postselect_floor = 1e-20;

struct PostselectedProbs {
    std::optional<double> meter_H; // P(H | post)
    std::optional<double> meter_V; // P(V | post)
    double post = 0.0;             // P(post) on the coincidence branch
};

/// Meter statistics conditioned on finding the signal in `post`, built from
/// the post-gate amplitudes: the signal amplitudes add before squaring.
inline PostselectedProbs postselected_probs(const Polarization& psi, const MeterSetting& meter,
                                            const PostselectState& post) {
    const cplx a = std::conj(post.state.alpha()) * psi.alpha();
    const cplx b = std::conj(post.state.beta()) * psi.beta();
    const double g = meter.gamma(), gb = meter.gammabar();
    const double nH = std::norm(a * g + b * gb);
    const double nV = std::norm(a * gb + b * g);
    PostselectedProbs out;
    out.post = nH + nV;
    if (out.post > postselect_floor) {
        out.meter_H = nH / out.post;
        out.meter_V = nV / out.post;
    }
    return out;
}

/// Postselected mean from conditional meter probabilities: (pH - pV) / K.
inline double weak_value_from_probs(double pH, double pV, double K) {
    require(pH >= -1e-12 && pV >= -1e-12 && std::abs(pH + pV - 1.0) <= 1e-9, errc::malformed_distribution,
            "conditional meter probabilities must be non-negative and sum to 1");
    if (K == 0.0) fail(errc::weak_value_unbounded, "weak value is unbounded at zero measurement strength");
    return (pH - pV) / K;
}

/// Closed-form postselected value of S1.
///
/// With a = <post|H> alpha and b = <post|V> beta this is
///   (|a|^2 - |b|^2) / (|a|^2 + |b|^2 + 4 gamma gammabar Re[a b*]),
/// which for post = |A> and real amplitudes reads
///   (|alpha|^2 - |beta|^2) / (1 - 4 gamma gammabar alpha beta)
/// and tends to Re[(alpha + beta)/(alpha - beta)] as K -> 0.
inline double weak_value_analytic(const Polarization& psi, const MeterSetting& meter,
                                  const PostselectState& post) {
    const cplx a = std::conj(post.state.alpha()) * psi.alpha();
    const cplx b = std::conj(post.state.beta()) * psi.beta();
    const double num = std::norm(a) - std::norm(b);
    const double den = std::norm(a) + std::norm(b) +
                       4.0 * meter.gamma() * meter.gammabar() * (a * std::conj(b)).real();
    if (std::abs(den) < 1e-14)
        fail(errc::divergence, "postselection is orthogonal to the weakly measured state");
    return num / den;
}

/// K = P_HH + P_VV - P_HV - P_VH for a |D> signal input.
inline double knowledge_from_probs(double p_hh, double p_vv, double p_hv, double p_vh) {
    for (double p : {p_hh, p_vv, p_hv, p_vh})
        require(std::isfinite(p) && p >= -1e-12, errc::malformed_distribution, "probabilities must be non-negative");
    require(std::abs(p_hh + p_vv + p_hv + p_vh - 1.0) <= 1e-9, errc::malformed_distribution,
            "coincidence probabilities must sum to 1");
    return p_hh + p_vv - p_hv - p_vh;
}

struct Decomposition {
    double term_A; // A<S1> P(A)
    double term_D; // D<S1> P(D)
    double total;
};

/// Recombines the two complementary postselected values into <S1>.
inline Decomposition expectation_decomposition(const Polarization& psi, const MeterSetting& meter) {
    if (meter.strength() == 0.0) fail(errc::indeterminate_strength, "decomposition needs K != 0");
    const auto A = PostselectState::A();
    const auto D = PostselectState::D();
    const double term_A = weak_value_analytic(psi, meter, A) * postselected_probs(psi, meter, A).post;
    const double term_D = weak_value_analytic(psi, meter, D) * postselected_probs(psi, meter, D).post;
    return {term_A, term_D, term_A + term_D};
}

} // namespace weakval
