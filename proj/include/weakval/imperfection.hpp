// imperfection.hpp
// Imperfect mode matching: the device output is a visibility-weighted mixture
// of indistinguishable (interfering) and distinguishable (labelled) photon
// propagation, optionally followed by white noise. Provides the model's
// postselection statistics, the fit of the mixture to a measured P(A), the
// predicted weak-value curve and the inversion back to <S1>.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "channel.hpp"
#include "device.hpp"
#include "error.hpp"
#include "fock.hpp"
#include "types.hpp"
#include "weak_values.hpp"

namespace weakval {

struct ImperfectionParams {
    double visibility = 1.0; // weight of the interfering branch
    double depol = 0.0;      // output white-noise weight

    void validate() const {
        require(std::isfinite(visibility) && visibility >= 0.0 && visibility <= 1.0, errc::invalid_argument,
                "visibility must lie in [0, 1]");
        require(std::isfinite(depol) && depol >= 0.0 && depol <= 1.0, errc::invalid_argument,
                "depolarization must lie in [0, 1]");
    }
};

namespace detail {

/// Raw coincidence amplitudes when the photons carry orthogonal hidden
/// labels. Both labelled copies see the same network; detectors do not
/// resolve the label, so the two ways of producing a coincidence
/// (signal photon at the signal output, or swapped) are returned separately
/// and must be combined in probability.
inline std::array<Vec4, 2> distinguishable_branches(const Vec2& signal, const Vec2& meter,
                                                    const DeviceConfig& cfg) {
    fock::ModeRegistry reg;
    const DeviceModes s = DeviceModes::register_on(reg, "#s");
    const DeviceModes m = DeviceModes::register_on(reg, "#m");
    fock::FockState state(reg);
    state.create({{s.sH, signal(0)}, {s.sV, signal(1)}});
    state.create({{m.mH, meter(0)}, {m.mV, meter(1)}});
    for (const auto* copy : {&s, &m}) state = propagate(std::move(state), device_network(*copy, cfg));
    return {fock::coincidence_amplitudes(state, s.signal(), m.meter()),
            fock::coincidence_amplitudes(state, m.signal(), s.meter())};
}

} // namespace detail

struct DistinguishableOutput {
    Mat4 rho = Mat4::Zero(); // conditioned, unit trace (zero if success_prob == 0)
    double success_prob = 0.0;
};

/// The device with interference between the two photons removed.
inline DistinguishableOutput distinguishable_device(const Polarization& signal, const MeterSetting& meter,
                                                    const DeviceConfig& cfg = {}) {
    const auto br = detail::distinguishable_branches(signal.vec(), meter.state().vec(), cfg);
    Mat4 rho = projector(br[0]) + projector(br[1]);
    DistinguishableOutput out;
    out.success_prob = real_trace(rho);
    if (out.success_prob > 0.0) out.rho = rho / out.success_prob;
    return out;
}

/// Kraus pair of the distinguishable branch, columns indexed by |signal>|meter>.
inline std::array<Mat4, 2> distinguishable_operators(const DeviceConfig& cfg = {}) {
    std::array<Mat4, 2> ops;
    for (int s = 0; s < 2; ++s)
        for (int m = 0; m < 2; ++m) {
            Vec2 sv = Vec2::Zero(), mv = Vec2::Zero();
            sv(s) = 1.0;
            mv(m) = 1.0;
            const auto br = detail::distinguishable_branches(sv, mv, cfg);
            ops[0].col(2 * s + m) = br[0];
            ops[1].col(2 * s + m) = br[1];
        }
    return ops;
}

/// v (ideal) + (1 - v) (distinguishable), then white noise of weight p.
/// The meter preparation is part of the channel input, so the process does
/// not depend on the measurement strength.
inline TwoQubitChannel imperfect_channel(const ImperfectionParams& params, const DeviceConfig& cfg = {}) {
    params.validate();
    std::vector<Mat4> kraus;
    const double v = params.visibility;
    if (v > 0.0) kraus.push_back(std::sqrt(v) * device_operator(cfg));
    if (v < 1.0)
        for (const auto& d : distinguishable_operators(cfg)) kraus.push_back(std::sqrt(1.0 - v) * d);
    return TwoQubitChannel(std::move(kraus)).depolarized(params.depol);
}

struct ModelStatistics {
    double success_prob = 0.0;
    PostselectedProbs post;
    std::array<double, 4> joint{}; // unpostselected (HH, HV, VH, VV), normalized
};

inline Mat4 product_input(const Polarization& signal, const MeterSetting& meter) {
    return projector(kron(signal.vec(), meter.state().vec()));
}

/// Coincidence statistics of a channel for a product input, with the signal
/// postselected on `post`.
inline ModelStatistics channel_statistics(const TwoQubitChannel& channel, const Polarization& signal,
                                          const MeterSetting& meter,
                                          const PostselectState& post = PostselectState::A()) {
    const Mat4 rho = channel.apply(product_input(signal, meter));
    ModelStatistics out;
    out.success_prob = real_trace(rho);
    require(out.success_prob > 0.0, errc::zero_norm, "channel never produces a coincidence for this input");
    for (int i = 0; i < 4; ++i) out.joint[i] = rho(i, i).real() / out.success_prob;
    const Mat2 pp = projector(post.state.vec());
    Mat2 h = Mat2::Zero(), vv = Mat2::Zero();
    h(0, 0) = 1.0;
    vv(1, 1) = 1.0;
    const double nH = real_trace(kron(pp, h) * rho);
    const double nV = real_trace(kron(pp, vv) * rho);
    out.post.post = (nH + nV) / out.success_prob;
    if (out.post.post > postselect_floor) {
        out.post.meter_H = nH / (nH + nV);
        out.post.meter_V = nV / (nH + nV);
    }
    return out;
}

inline double model_postselection_probability(const ImperfectionParams& params, const Polarization& psi,
                                              const MeterSetting& meter, const DeviceConfig& cfg = {}) {
    return channel_statistics(imperfect_channel(params, cfg), psi, meter).post.post;
}

namespace detail {

template <class F>
double solve_bracketed(F f, double lo, double hi) {
    const double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    std::uintmax_t iters = 200;
    auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi,
                                               boost::math::tools::eps_tolerance<double>(52), iters);
    return 0.5 * (r.first + r.second);
}

} // namespace detail

/// Finds the imperfection that makes the model's P(A) equal `target_P_A`.
///
/// The visibility is searched first (p = 0), scanning [0, 1] for a bracket
/// nearest v = 1 because P(A) need not be monotone in v. When the target is
/// outside the range reachable by visibility alone, the white-noise weight
/// is fitted at v = 1 instead (P(A) rises monotonically to 1/2 in p).
inline ImperfectionParams fit_visibility(double target_P_A, const Polarization& psi, const MeterSetting& meter,
                                         const DeviceConfig& cfg = {}) {
    const double ideal = model_postselection_probability({1.0, 0.0}, psi, meter, cfg);
    if (target_P_A < ideal - 1e-15)
        fail(errc::infeasible, "target P(A) is below the ideal device's postselection probability");
    if (std::abs(target_P_A - ideal) <= 1e-15) return {1.0, 0.0};

    auto by_visibility = [&](double v) {
        return model_postselection_probability({v, 0.0}, psi, meter, cfg) - target_P_A;
    };
    constexpr int steps = 200;
    double hi = 1.0, f_hi = by_visibility(hi);
    for (int i = steps - 1; i >= 0; --i) {
        const double lo = static_cast<double>(i) / steps;
        const double f_lo = by_visibility(lo);
        if ((f_lo <= 0.0) != (f_hi <= 0.0) || f_lo == 0.0)
            return {detail::solve_bracketed(by_visibility, lo, hi), 0.0};
        hi = lo;
        f_hi = f_lo;
    }

    auto by_noise = [&](double p) {
        return model_postselection_probability({1.0, p}, psi, meter, cfg) - target_P_A;
    };
    if (by_noise(1.0) < 0.0) fail(errc::infeasible, "target P(A) exceeds what the imperfection model can reach");
    return {1.0, detail::solve_bracketed(by_noise, 0.0, 1.0)};
}

/// Predicted postselected value (P(H|A) - P(V|A)) / K from the imperfect model.
inline double model_weak_value(const TwoQubitChannel& channel, const Polarization& psi, double K) {
    if (K == 0.0) fail(errc::weak_value_unbounded, "weak value is undefined at K = 0");
    const auto st = channel_statistics(channel, psi, MeterSetting::from_strength(K));
    if (!st.post.meter_H) fail(errc::postselection_impossible, "postselection never succeeds");
    return (*st.post.meter_H - *st.post.meter_V) / K;
}

inline std::vector<std::pair<double, double>> model_weak_value_curve(const ImperfectionParams& params,
                                                                     const Polarization& psi,
                                                                     const std::vector<double>& K_grid,
                                                                     const DeviceConfig& cfg = {}) {
    for (double K : K_grid) {
        if (K == 0.0) fail(errc::weak_value_unbounded, "K = 0 in the strength grid");
        require(K > 0.0 && K <= 1.0, errc::invalid_argument, "strengths must lie in (0, 1]");
    }
    const TwoQubitChannel channel = imperfect_channel(params, cfg);
    std::vector<std::pair<double, double>> curve;
    curve.reserve(K_grid.size());
    for (double K : K_grid) curve.emplace_back(K, model_weak_value(channel, psi, K));
    return curve;
}

/// Recovers <S1> of a real-amplitude input from a measured A-postselected
/// weak value. For the ideal device the complementary terms are equal, so
/// <S1> = 2 A<S1> P(A) exactly. Otherwise the model relation is solved over
/// the input angle and, among the solutions, the one whose predicted P(A)
/// is closest to `measured_P_A` is returned.
inline double invert_s1(double measured_weak_value, double measured_P_A, const ImperfectionParams& params,
                        const MeterSetting& meter, const DeviceConfig& cfg = {}) {
    params.validate();
    const double K = meter.strength();
    if (K == 0.0) fail(errc::weak_value_unbounded, "inversion needs K != 0");
    if (params.visibility == 1.0 && params.depol == 0.0) return 2.0 * measured_weak_value * measured_P_A;

    const TwoQubitChannel channel = imperfect_channel(params, cfg);
    auto residual = [&](double theta) {
        return model_weak_value(channel, Polarization::from_angle(theta), K) - measured_weak_value;
    };
    constexpr int steps = 3600;
    std::optional<double> best;
    double best_miss = 0.0;
    double a = 0.0, fa = residual(a);
    for (int i = 1; i <= steps; ++i) {
        const double b = pi * i / steps;
        const double fb = residual(b);
        if (fa == 0.0 || (fa < 0.0) != (fb < 0.0)) {
            const double theta = detail::solve_bracketed(residual, a, b);
            const double miss = std::abs(
                channel_statistics(channel, Polarization::from_angle(theta), meter).post.post - measured_P_A);
            if (!best || miss < best_miss) {
                best = theta;
                best_miss = miss;
            }
        }
        a = b;
        fa = fb;
    }
    if (!best) fail(errc::infeasible, "measured weak value is outside the model's range");
    return std::cos(2.0 * *best);
}

} // namespace weakval
