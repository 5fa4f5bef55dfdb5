// device.hpp
// The nondeterministic polarization-measurement device as a Fock-level
// network, and its action as a two-qubit operation on coincidence.
//
// Layout on modes sH, sV, mH, mV (+ one loss ancilla per balanced arm):
//   1. 50:50 splitter across mH/mV (meter into the controlled-phase frame)
//   2. eta = 1/3 splitter across sV and the transformed mV (conditional sign)
//   3. eta = 1/3 loss splitters on sH and the transformed mH
//   4. inverse 50:50 splitter restoring mH/mV
//   5. coincidence projection
// In the kept subspace this is a CNOT from signal to meter with amplitude 1/3.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "fock.hpp"
#include "types.hpp"

namespace weakval {

struct DeviceConfig {
    double interfering_eta = 1.0 / 3.0;
    double balance_eta = 1.0 / 3.0;
    double hadamard_eta = 0.5;

    void validate() const {
        for (double eta : {interfering_eta, balance_eta, hadamard_eta})
            require(std::isfinite(eta) && eta >= 0.0 && eta <= 1.0, errc::invalid_argument,
                    "device transmissivities must lie in [0, 1]");
    }
};

struct DeviceModes {
    fock::ModeId sH, sV, mH, mV, loss_s, loss_m;

    fock::ModePair signal() const { return {sH, sV}; }
    fock::ModePair meter() const { return {mH, mV}; }

    /// Registers the six device modes, optionally suffixed (for labelled copies).
    static DeviceModes register_on(fock::ModeRegistry& reg, const std::string& suffix = "") {
        return {reg.add("sH" + suffix), reg.add("sV" + suffix), reg.add("mH" + suffix),
                reg.add("mV" + suffix), reg.add("loss_s" + suffix), reg.add("loss_m" + suffix)};
    }
};

inline std::vector<fock::BeamSplitterSpec> device_network(const DeviceModes& m, const DeviceConfig& cfg) {
    cfg.validate();
    return {
        {m.mH, m.mV, cfg.hadamard_eta},
        {m.sV, m.mV, cfg.interfering_eta},
        {m.sH, m.loss_s, cfg.balance_eta},
        {m.mH, m.loss_m, cfg.balance_eta},
        {m.mV, m.mH, cfg.hadamard_eta},
    };
}

inline fock::FockState propagate(fock::FockState state, const std::vector<fock::BeamSplitterSpec>& network) {
    for (const auto& bs : network) state = fock::apply_beam_splitter(state, bs);
    return state;
}

namespace detail {

inline void require_normalized(const Vec2& v, const char* what) {
    require(std::abs(v.squaredNorm() - 1.0) <= 1e-12, errc::invalid_state, what);
}

/// Raw coincidence amplitudes for a product input of one signal and one meter photon.
inline Vec4 device_raw_amplitudes(const Vec2& signal, const Vec2& meter, const DeviceConfig& cfg) {
    fock::ModeRegistry reg;
    const DeviceModes m = DeviceModes::register_on(reg);
    fock::FockState state(reg);
    state.create({{m.sH, signal(0)}, {m.sV, signal(1)}});
    state.create({{m.mH, meter(0)}, {m.mV, meter(1)}});
    state = propagate(std::move(state), device_network(m, cfg));
    return fock::coincidence_amplitudes(state, m.signal(), m.meter());
}

} // namespace detail

/// Conditioned output state for a signal photon and a meter preparation.
inline TwoQubitState run_device(const Polarization& signal, const MeterSetting& meter,
                                const DeviceConfig& cfg = {}) {
    const Vec4 amps = detail::device_raw_amplitudes(signal.vec(), meter.state().vec(), cfg);
    TwoQubitState out;
    out.success_prob = amps.squaredNorm();
    if (out.success_prob > 0.0) out.amplitudes = amps / std::sqrt(out.success_prob);
    return out;
}

/// 4x4 operator of the device in the kept subspace, columns indexed by the
/// product input |signal>|meter>. G^dagger G = success probability on every input.
inline Mat4 device_operator(const DeviceConfig& cfg = {}) {
    Mat4 g;
    for (int s = 0; s < 2; ++s)
        for (int m = 0; m < 2; ++m) {
            Vec2 sv = Vec2::Zero(), mv = Vec2::Zero();
            sv(s) = 1.0;
            mv(m) = 1.0;
            g.col(2 * s + m) = detail::device_raw_amplitudes(sv, mv, cfg);
        }
    return g;
}

/// (P_HH, P_HV, P_VH, P_VV), signal label first.
inline std::array<double, 4> device_meter_distribution(const TwoQubitState& state) {
    require(!state.empty(), errc::zero_norm, "distribution of an empty branch");
    require(std::abs(state.amplitudes.squaredNorm() - 1.0) <= 1e-12, errc::invalid_state,
            "two-qubit state must be normalized");
    std::array<double, 4> p{};
    for (int i = 0; i < 4; ++i) p[i] = std::norm(state.amplitudes(i));
    return p;
}

/// Closed-form post-gate state (ag|H> + bg'|V>)|H> + (ag'|H> + bg|V>)|V>.
inline Vec4 ideal_output(const Polarization& signal, const MeterSetting& meter) {
    const cplx a = signal.alpha(), b = signal.beta();
    const double g = meter.gamma(), gb = meter.gammabar();
    Vec4 v;
    v << a * g, a * gb, b * gb, b * g;
    return v / v.norm();
}

/// max over per-qubit phases diag(1, e^{ia}) (x) diag(1, e^{ib}) of |<target|U|state>|^2.
/// Global phase is removed by the modulus.
inline double local_phase_fidelity(const Vec4& target, const Vec4& state) {
    std::array<cplx, 4> c;
    for (int i = 0; i < 4; ++i) c[i] = std::conj(target(i)) * state(i);
    auto overlap = [&](double a, double b) {
        return std::abs(c[0] + c[1] * std::polar(1.0, b) + c[2] * std::polar(1.0, a) +
                        c[3] * std::polar(1.0, a + b));
    };
    double best = 0.0;
    for (double a0 : {0.0, pi / 2, pi, 3 * pi / 2}) {
        double a = a0, b = 0.0;
        for (int it = 0; it < 50; ++it) {
            // |X + Y e^{ib}| is maximized at b = arg X - arg Y.
            const cplx xb = c[0] + c[2] * std::polar(1.0, a);
            const cplx yb = c[1] + c[3] * std::polar(1.0, a);
            if (std::abs(yb) > 0 && std::abs(xb) > 0) b = std::arg(xb) - std::arg(yb);
            const cplx xa = c[0] + c[1] * std::polar(1.0, b);
            const cplx ya = c[2] + c[3] * std::polar(1.0, b);
            if (std::abs(ya) > 0 && std::abs(xa) > 0) a = std::arg(xa) - std::arg(ya);
        }
        best = std::max(best, overlap(a, b));
    }
    best = std::max(best, overlap(0.0, 0.0));
    return best * best;
}

} // namespace weakval
