// fock.hpp
// Sparse multimode Fock-space engine for at most two photons: beam
// splitters, balanced losses into ancilla modes and coincidence projection.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "linalg.hpp"
#include "types.hpp"

namespace weakval::fock {

inline constexpr int photon_cap = 2;
inline constexpr double prune_tolerance = 1e-15;

struct ModeId {
    std::size_t index;
    friend bool operator==(ModeId, ModeId) = default;
};

class ModeRegistry {
public:
    ModeRegistry() = default;
    ModeRegistry(std::initializer_list<std::string> labels) {
        for (const auto& l : labels) add(l);
    }

    ModeId add(const std::string& label) {
        require(!contains(label), errc::invalid_argument, "mode labels must be unique");
        labels_.push_back(label);
        return {labels_.size() - 1};
    }

    ModeId operator[](const std::string& label) const {
        auto it = std::find(labels_.begin(), labels_.end(), label);
        if (it == labels_.end()) fail(errc::unknown_mode, "no mode labelled '" + label + "'");
        return {static_cast<std::size_t>(it - labels_.begin())};
    }

    bool contains(const std::string& label) const {
        return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
    }
    bool contains(ModeId id) const noexcept { return id.index < labels_.size(); }
    const std::string& label(ModeId id) const { return labels_.at(id.index); }
    std::size_t size() const noexcept { return labels_.size(); }
    const std::vector<std::string>& labels() const noexcept { return labels_; }

private:
    std::vector<std::string> labels_;
};

using Occupation = std::vector<std::uint8_t>;

/// Creation operators transform as
///   a+ -> sqrt(eta) a+ - sqrt(1-eta) b+,   b+ -> sqrt(1-eta) a+ + sqrt(eta) b+.
struct BeamSplitterSpec {
    ModeId mode_a;
    ModeId mode_b;
    double eta;
};

class FockState {
public:
    /// Vacuum on the given modes.
    explicit FockState(ModeRegistry modes) : modes_(std::move(modes)) {
        terms_.emplace(Occupation(modes_.size(), 0), cplx(1.0));
    }

    const ModeRegistry& modes() const noexcept { return modes_; }
    const std::map<Occupation, cplx>& terms() const noexcept { return terms_; }

    ModeId add_mode(const std::string& label) {
        ModeId id = modes_.add(label);
        std::map<Occupation, cplx> grown;
        for (auto& [occ, amp] : terms_) {
            Occupation o = occ;
            o.push_back(0);
            grown.emplace(std::move(o), amp);
        }
        terms_ = std::move(grown);
        return id;
    }

    /// Applies sum_i c_i a_i^+ to the state (one photon in a superposition of modes).
    FockState& create(const std::vector<std::pair<ModeId, cplx>>& superposition) {
        std::map<Occupation, cplx> out;
        for (const auto& [occ, amp] : terms_) {
            for (const auto& [mode, c] : superposition) {
                require(modes_.contains(mode), errc::unknown_mode, "creation on unregistered mode");
                if (total(occ) + 1 > photon_cap)
                    fail(errc::photon_cap_exceeded, "at most two photons are supported");
                Occupation o = occ;
                const double n = ++o[mode.index];
                out[o] += amp * c * std::sqrt(n);
            }
        }
        terms_ = std::move(out);
        prune();
        return *this;
    }

    double norm2() const {
        double s = 0.0;
        for (const auto& [occ, amp] : terms_) s += std::norm(amp);
        return s;
    }

    static int total(const Occupation& occ) {
        int n = 0;
        for (auto k : occ) n += k;
        return n;
    }

    void prune() {
        std::erase_if(terms_, [](const auto& kv) { return std::abs(kv.second) < prune_tolerance; });
    }

private:
    friend FockState apply_beam_splitter(const FockState&, const BeamSplitterSpec&);

    ModeRegistry modes_;
    std::map<Occupation, cplx> terms_;
};

namespace detail {

inline double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

inline double factorial(int n) {
    double r = 1.0;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}

} // namespace detail

inline FockState apply_beam_splitter(const FockState& state, const BeamSplitterSpec& bs) {
    require(state.modes_.contains(bs.mode_a) && state.modes_.contains(bs.mode_b), errc::unknown_mode,
            "beam splitter references an unregistered mode");
    require(!(bs.mode_a == bs.mode_b), errc::invalid_argument, "beam splitter needs two distinct modes");
    require(std::isfinite(bs.eta) && bs.eta >= 0.0 && bs.eta <= 1.0, errc::invalid_argument,
            "transmissivity must lie in [0, 1]");

    const double t = std::sqrt(bs.eta);
    const double r = std::sqrt(1.0 - bs.eta);
    const std::size_t a = bs.mode_a.index;
    const std::size_t b = bs.mode_b.index;

    FockState out = state;
    out.terms_.clear();
    for (const auto& [occ, amp] : state.terms_) {
        const int na = occ[a];
        const int nb = occ[b];
        const int n = na + nb;
        const double norm_in = std::sqrt(detail::factorial(na) * detail::factorial(nb));
        // (t a - r b)^na (r a + t b)^nb, collected by power of a.
        std::vector<double> coeff(n + 1, 0.0);
        for (int i = 0; i <= na; ++i) {
            const double ci = detail::binomial(na, i) * std::pow(t, i) * std::pow(-r, na - i);
            for (int j = 0; j <= nb; ++j) {
                const double cj = detail::binomial(nb, j) * std::pow(r, j) * std::pow(t, nb - j);
                coeff[i + j] += ci * cj;
            }
        }
        for (int k = 0; k <= n; ++k) {
            if (coeff[k] == 0.0) continue;
            Occupation o = occ;
            o[a] = static_cast<std::uint8_t>(k);
            o[b] = static_cast<std::uint8_t>(n - k);
            const double norm_out = std::sqrt(detail::factorial(k) * detail::factorial(n - k));
            out.terms_[o] += amp * coeff[k] * norm_out / norm_in;
        }
    }
    out.prune();
    return out;
}

/// <n_mode> on the renormalized state.
inline double number_expectation(const FockState& state, ModeId mode) {
    require(state.modes().contains(mode), errc::unknown_mode, "number operator on unregistered mode");
    const double n2 = state.norm2();
    // Vacuum has norm 1 and contributes zero; only a genuinely empty branch fails.
    require(n2 > 0.0, errc::zero_norm, "number expectation of a zero-norm state");
    double s = 0.0;
    for (const auto& [occ, amp] : state.terms()) s += std::norm(amp) * occ[mode.index];
    return s / n2;
}

using ModePair = std::pair<ModeId, ModeId>; // (H, V)

/// Unnormalized amplitudes of the branch with exactly one photon in each
/// pair, index 2*signal + meter.
inline Vec4 coincidence_amplitudes(const FockState& state, ModePair signal, ModePair meter) {
    const auto& reg = state.modes();
    for (ModeId m : {signal.first, signal.second, meter.first, meter.second})
        require(reg.contains(m), errc::unknown_mode, "coincidence projection on unregistered mode");
    Vec4 amps = Vec4::Zero();
    for (const auto& [occ, amp] : state.terms()) {
        require(FockState::total(occ) == 2, errc::invalid_state,
                "coincidence projection needs exactly two photons on every term");
        const int s_h = occ[signal.first.index], s_v = occ[signal.second.index];
        const int m_h = occ[meter.first.index], m_v = occ[meter.second.index];
        if (s_h + s_v != 1 || m_h + m_v != 1) continue;
        amps(2 * s_v + m_v) += amp;
    }
    return amps;
}

/// Keeps the one-photon-per-output branch and renormalizes it.
inline TwoQubitState project_coincidence(const FockState& state, ModePair signal, ModePair meter) {
    const Vec4 amps = coincidence_amplitudes(state, signal, meter);
    TwoQubitState out;
    out.success_prob = amps.squaredNorm();
    if (out.success_prob > 0.0) out.amplitudes = amps / std::sqrt(out.success_prob);
    return out;
}

} // namespace weakval::fock
