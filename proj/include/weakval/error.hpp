// error.hpp
// Typed error values shared by every layer of the library.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace weakval {

enum class errc {
    invalid_argument,
    invalid_state,          // non-normalized or non-finite input
    unknown_mode,
    photon_cap_exceeded,
    zero_norm,
    indeterminate_strength, // K == 0 where a division by K is required
    weak_value_unbounded,   // K == 0 in a weak-value estimator
    postselection_impossible,
    divergence,             // closed-form denominator vanishes
    malformed_distribution,
    infeasible,
    singular_basis,
    no_data,
};

constexpr std::string_view to_string(errc e) noexcept {
    switch (e) {
    case errc::invalid_argument: return "invalid_argument";
    case errc::invalid_state: return "invalid_state";
    case errc::unknown_mode: return "unknown_mode";
    case errc::photon_cap_exceeded: return "photon_cap_exceeded";
    case errc::zero_norm: return "zero_norm";
    case errc::indeterminate_strength: return "indeterminate_strength";
    case errc::weak_value_unbounded: return "weak_value_unbounded";
    case errc::postselection_impossible: return "postselection_impossible";
    case errc::divergence: return "divergence";
    case errc::malformed_distribution: return "malformed_distribution";
    case errc::infeasible: return "infeasible";
    case errc::singular_basis: return "singular_basis";
    case errc::no_data: return "no_data";
    }
    return "unknown";
}

class error : public std::runtime_error {
public:
    error(errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw error(code, what); }

inline void require(bool cond, errc code, const char* what) {
    if (!cond) fail(code, what);
}

} // namespace weakval
