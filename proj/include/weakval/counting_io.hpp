// counting_io.hpp
// CSV table and JSON metadata for strength sweeps.

#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "counting.hpp"
#include "format.hpp"
#include "version.hpp"

namespace weakval {

inline constexpr const char* fig2_csv_header = "K_true,K_hat,K_sigma,wv,wv_sigma,wv_worst,unbounded";

/// Missing estimates are written as NA; rows without a weak value carry
/// their status in the unbounded column.
inline void write_fig2_csv(std::ostream& os, const std::vector<Fig2Row>& rows) {
    os << fig2_csv_header << '\n';
    for (const auto& r : rows) {
        os << format_real(r.K_true) << ',';
        if (r.K_est)
            os << format_real(r.K_est->value) << ',' << format_real(r.K_est->sigma) << ',';
        else
            os << "NA,NA,";
        if (r.weak_value) {
            const auto& w = *r.weak_value;
            os << format_real(w.value) << ',' << format_real(w.sigma) << ',' << format_real(*w.worst_case) << ','
               << (w.unbounded_above ? 1 : 0);
        } else {
            os << "NA,NA,NA," << r.status;
        }
        os << '\n';
    }
}

inline nlohmann::json fig2_metadata(const RunPlan& plan, const Polarization& psi, const ImperfectionParams& params,
                                    const std::vector<double>& K_grid) {
    nlohmann::json j;
    j["seed"] = plan.seed;
    j["rng"] = rng_algorithm;
    j["plan"] = {{"unpostselected_rate", plan.unpostselected_rate},
                 {"postselected_rate", plan.postselected_rate},
                 {"duration_K", plan.duration_K},
                 {"duration_wv", plan.duration_wv}};
    j["input_state"] = {{"alpha", {psi.alpha().real(), psi.alpha().imag()}},
                        {"beta", {psi.beta().real(), psi.beta().imag()}}};
    j["model"] = {{"visibility", params.visibility}, {"depol", params.depol}};
    j["K_grid"] = K_grid;
    j["version"] = version;
    return j;
}

} // namespace weakval
