// counting.hpp
// Monte Carlo of the coincidence-counting experiment: Poisson counts,
// estimators for the measurement strength K and the postselected weak value
// with their 1-sigma errors, and the strength sweep of the experiment.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "device.hpp"
#include "error.hpp"
#include "imperfection.hpp"
#include "types.hpp"

namespace weakval {

inline constexpr const char* rng_algorithm = "std::mt19937_64 seeded by std::seed_seq{seed_lo, seed_hi, grid_index, stream}";

struct RunPlan {
    double unpostselected_rate = 44.6; // coincidences per second
    double postselected_rate = 0.52;
    double duration_K = 100.0; // seconds
    double duration_wv = 1000.0;
    std::uint64_t seed = 0;

    void validate() const {
        for (double x : {unpostselected_rate, postselected_rate, duration_K, duration_wv})
            require(std::isfinite(x) && x >= 0.0, errc::invalid_argument, "rates and durations must be >= 0");
    }
};

/// Counts per outcome class: (HH, HV, VH, VV) for strength runs, (H, V) of
/// the meter for postselected runs.
struct CountSample {
    std::vector<std::int64_t> counts;
    double duration = 0.0;

    std::int64_t total() const {
        std::int64_t n = 0;
        for (auto c : counts) n += c;
        return n;
    }
};

struct Estimate {
    double value = 0.0;
    double sigma = 0.0;
    std::optional<double> lower;      // nullopt when unbounded below
    std::optional<double> upper;      // nullopt when unbounded above
    std::optional<double> worst_case; // 1-sigma K shift toward smaller |value|
    bool unbounded_above = false;
};

enum class stream : std::uint32_t { calibration = 0, postselected = 1 };

inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint32_t grid_index, stream which) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), grid_index,
                      static_cast<std::uint32_t>(which)};
    return std::mt19937_64(seq);
}

inline void validate_distribution(std::span<const double> probs) {
    double s = 0.0;
    for (double p : probs) {
        require(std::isfinite(p) && p >= -1e-12, errc::malformed_distribution, "probabilities must be non-negative");
        s += p;
    }
    require(!probs.empty() && std::abs(s - 1.0) <= 1e-9, errc::malformed_distribution,
            "outcome probabilities must sum to 1");
}

/// Independent Poisson counts with means rate * duration * p_i.
template <class URBG>
CountSample sample_counts(std::span<const double> probs, double rate, double duration, URBG& rng) {
    validate_distribution(probs);
    require(std::isfinite(rate) && rate >= 0.0 && std::isfinite(duration) && duration >= 0.0,
            errc::invalid_argument, "rate and duration must be >= 0");
    CountSample out;
    out.duration = duration;
    for (double p : probs) {
        const double mean = rate * duration * std::max(0.0, p);
        if (mean <= 0.0) {
            out.counts.push_back(0);
            continue;
        }
        std::poisson_distribution<std::int64_t> dist(mean);
        out.counts.push_back(dist(rng));
    }
    return out;
}

inline CountSample sample_counts(std::span<const double> probs, double rate, double duration, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return sample_counts(probs, rate, duration, rng);
}

/// K = (N_HH + N_VV - N_HV - N_VH) / N with sigma = sqrt((1 - K^2) / N), the
/// delta-method error for independent Poisson counts.
inline Estimate estimate_knowledge(const CountSample& sample) {
    require(sample.counts.size() == 4, errc::invalid_argument, "strength run needs (HH, HV, VH, VV) counts");
    const double n = static_cast<double>(sample.total());
    if (n <= 0.0) fail(errc::no_data, "strength run recorded no coincidences");
    const double agree = static_cast<double>(sample.counts[0] + sample.counts[3]);
    const double K = (2.0 * agree - n) / n;
    Estimate e;
    e.value = K;
    e.sigma = std::sqrt(std::max(0.0, 1.0 - K * K) / n);
    e.lower = K - e.sigma;
    e.upper = K + e.sigma;
    return e;
}

/// ((N_H - N_V) / (N_H + N_V)) / K_hat. The reported sigma covers the meter
/// counts only; the strength error moves the point along value * K = const.
inline Estimate estimate_weak_value(const CountSample& sample, const Estimate& K_est) {
    require(sample.counts.size() == 2, errc::invalid_argument, "postselected run needs (H, V) meter counts");
    const double n = static_cast<double>(sample.total());
    if (n <= 0.0) fail(errc::no_data, "postselected run recorded no coincidences");
    const double K = K_est.value;
    if (K == 0.0) fail(errc::weak_value_unbounded, "estimated strength is exactly zero");

    const double contrast = static_cast<double>(sample.counts[0] - sample.counts[1]) / n;
    const double sigma_c = std::sqrt(std::max(0.0, 1.0 - contrast * contrast) / n);
    const double sk = K_est.sigma;
    const double toward_zero = K - std::copysign(sk, K); // larger |value|
    const double away = K + std::copysign(sk, K);        // smaller |value|

    Estimate e;
    e.value = contrast / K;
    e.sigma = sigma_c / std::abs(K);
    e.worst_case = contrast / away;
    e.unbounded_above = (K - sk <= 0.0) && (K + sk >= 0.0);
    const double near = contrast / away;
    if (e.unbounded_above) {
        // |value| has no upper bound; only the worst-case side stays finite.
        if (e.value >= 0.0)
            e.lower = near;
        else
            e.upper = near;
    } else {
        const double far = contrast / toward_zero;
        e.lower = std::min(near, far);
        e.upper = std::max(near, far);
    }
    return e;
}

struct Fig2Row {
    double K_true = 0.0;
    std::optional<Estimate> K_est;
    std::optional<Estimate> weak_value;
    std::string status = "ok"; // ok | no_data | k_zero | no_k_data
};

struct ExperimentModel {
    std::array<double, 4> calibration; // (HH, HV, VH, VV) for a |D> signal
    std::array<double, 2> postselected; // (H, V) given A
};

/// True outcome probabilities of the two run types at strength K.
inline ExperimentModel experiment_model(const TwoQubitChannel& channel, const Polarization& psi, double K) {
    const MeterSetting meter = MeterSetting::from_strength(K);
    ExperimentModel m{};
    m.calibration = channel_statistics(channel, Polarization::D(), meter).joint;
    const auto post = channel_statistics(channel, psi, meter).post;
    if (!post.meter_H) fail(errc::postselection_impossible, "postselection never succeeds");
    m.postselected = {*post.meter_H, *post.meter_V};
    return m;
}

inline Fig2Row simulate_point(const RunPlan& plan, const TwoQubitChannel& channel, const Polarization& psi,
                              double K, std::uint32_t index) {
    const ExperimentModel model = experiment_model(channel, psi, K);
    auto rng_k = make_stream(plan.seed, index, stream::calibration);
    auto rng_w = make_stream(plan.seed, index, stream::postselected);
    const CountSample cal = sample_counts(model.calibration, plan.unpostselected_rate, plan.duration_K, rng_k);
    const CountSample post = sample_counts(model.postselected, plan.postselected_rate, plan.duration_wv, rng_w);

    Fig2Row row;
    row.K_true = K;
    if (cal.total() == 0) {
        row.status = "no_k_data";
        return row;
    }
    row.K_est = estimate_knowledge(cal);
    if (post.total() == 0) {
        row.status = "no_data";
        return row;
    }
    if (row.K_est->value == 0.0) {
        row.status = "k_zero";
        return row;
    }
    row.weak_value = estimate_weak_value(post, *row.K_est);
    return row;
}

/// One strength calibration and one postselected run per grid point. Points
/// are distributed over `workers` threads; each owns its RNG streams, so the
/// table is identical for any worker count.
inline std::vector<Fig2Row> run_fig2(const RunPlan& plan, const Polarization& psi, const ImperfectionParams& params,
                                     const std::vector<double>& K_grid, unsigned workers = 1,
                                     const DeviceConfig& cfg = {}) {
    plan.validate();
    require(!K_grid.empty(), errc::invalid_argument, "strength grid is empty");
    for (double K : K_grid)
        require(std::isfinite(K) && K > -1.0 && K <= 1.0, errc::invalid_argument, "strengths must lie in (-1, 1]");
    const TwoQubitChannel channel = imperfect_channel(params, cfg);

    std::vector<Fig2Row> rows(K_grid.size());
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(K_grid.size())));
    std::vector<std::exception_ptr> errors(workers);
    auto work = [&](unsigned w) {
        try {
            for (std::size_t i = w; i < K_grid.size(); i += workers)
                rows[i] = simulate_point(plan, channel, psi, K_grid[i], static_cast<std::uint32_t>(i));
        } catch (...) {
            errors[w] = std::current_exception();
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return rows;
}

} // namespace weakval
