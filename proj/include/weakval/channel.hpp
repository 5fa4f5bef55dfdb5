// channel.hpp
// Completely positive, trace-nonincreasing two-qubit maps in operator-sum form.

#pragma once

#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "linalg.hpp"

namespace weakval {

class TwoQubitChannel {
public:
    TwoQubitChannel() = default;
    explicit TwoQubitChannel(std::vector<Mat4> kraus) : kraus_(std::move(kraus)) {}

    Mat4 apply(const Mat4& rho) const {
        Mat4 out = Mat4::Zero();
        for (const auto& k : kraus_) out += k * rho * k.adjoint();
        return out;
    }

    /// sum_k K^dagger K; the output trace for input rho is tr(effect rho).
    Mat4 effect() const {
        Mat4 e = Mat4::Zero();
        for (const auto& k : kraus_) e += k.adjoint() * k;
        return e;
    }

    /// Largest output trace over normalized inputs.
    double max_output_trace() const {
        Eigen::SelfAdjointEigenSolver<Mat4> es(effect());
        return es.eigenvalues().maxCoeff();
    }

    bool trace_nonincreasing(double tol = 1e-12) const { return max_output_trace() <= 1.0 + tol; }

    const std::vector<Mat4>& kraus() const noexcept { return kraus_; }

    /// Output-side white noise: (1 - p) E(rho) + p tr(E(rho)) 1/4.
    TwoQubitChannel depolarized(double p) const {
        if (p == 0.0) return *this;
        std::vector<Mat4> ks;
        const double keep = std::sqrt(1.0 - p);
        const double mix = std::sqrt(p) / 4.0;
        for (const auto& k : kraus_) {
            if (keep > 0.0) ks.push_back(keep * k);
            // sum over the 16 Paulis of P X P equals 4 tr(X) 1.
            for (const auto& P : two_qubit_paulis()) ks.push_back(mix * P * k);
        }
        return TwoQubitChannel(std::move(ks));
    }

private:
    std::vector<Mat4> kraus_;
};

} // namespace weakval
