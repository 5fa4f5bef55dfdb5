// tomography.hpp
// Two-qubit process tomography by linear inversion in the Pauli basis.
//
//   E(rho) = sum_{m,n} chi_{mn} P_m rho P_n
//
// Inputs are the 16 product states {H, V, D, R}^(x)2; each output is
// reconstructed from the 36 joint projective outcomes over the
// {H/V, D/A, R/L} bases of both qubits.

#pragma once

#include <array>
#include <concepts>
#include <cstddef>
#include <memory>
#include <ostream>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "error.hpp"
#include "format.hpp"
#include "linalg.hpp"
#include "types.hpp"

namespace weakval {

template <class C>
concept TwoQubitProcess = requires(const C& c, const Mat4& rho) {
    { c.apply(rho) } -> std::convertible_to<Mat4>;
};

struct ChiMatrix {
    Mat16 chi = Mat16::Zero();

    Mat4 apply(const Mat4& rho) const {
        const auto& P = two_qubit_paulis();
        Mat4 out = Mat4::Zero();
        for (std::size_t m = 0; m < 16; ++m)
            for (std::size_t n = 0; n < 16; ++n)
                if (chi(m, n) != cplx(0.0)) out += chi(m, n) * P[m] * rho * P[n];
        return out;
    }

    cplx trace() const { return chi.trace(); }

    Eigen::Matrix<double, 16, 1> eigenvalues() const {
        const Mat16 h = 0.5 * (chi + chi.adjoint());
        return Eigen::SelfAdjointEigenSolver<Mat16>(h).eigenvalues();
    }

    std::size_t rank(double tol = 1e-8) const {
        std::size_t r = 0;
        for (double e : eigenvalues())
            if (e > tol) ++r;
        return r;
    }

    double hermiticity_error() const { return (chi - chi.adjoint()).cwiseAbs().maxCoeff(); }
};

/// Clips negative eigenvalues and restores the original trace.
inline ChiMatrix project_psd(const ChiMatrix& in) {
    const Mat16 h = 0.5 * (in.chi + in.chi.adjoint());
    Eigen::SelfAdjointEigenSolver<Mat16> es(h);
    Eigen::Matrix<double, 16, 1> ev = es.eigenvalues().cwiseMax(0.0);
    const double t_in = h.trace().real();
    const double t_out = ev.sum();
    if (t_out > 0.0) ev *= t_in / t_out;
    ChiMatrix out;
    out.chi = es.eigenvectors() * ev.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
    return out;
}

namespace tomo_detail {

inline std::array<Vec2, 4> input_states() {
    return {Polarization::H().vec(), Polarization::V().vec(), Polarization::D().vec(), Polarization::R().vec()};
}

inline std::array<Mat4, 16> input_densities() {
    const auto s = input_states();
    std::array<Mat4, 16> rho;
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) rho[4 * i + j] = projector(kron(s[i], s[j]));
    return rho;
}

// Measurement bases: 0 = H/V (z), 1 = D/A (x), 2 = R/L (y); first vector is the +1 outcome.
inline std::array<Vec2, 2> basis(std::size_t b) {
    const double h = M_SQRT1_2;
    switch (b) {
    case 0: return {Vec2(1, 0), Vec2(0, 1)};
    case 1: return {Vec2(h, h), Vec2(h, -h)};
    default: return {Vec2(h, cplx(0, h)), Vec2(h, cplx(0, -h))};
    }
}

// Pauli index (1 = x, 2 = y, 3 = z) for each measurement basis.
inline constexpr std::array<std::size_t, 3> basis_pauli{3, 1, 2};

/// Outcome weights tr(Pi rho) for the 36 joint projectors, ordered
/// (basis1, basis2, outcome1, outcome2).
inline std::array<double, 36> joint_measurement(const Mat4& rho) {
    std::array<double, 36> p{};
    std::size_t k = 0;
    for (std::size_t b1 = 0; b1 < 3; ++b1)
        for (std::size_t b2 = 0; b2 < 3; ++b2)
            for (std::size_t o1 = 0; o1 < 2; ++o1)
                for (std::size_t o2 = 0; o2 < 2; ++o2) {
                    const Vec4 v = kron(basis(b1)[o1], basis(b2)[o2]);
                    p[k++] = (v.adjoint() * rho * v)(0).real();
                }
    return p;
}

/// Linear-inversion state estimate from joint outcome weights.
inline Mat4 reconstruct_state(const std::array<double, 36>& p) {
    std::array<double, 16> expect{};
    std::array<int, 16> seen{};
    for (std::size_t b1 = 0; b1 < 3; ++b1)
        for (std::size_t b2 = 0; b2 < 3; ++b2) {
            const std::size_t base = 4 * (3 * b1 + b2);
            const double p00 = p[base], p01 = p[base + 1], p10 = p[base + 2], p11 = p[base + 3];
            const std::size_t i = basis_pauli[b1], j = basis_pauli[b2];
            const std::array<std::pair<std::size_t, double>, 4> terms{{
                {4 * i + j, p00 - p01 - p10 + p11},
                {4 * i, p00 + p01 - p10 - p11},
                {j, p00 - p01 + p10 - p11},
                {0, p00 + p01 + p10 + p11},
            }};
            for (const auto& [idx, val] : terms) {
                expect[idx] += val;
                ++seen[idx];
            }
        }
    const auto& P = two_qubit_paulis();
    Mat4 rho = Mat4::Zero();
    for (std::size_t k = 0; k < 16; ++k) rho += (expect[k] / seen[k]) * P[k] / 4.0;
    return rho;
}

/// LU of the map chi -> { tr(P_k E(rho_j)) }, shared by every reconstruction.
class Inverter {
public:
    using Big = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic>;

    Inverter() {
        const auto& P = two_qubit_paulis();
        const auto rho = input_densities();
        Big B(256, 256);
        for (std::size_t j = 0; j < 16; ++j)
            for (std::size_t m = 0; m < 16; ++m)
                for (std::size_t n = 0; n < 16; ++n) {
                    const Mat4 out = P[m] * rho[j] * P[n];
                    for (std::size_t k = 0; k < 16; ++k)
                        B(16 * j + k, 16 * m + n) = (P[k] * out).trace();
                }
        lu_ = std::make_unique<Eigen::FullPivLU<Big>>(B);
    }

    bool invertible() const { return lu_->rank() == 256; }
    Eigen::VectorXcd solve(const Eigen::VectorXcd& b) const { return lu_->solve(b); }

private:
    std::unique_ptr<Eigen::FullPivLU<Big>> lu_;
};

inline const Inverter& inverter() {
    static const Inverter inv;
    return inv;
}

} // namespace tomo_detail

/// Reconstructs chi from noiseless joint measurements on the 16 product inputs.
template <TwoQubitProcess Process>
ChiMatrix process_tomography(const Process& process) {
    const auto& inv = tomo_detail::inverter();
    if (!inv.invertible()) fail(errc::singular_basis, "tomography input set does not span operator space");
    const auto& P = two_qubit_paulis();
    const auto inputs = tomo_detail::input_densities();
    Eigen::VectorXcd lambda(256);
    for (std::size_t j = 0; j < 16; ++j) {
        const Mat4 out = tomo_detail::reconstruct_state(tomo_detail::joint_measurement(process.apply(inputs[j])));
        for (std::size_t k = 0; k < 16; ++k) lambda(16 * j + k) = (P[k] * out).trace();
    }
    const Eigen::VectorXcd x = inv.solve(lambda);
    ChiMatrix chi;
    for (std::size_t m = 0; m < 16; ++m)
        for (std::size_t n = 0; n < 16; ++n) chi.chi(m, n) = x(16 * m + n);
    return chi;
}

/// Row-major, real and imaginary parts interleaved, 17 significant digits.
inline void write_chi_csv(std::ostream& os, const ChiMatrix& chi) {
    for (int m = 0; m < 16; ++m) {
        for (int n = 0; n < 16; ++n) {
            if (n) os << ',';
            os << format_real(chi.chi(m, n).real()) << ',' << format_real(chi.chi(m, n).imag());
        }
        os << '\n';
    }
}

} // namespace weakval
