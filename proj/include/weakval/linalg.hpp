// linalg.hpp
// Small dense complex matrices for one and two polarization qubits.

#pragma once

#include <array>
#include <complex>
#include <cstddef>

#include <Eigen/Dense>

namespace weakval {

using cplx = std::complex<double>;
using Vec2 = Eigen::Vector2cd;
using Vec4 = Eigen::Vector4cd;
using Mat2 = Eigen::Matrix2cd;
using Mat4 = Eigen::Matrix4cd;
using Mat16 = Eigen::Matrix<cplx, 16, 16>;

inline constexpr double pi = 3.14159265358979323846;

namespace pauli {

inline Mat2 identity() { return Mat2::Identity(); }

inline Mat2 x() {
    Mat2 m;
    m << 0, 1, 1, 0;
    return m;
}

inline Mat2 y() {
    Mat2 m;
    m << 0, cplx(0, -1), cplx(0, 1), 0;
    return m;
}

// Z in the {H, V} basis is the S1 Stokes operator.
inline Mat2 z() {
    Mat2 m;
    m << 1, 0, 0, -1;
    return m;
}

inline Mat2 single(std::size_t i) {
    switch (i) {
    case 0: return identity();
    case 1: return x();
    case 2: return y();
    default: return z();
    }
}

} // namespace pauli

inline Mat4 kron(const Mat2& a, const Mat2& b) {
    Mat4 out;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return out;
}

inline Vec4 kron(const Vec2& a, const Vec2& b) {
    Vec4 out;
    out << a(0) * b(0), a(0) * b(1), a(1) * b(0), a(1) * b(1);
    return out;
}

// Two-qubit Pauli basis, index m = 4*i + j for sigma_i (x) sigma_j.
inline const std::array<Mat4, 16>& two_qubit_paulis() {
    static const std::array<Mat4, 16> basis = [] {
        std::array<Mat4, 16> b;
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 4; ++j)
                b[4 * i + j] = kron(pauli::single(i), pauli::single(j));
        return b;
    }();
    return basis;
}

inline Mat4 projector(const Vec4& v) { return v * v.adjoint(); }
inline Mat2 projector(const Vec2& v) { return v * v.adjoint(); }

inline double real_trace(const Mat4& m) { return m.trace().real(); }

// Pure-state concurrence, 2|a_HH a_VV - a_HV a_VH| on a normalized vector.
inline double concurrence(const Vec4& psi) {
    return 2.0 * std::abs(psi(0) * psi(3) - psi(1) * psi(2));
}

} // namespace weakval
