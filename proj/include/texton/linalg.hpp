// Copyright Contributors to the Texton Engine Project
// SPDX-License-Identifier: Apache-2.0
//
// Closed-form 2x2 linear algebra used throughout the engine. Everything here is
// templated on the scalar type and header-only.
#pragma once

#include "texton/types.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>

namespace texton::linalg {

/// Covariance regularizer added before inversion, in px^2.
inline constexpr double kCovarianceEpsilon = 1e-6;

template <typename Scalar> Matrix2<Scalar> rotation(Scalar theta) {
    using std::cos;
    using std::sin;
    const Scalar c = cos(theta), s = sin(theta);
    Matrix2<Scalar> r;
    r << c, -s, s, c;
    return r;
}

template <typename Derived> typename Derived::Scalar determinant2(const Eigen::MatrixBase<Derived> &m) {
    return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
}

/// Inverse of a 2x2 matrix via the adjugate. No singularity check.
template <typename Derived>
Matrix2<typename Derived::Scalar> inverse2(const Eigen::MatrixBase<Derived> &m) {
    using Scalar      = typename Derived::Scalar;
    const Scalar invD = Scalar(1) / determinant2(m);
    Matrix2<Scalar> r;
    r << m(1, 1) * invD, -m(0, 1) * invD, -m(1, 0) * invD, m(0, 0) * invD;
    return r;
}

template <typename Derived>
Matrix2<typename Derived::Scalar> symmetrized(const Eigen::MatrixBase<Derived> &m) {
    return (m + m.transpose()) * typename Derived::Scalar(0.5);
}

/// Eigenvalues of the symmetric part, ascending.
template <typename Derived>
Vector2<typename Derived::Scalar> symmetricEigenvalues(const Eigen::MatrixBase<Derived> &m) {
    using Scalar        = typename Derived::Scalar;
    const Matrix2<Scalar> s = symmetrized(m);
    const Scalar mid    = Scalar(0.5) * (s(0, 0) + s(1, 1));
    const Scalar half   = Scalar(0.5) * (s(0, 0) - s(1, 1));
    const Scalar radius = std::hypot(half, s(0, 1));
    return {mid - radius, mid + radius};
}

/// Projects onto the PSD cone by clamping eigenvalues of the symmetric part at `floor`.
template <typename Derived>
Matrix2<typename Derived::Scalar> psdProjected(const Eigen::MatrixBase<Derived> &m,
                                               typename Derived::Scalar floor = 1e-9) {
    using Scalar = typename Derived::Scalar;
    Eigen::SelfAdjointEigenSolver<Matrix2<Scalar>> es;
    es.computeDirect(symmetrized(m));
    Vector2<Scalar> ev = es.eigenvalues().cwiseMax(floor);
    Matrix2<Scalar> r  = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
    return symmetrized(r);
}

/// Lower-triangular Cholesky factor of a symmetric positive-definite 2x2 matrix.
/// Throws when the matrix is not positive definite.
template <typename Derived>
Matrix2<typename Derived::Scalar> cholesky2(const Eigen::MatrixBase<Derived> &m) {
    using Scalar = typename Derived::Scalar;
    using std::sqrt;
    const Scalar a = m(0, 0);
    if (!(a > Scalar(0))) {
        throw Error("cholesky: matrix is not positive definite");
    }
    const Scalar l00 = sqrt(a);
    const Scalar l10 = m(1, 0) / l00;
    const Scalar r   = m(1, 1) - l10 * l10;
    if (!(r > Scalar(0))) {
        throw Error("cholesky: matrix is not positive definite");
    }
    Matrix2<Scalar> l;
    l << l00, Scalar(0), l10, sqrt(r);
    return l;
}

/// Squared Mahalanobis distance d^T U^-1 d for a precomputed inverse.
template <typename Scalar>
Scalar mahalanobisSq(const Vector2<Scalar> &d, const Matrix2<Scalar> &inv) {
    return d(0) * (inv(0, 0) * d(0) + inv(0, 1) * d(1)) +
           d(1) * (inv(1, 0) * d(0) + inv(1, 1) * d(1));
}

/// Principal real power W^p of a 2x2 matrix.
///
/// Uses the Lagrange-Sylvester form f(W) = c0 I + c1 W over the two eigenvalues,
/// switching to the confluent (derivative) form when they nearly coincide.
/// Complex-conjugate pairs are handled in complex arithmetic; the result is real.
/// Throws when an eigenvalue lies on the closed negative real axis (no principal power).
template <typename Derived>
Matrix2<typename Derived::Scalar> fractionalPower(const Eigen::MatrixBase<Derived> &w,
                                                  typename Derived::Scalar p) {
    using Scalar  = typename Derived::Scalar;
    using Complex = std::complex<Scalar>;
    const Matrix2<Scalar> m = w;

    // Triangular input: eigenvalues are the diagonal, no root solving needed.
    Complex l1, l2;
    if (m(0, 1) == Scalar(0) || m(1, 0) == Scalar(0)) {
        l1 = m(0, 0);
        l2 = m(1, 1);
    } else {
        const Scalar half = Scalar(0.5) * (m(0, 0) + m(1, 1));
        const Scalar disc = Scalar(0.25) * (m(0, 0) - m(1, 1)) * (m(0, 0) - m(1, 1)) + m(0, 1) * m(1, 0);
        const Complex root = std::sqrt(Complex(disc, Scalar(0)));
        l1                 = Complex(half) + root;
        l2                 = Complex(half) - root;
    }
    for (const Complex &l : {l1, l2}) {
        if (l.imag() == Scalar(0) && !(l.real() > Scalar(0))) {
            throw Error("fractional power: eigenvalue on the non-positive real axis");
        }
    }

    auto f  = [p](const Complex &x) { return std::pow(x, Complex(p)); };
    auto df = [p](const Complex &x) { return Complex(p) * std::pow(x, Complex(p - Scalar(1))); };

    const Scalar scale = std::max(std::abs(l1), std::abs(l2));
    Complex c0, c1;
    if (std::abs(l1 - l2) <= Scalar(1e-5) * scale) {
        const Complex mid = Scalar(0.5) * (l1 + l2);
        c1                = df(mid);
        c0                = f(mid) - c1 * mid;
    } else {
        const Complex f1 = f(l1), f2 = f(l2);
        c1 = (f1 - f2) / (l1 - l2);
        c0 = (l1 * f2 - l2 * f1) / (l1 - l2);
    }
    Matrix2<Scalar> r = c1.real() * m;
    r.diagonal().array() += c0.real();
    return r;
}

} // namespace texton::linalg
