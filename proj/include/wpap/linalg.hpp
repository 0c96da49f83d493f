#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <complex>

#include "wpap/common.hpp"

namespace wpap {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

/// Spectral (operator 2-) norm; accepts any Eigen matrix expression.
template <typename Derived>
inline double op_norm(const Eigen::MatrixBase<Derived>& m) {
    if (m.size() == 0) return 0.0;
    using Plain = typename Derived::PlainObject;
    const Plain evaluated = m.derived();
    return evaluated.jacobiSvd().singularValues()(0);
}

inline Mat expm(const Mat& m) {
    if (m.rows() == 1) return Mat::Constant(1, 1, std::exp(m(0, 0)));
    return m.exp();
}

/// Newton iteration for the matrix sign function with determinant scaling.
/// Requires no eigenvalue on the imaginary axis; non-convergence is reported
/// as a NumericError (the caller treats it as loss of hyperbolicity).
inline Mat matrix_sign(const Mat& a, double tol = 1e-12, int max_iter = 100) {
    const auto n = a.rows();
    if (n != a.cols()) throw PreconditionError("matrix_sign: square matrix required");
    Mat s = a;
    const Mat id = Mat::Identity(n, n);
    for (int k = 0; k < max_iter; ++k) {
        Eigen::PartialPivLU<Mat> lu(s);
        const double det = std::abs(lu.determinant());
        if (!(det > 0.0) || !std::isfinite(det))
            throw NumericError("matrix_sign: singular iterate (eigenvalue too close to the imaginary axis)");
        const double mu = std::pow(det, -1.0 / static_cast<double>(n));
        const Mat sinv = lu.inverse();
        s = 0.5 * (mu * s + (1.0 / mu) * sinv);
        if (op_norm(s * s - id) < tol * std::max(1.0, op_norm(s))) return s;
    }
    throw NumericError("matrix_sign: no convergence (spectrum within tolerance of the imaginary axis)");
}

/// Projector onto the invariant subspace of eigenvalues with negative real
/// part: P = (I - sign(A)) / 2.
inline Mat stable_projector(const Mat& a, double tol = 1e-10) {
    const Mat s = matrix_sign(a, 1e-13);
    Mat p = 0.5 * (Mat::Identity(a.rows(), a.cols()) - s);
    if (op_norm(p * p - p) > tol * std::max(1.0, op_norm(p)))
        throw NumericError("stable_projector: sign-based projector failed idempotency check");
    return p;
}

/// Solve (lambda*I - M) x = b. Throws when lambda is (numerically) in the
/// spectrum of M.
inline Vec resolvent_apply(const Mat& m, double lambda, const Vec& b) {
    const Mat shifted = lambda * Mat::Identity(m.rows(), m.cols()) - m;
    Eigen::FullPivLU<Mat> lu(shifted);
    if (!lu.isInvertible()) throw NumericError("resolvent_apply: lambda lies in the spectrum");
    return lu.solve(b);
}

inline CMat resolvent_matrix(const Mat& m, std::complex<double> lambda) {
    const auto n = m.rows();
    CMat shifted = lambda * CMat::Identity(n, n) - m.cast<std::complex<double>>();
    Eigen::FullPivLU<CMat> lu(shifted);
    if (!lu.isInvertible()) throw NumericError("resolvent_matrix: lambda lies in the spectrum");
    return lu.inverse();
}

}  // namespace wpap
