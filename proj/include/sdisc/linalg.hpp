#pragma once

#include <algorithm>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "sdisc/core.hpp"

namespace sdisc::linalg {

/// Relative threshold on Gram eigenvalues below which a system counts as degenerate.
inline constexpr double degenerate_threshold = 1e-10;

inline CMat hermitian_part(const CMat& a) { return 0.5 * (a + a.adjoint()); }

/// Throws DegenerateError when min eig(G) < threshold * max eig(G).
inline void check_nondegenerate(const CMat& gram) {
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(gram), Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (!(hi > 0.0) || lo < degenerate_threshold * hi) throw DegenerateError(lo, hi);
}

/// Upper factor R with G = R^H R.
inline CMat cholesky_upper(const CMat& gram) {
    Eigen::LLT<CMat> llt(hermitian_part(gram));
    if (llt.info() != Eigen::Success) {
        Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(gram), Eigen::EigenvaluesOnly);
        throw DegenerateError(es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff());
    }
    return llt.matrixU();
}

struct GenEig {
    RVec values;   ///< ascending
    CMat vectors;  ///< columns x_k with H x = lambda G x, x^H G x = 1
};

/// Hermitian-definite generalized eigenproblem H x = lambda G x.
inline GenEig generalized_eig(const CMat& h, const CMat& gram) {
    const CMat r = cholesky_upper(gram);
    // C = R^{-H} H R^{-1}
    const CMat rinv = r.triangularView<Eigen::Upper>().solve(CMat::Identity(r.rows(), r.cols()));
    const CMat c = hermitian_part(rinv.adjoint() * h * rinv);
    Eigen::SelfAdjointEigenSolver<CMat> es(c);
    return {es.eigenvalues(), rinv * es.eigenvectors()};
}

/// Numerical rank with the degenerate threshold applied to squared singular values.
inline Eigen::Index numerical_rank(const CMat& a) {
    if (a.size() == 0) return 0;
    Eigen::JacobiSVD<CMat> svd(a);
    const RVec& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0) return 0;
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) * s(i) >= degenerate_threshold * s(0) * s(0)) ++r;
    return r;
}

inline double spectral_norm(const CMat& a) {
    if (a.size() == 0) return 0.0;
    Eigen::JacobiSVD<CMat> svd(a);
    return svd.singularValues()(0);
}

/// Real embedding of coefficients: complex c in C^n <-> (Re c, Im c) in R^{2n}.
inline RVec to_real(const CVec& c, Field f) {
    if (f == Field::real) return c.real();
    RVec x(2 * c.size());
    x << c.real(), c.imag();
    return x;
}

inline CVec from_real(const RVec& x, Field f) {
    if (f == Field::real) return x.cast<Scalar>();
    const Eigen::Index n = x.size() / 2;
    CVec c(n);
    for (Eigen::Index i = 0; i < n; ++i) c(i) = Scalar(x(i), x(n + i));
    return c;
}

inline Eigen::Index real_dim(Eigen::Index n, Field f) { return f == Field::real ? n : 2 * n; }

/// Minimum-norm least-squares solution of a c = y.
inline CVec min_norm_solve(const CMat& a, const CVec& y) {
    Eigen::CompleteOrthogonalDecomposition<CMat> cod(a);
    cod.setThreshold(1e-12);
    return cod.solve(y);
}

/// Orthogonal projector onto the kernel of a (n x n).
inline CMat kernel_projector(const CMat& a) {
    const Eigen::Index n = a.cols();
    if (a.rows() == 0) return CMat::Identity(n, n);
    Eigen::JacobiSVD<CMat> svd(a, Eigen::ComputeFullV);
    const Eigen::Index r = numerical_rank(a);
    const CMat v = svd.matrixV();
    CMat p = CMat::Zero(n, n);
    for (Eigen::Index k = r; k < n; ++k) p += v.col(k) * v.col(k).adjoint();
    return p;
}

}  // namespace sdisc::linalg
