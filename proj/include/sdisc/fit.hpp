#pragma once

#include <algorithm>
#include <cmath>
#include <optional>

#include "sdisc/core.hpp"
#include "sdisc/linalg.hpp"
#include "sdisc/lp.hpp"

namespace sdisc::fit {

/// Weighted discrete p-norm (sum_j w_j |v_j|^p)^{1/p}; max_j |v_j| over w_j > 0 when p = inf.
inline double weighted_norm(const CVec& v, const RVec& w, double p) {
    if (v.size() == 0) return 0.0;
    if (is_inf_exponent(p)) {
        double mx = 0.0;
        for (Eigen::Index j = 0; j < v.size(); ++j)
            if (w(j) > 0.0) mx = std::max(mx, std::abs(v(j)));
        return mx;
    }
    if (p == 2.0) return std::sqrt((w.array() * v.array().abs2()).sum());
    double s = 0.0;
    for (Eigen::Index j = 0; j < v.size(); ++j)
        if (w(j) > 0.0) s += w(j) * std::pow(std::abs(v(j)), p);
    return std::pow(s, 1.0 / p);
}

struct FitResult {
    CVec coef;
    double residual_norm = 0.0;  ///< weighted discrete p-norm of a c - y
    int iterations = 0;
    std::string method;
};

struct FitOptions {
    double rel_tol = 1e-8;
    int max_newton = 200;
};

namespace detail {

// Rows with positive weight only.
inline void restrict_rows(const CMat& a, const CVec& y, const RVec& w, CMat& ar, CVec& yr, RVec& wr) {
    std::vector<Eigen::Index> keep;
    for (Eigen::Index j = 0; j < a.rows(); ++j)
        if (w(j) > 0.0) keep.push_back(j);
    ar.resize(keep.size(), a.cols());
    yr.resize(keep.size());
    wr.resize(keep.size());
    for (std::size_t k = 0; k < keep.size(); ++k) {
        ar.row(k) = a.row(keep[k]);
        yr(k) = y(keep[k]);
        wr(k) = w(keep[k]);
    }
}

// Smoothed objective F(x) = sum_j w_j (|r_j|^2 + eps^2)^{p/2}, r = A c(x) - y, minimized by
// damped Newton in the real embedding of c.
inline CVec newton_lp(const CMat& a, const CVec& y, const RVec& w, double p, Field field, CVec c, double eps,
                      int max_iter, int& iters) {
    const Eigen::Index m = a.rows(), n = a.cols();
    const Eigen::Index nr = linalg::real_dim(n, field);
    // Real Jacobian blocks: (Re r_j, Im r_j) = J_j x - (Re y_j, Im y_j).
    RMat jre(m, nr), jim(m, nr);
    jre.leftCols(n) = a.real();
    jim.leftCols(n) = a.imag();
    if (field == Field::complex) {
        jre.rightCols(n) = -a.imag();
        jim.rightCols(n) = a.real();
    }
    auto objective = [&](const RVec& x) {
        const CVec r = a * linalg::from_real(x, field) - y;
        double s = 0.0;
        for (Eigen::Index j = 0; j < m; ++j) s += w(j) * std::pow(std::norm(r(j)) + eps * eps, p / 2);
        return s;
    };
    RVec x = linalg::to_real(c, field);
    double fx = objective(x);
    for (int it = 0; it < max_iter; ++it) {
        ++iters;
        const CVec r = a * linalg::from_real(x, field) - y;
        RVec grad = RVec::Zero(nr);
        RMat hess = RMat::Zero(nr, nr);
        for (Eigen::Index j = 0; j < m; ++j) {
            const double s2 = std::norm(r(j)) + eps * eps;
            const double g1 = p * std::pow(s2, p / 2 - 1);
            const double g2 = p * (p - 2) * std::pow(s2, p / 2 - 2);
            const double rr = r(j).real(), ri = r(j).imag();
            const RVec jr = jre.row(j).transpose(), ji = jim.row(j).transpose();
            grad += w(j) * g1 * (rr * jr + ri * ji);
            // Hessian block: g1 I + g2 r r^T in the (re, im) plane.
            const RVec u = rr * jr + ri * ji;
            hess += w(j) * (g1 * (jr * jr.transpose() + ji * ji.transpose()) + g2 * u * u.transpose());
        }
        const double reg = 1e-14 * std::max(1.0, hess.trace() / std::max<Eigen::Index>(nr, 1));
        hess.diagonal().array() += reg;
        const RVec step = hess.ldlt().solve(grad);
        const double decrement = grad.dot(step);
        if (!(decrement > 1e-30 * std::max(1.0, fx))) break;
        double t = 1.0;
        RVec xn;
        double fn = fx;
        for (int ls = 0; ls < 60; ++ls) {
            xn = x - t * step;
            fn = objective(xn);
            if (fn <= fx - 1e-4 * t * decrement) break;
            t *= 0.5;
        }
        if (fn > fx) break;
        const double rel = (fx - fn) / std::max(fx, 1e-300);
        x = xn;
        fx = fn;
        if (rel < 1e-15) break;
    }
    return linalg::from_real(x, field);
}

}  // namespace detail

/// argmin_c of the weighted discrete p-seminorm of a c - y.
///   p = 2: weighted least squares, minimum Euclidean norm solution;
///   p = inf: Chebyshev fit through an LP (cutting planes for complex data);
///   p = 1, real data: LP; otherwise damped Newton with smoothing continuation.
/// For p != 2 the kernel component of the (positive-weight) sampling matrix is removed.
inline FitResult weighted_lp_fit(const CMat& a, const CVec& y, const RVec& w, double p, Field field,
                                 const FitOptions& opt = {}) {
    check_exponent(p, "p");
    require(a.rows() == y.size() && w.size() == y.size(), ErrorKind::invalid_parameters,
            "fit: inconsistent sizes");
    require((w.array() >= 0.0).all(), ErrorKind::invalid_parameters, "fit: negative weight");
    CMat ar;
    CVec yr;
    RVec wr;
    detail::restrict_rows(a, y, w, ar, yr, wr);
    const Eigen::Index n = a.cols();
    FitResult out;
    if (ar.rows() == 0) {
        out.coef = CVec::Zero(n);
        out.method = "empty";
        return out;
    }
    const bool real_data = ar.imag().cwiseAbs().maxCoeff() == 0.0 && yr.imag().cwiseAbs().maxCoeff() == 0.0;
    auto project_kernel = [&](CVec c) {
        const CMat k = linalg::kernel_projector(ar);
        CVec out_c = c - k * c;
        if (field == Field::real) out_c = out_c.real().cast<Scalar>();
        return out_c;
    };
    const RVec sw = wr.cwiseSqrt();
    CVec ls = linalg::min_norm_solve(sw.asDiagonal() * ar, sw.asDiagonal() * yr);
    if (field == Field::real && !real_data) {
        // Real coefficients with complex values: stack real and imaginary parts.
        RMat big(2 * ar.rows(), n);
        RVec rhs(2 * ar.rows());
        big << sw.asDiagonal() * ar.real(), sw.asDiagonal() * ar.imag();
        rhs << sw.asDiagonal() * yr.real(), sw.asDiagonal() * yr.imag();
        Eigen::CompleteOrthogonalDecomposition<RMat> cod(big);
        cod.setThreshold(1e-12);
        ls = RVec(cod.solve(rhs)).cast<Scalar>();
    } else if (field == Field::real) {
        ls = ls.real().cast<Scalar>();
    }
    if (p == 2.0) {
        out.coef = ls;
        out.method = "least-squares";
    } else if (is_inf_exponent(p)) {
        const lp::ChebyshevResult r = lp::chebyshev_fit(ar, yr, field);
        out.coef = project_kernel(r.coef);
        out.iterations = r.rounds;
        out.method = "chebyshev-lp";
    } else if (p == 1.0 && real_data && field == Field::real) {
        out.coef = project_kernel(lp::l1_fit_real(ar.real(), yr.real(), wr).cast<Scalar>());
        out.method = "l1-lp";
    } else {
        const double scale = std::max(1e-300, yr.cwiseAbs().maxCoeff());
        CVec c = ls;
        int iters = 0;
        if (p > 2.0) {
            c = detail::newton_lp(ar, yr, wr, p, field, c, 0.0, opt.max_newton, iters);
        } else {
            for (double eps = 1e-1 * scale; eps > 1e-13 * scale; eps *= 0.1)
                c = detail::newton_lp(ar, yr, wr, p, field, c, eps, opt.max_newton, iters);
        }
        out.coef = project_kernel(c);
        out.iterations = iters;
        out.method = "newton";
        if (!out.coef.allFinite()) throw ConvergenceError("lp fit diverged", c);
    }
    out.residual_norm = weighted_norm(a * out.coef - y, w, p);
    return out;
}

}  // namespace sdisc::fit
