#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "sdisc/core.hpp"
#include "sdisc/linalg.hpp"

namespace sdisc::lp {

enum class Status { optimal, infeasible, unbounded, iteration_limit };

struct StandardResult {
    Status status = Status::iteration_limit;
    RVec z;       ///< primal solution of min f'z, Ez = g, z >= 0
    RVec duals;   ///< y maximizing g'y subject to E'y <= f
    double objective = 0.0;
};

namespace detail {

class Tableau {
public:
    Tableau(const RMat& e, const RVec& g) : rows_(e.rows()), cols_(e.cols()) {
        t_ = RMat::Zero(rows_ + 1, cols_ + rows_ + 1);
        sign_.resize(rows_);
        for (Eigen::Index i = 0; i < rows_; ++i) {
            sign_[i] = g(i) < 0 ? -1.0 : 1.0;
            t_.row(i).head(cols_) = sign_[i] * e.row(i);
            t_(i, cols_ + i) = 1.0;
            t_(i, rhs()) = sign_[i] * g(i);
        }
        basis_.resize(rows_);
        for (Eigen::Index i = 0; i < rows_; ++i) basis_[i] = cols_ + i;
    }

    Eigen::Index rhs() const { return cols_ + rows_; }

    // Reduced-cost row for objective c over all columns (artificials included).
    void set_objective(const RVec& c_all) {
        t_.row(rows_).setZero();
        t_.row(rows_).head(cols_ + rows_) = c_all.transpose();
        for (Eigen::Index i = 0; i < rows_; ++i) {
            const double cb = c_all(basis_[i]);
            if (cb != 0.0) t_.row(rows_) -= cb * t_.row(i);
        }
    }

    // Returns optimal / unbounded / iteration_limit. Columns >= allowed are frozen.
    Status run(Eigen::Index allowed, int max_pivots) {
        const double tol = 1e-10;
        int degenerate_streak = 0;
        for (int it = 0; it < max_pivots; ++it) {
            const bool bland = degenerate_streak > 50;
            Eigen::Index enter = -1;
            double best = -tol;
            for (Eigen::Index j = 0; j < allowed; ++j) {
                const double rc = t_(rows_, j);
                if (rc < best) {
                    enter = j;
                    best = rc;
                    if (bland) break;
                }
            }
            if (enter < 0) return Status::optimal;
            Eigen::Index leave = -1;
            double ratio = std::numeric_limits<double>::infinity();
            for (Eigen::Index i = 0; i < rows_; ++i) {
                const double a = t_(i, enter);
                if (a > 1e-12) {
                    const double r = t_(i, rhs()) / a;
                    if (r < ratio - 1e-14 || (bland && leave >= 0 && std::abs(r - ratio) <= 1e-14 && basis_[i] < basis_[leave])) {
                        ratio = r;
                        leave = i;
                    }
                }
            }
            if (leave < 0) return Status::unbounded;
            degenerate_streak = ratio <= 1e-14 ? degenerate_streak + 1 : 0;
            pivot(leave, enter);
        }
        return Status::iteration_limit;
    }

    void pivot(Eigen::Index r, Eigen::Index c) {
        t_.row(r) /= t_(r, c);
        for (Eigen::Index i = 0; i <= rows_; ++i) {
            if (i == r) continue;
            const double f = t_(i, c);
            if (f != 0.0) t_.row(i) -= f * t_.row(r);
        }
        basis_[r] = c;
    }

    // After phase I: pivot artificials out of the basis where possible.
    void expel_artificials() {
        for (Eigen::Index i = 0; i < rows_; ++i) {
            if (basis_[i] < cols_) continue;
            Eigen::Index c = -1;
            double best = 1e-9;
            for (Eigen::Index j = 0; j < cols_; ++j)
                if (std::abs(t_(i, j)) > best) {
                    best = std::abs(t_(i, j));
                    c = j;
                }
            if (c >= 0) pivot(i, c);
        }
    }

    double value() const { return -t_(rows_, rhs()); }
    RVec primal() const {
        RVec z = RVec::Zero(cols_);
        for (Eigen::Index i = 0; i < rows_; ++i)
            if (basis_[i] < cols_) z(basis_[i]) = t_(i, rhs());
        return z;
    }
    // y' = f_B' B^{-1} for the sign-normalized system; undo the row flips.
    RVec duals(const RVec& c_all) const {
        RVec y(rows_);
        for (Eigen::Index k = 0; k < rows_; ++k) {
            double s = 0.0;
            for (Eigen::Index i = 0; i < rows_; ++i) s += c_all(basis_[i]) * t_(i, cols_ + k);
            y(k) = s * sign_[k];
        }
        return y;
    }

private:
    Eigen::Index rows_, cols_;
    RMat t_;
    std::vector<double> sign_;
    std::vector<Eigen::Index> basis_;
};

}  // namespace detail

/// Two-phase dense tableau simplex for min f'z s.t. Ez = g, z >= 0.
inline StandardResult solve_standard(const RMat& e, const RVec& g, const RVec& f, int max_pivots = 200000) {
    const Eigen::Index rows = e.rows(), cols = e.cols();
    detail::Tableau tab(e, g);
    RVec phase1 = RVec::Zero(cols + rows);
    phase1.tail(rows).setOnes();
    tab.set_objective(phase1);
    StandardResult out;
    Status s = tab.run(cols + rows, max_pivots);
    if (s == Status::iteration_limit) return out;
    if (tab.value() > 1e-8 * std::max(1.0, g.cwiseAbs().maxCoeff())) {
        out.status = Status::infeasible;
        return out;
    }
    tab.expel_artificials();
    RVec phase2 = RVec::Zero(cols + rows);
    phase2.head(cols) = f;
    tab.set_objective(phase2);
    s = tab.run(cols, max_pivots);
    out.status = s;
    if (s != Status::optimal) return out;
    out.z = tab.primal();
    out.duals = tab.duals(phase2);
    out.objective = f.dot(out.z);
    return out;
}

struct InequalityResult {
    Status status = Status::iteration_limit;
    RVec x;
    double objective = 0.0;
};

/// min c'x subject to G x <= h with x free, solved through its dual in standard form.
inline InequalityResult solve_inequality(const RVec& c, const RMat& gmat, const RVec& h) {
    const StandardResult d = solve_standard(gmat.transpose(), -c, h);
    InequalityResult out;
    if (d.status == Status::infeasible) {
        out.status = Status::unbounded;
        return out;
    }
    if (d.status == Status::unbounded) {
        out.status = Status::infeasible;
        return out;
    }
    out.status = d.status;
    if (d.status != Status::optimal) return out;
    out.x = d.duals;
    out.objective = c.dot(out.x);
    return out;
}

struct ChebyshevResult {
    CVec coef;
    double max_residual = 0.0;  ///< max_j |(a c - y)_j| at the returned coef
    double lower_bound = 0.0;   ///< LP value of the last relaxation
    int rounds = 0;
};

/// Discrete Chebyshev fit min_c max_j |(a c - y)_j|. Real field: exact LP. Complex field:
/// cutting-plane LP on |z| <= t <=> Re(e^{-i theta} z) <= t, with directions added at the
/// current residual phases until max|r| <= t_LP (1 + rel_tol).
inline ChebyshevResult chebyshev_fit(const CMat& a, const CVec& y, Field field, double rel_tol = 1e-10,
                                     int max_rounds = 300) {
    const Eigen::Index m = a.rows(), n = a.cols();
    const Eigen::Index nr = linalg::real_dim(n, field);
    const bool real_data = field == Field::real && a.imag().cwiseAbs().maxCoeff() == 0.0 &&
                           (y.size() == 0 || y.imag().cwiseAbs().maxCoeff() == 0.0);
    std::vector<std::pair<Eigen::Index, double>> cuts;
    if (real_data) {
        for (Eigen::Index j = 0; j < m; ++j) {
            cuts.push_back({j, 0.0});
            cuts.push_back({j, pi});
        }
    } else {
        for (Eigen::Index j = 0; j < m; ++j)
            for (int k = 0; k < 4; ++k) cuts.push_back({j, k * pi / 2});
    }
    RVec cost = RVec::Zero(nr + 1);
    cost(nr) = 1.0;
    ChebyshevResult best;
    best.max_residual = std::numeric_limits<double>::infinity();
    const double scale = std::max(1e-300, y.size() ? y.cwiseAbs().maxCoeff() : 0.0);
    for (int round = 1; round <= max_rounds; ++round) {
        RMat g(cuts.size(), nr + 1);
        RVec h(cuts.size());
        for (std::size_t k = 0; k < cuts.size(); ++k) {
            const auto [j, th] = cuts[k];
            const Scalar rot = std::polar(1.0, -th);
            const Eigen::RowVectorXcd row = rot * a.row(j);
            if (field == Field::real) {
                g.row(k).head(n) = row.real();
            } else {
                g.row(k).head(n) = row.real();
                g.row(k).segment(n, n) = -row.imag();
            }
            g(k, nr) = -1.0;
            h(k) = (rot * y(j)).real();
        }
        const InequalityResult r = solve_inequality(cost, g, h);
        if (r.status != Status::optimal)
            throw ConvergenceError("Chebyshev LP did not reach optimality", best.coef);
        const CVec c = linalg::from_real(r.x.head(nr), field);
        const CVec res = a * c - y;
        const double mx = m ? res.cwiseAbs().maxCoeff() : 0.0;
        if (mx < best.max_residual) {
            best.coef = c;
            best.max_residual = mx;
        }
        best.lower_bound = std::max(best.lower_bound, r.x(nr));
        best.rounds = round;
        if (real_data || best.max_residual <= best.lower_bound * (1 + rel_tol) + 1e-14 * scale) return best;
        const double cut_level = r.x(nr) * (1 + rel_tol);
        for (Eigen::Index j = 0; j < m; ++j)
            if (std::abs(res(j)) > cut_level) cuts.push_back({j, std::arg(res(j))});
    }
    return best;
}

/// Real weighted l1 fit min_c sum_j w_j |(a c - y)_j| as an LP in (c, s).
inline RVec l1_fit_real(const RMat& a, const RVec& y, const RVec& w) {
    const Eigen::Index m = a.rows(), n = a.cols();
    RMat g = RMat::Zero(2 * m, n + m);
    RVec h(2 * m);
    for (Eigen::Index j = 0; j < m; ++j) {
        g.row(2 * j).head(n) = a.row(j);
        g(2 * j, n + j) = -1.0;
        h(2 * j) = y(j);
        g.row(2 * j + 1).head(n) = -a.row(j);
        g(2 * j + 1, n + j) = -1.0;
        h(2 * j + 1) = -y(j);
    }
    RVec c = RVec::Zero(n + m);
    c.tail(m) = w;
    const InequalityResult r = solve_inequality(c, g, h);
    if (r.status != Status::optimal) throw ConvergenceError("l1 LP did not reach optimality", CVec());
    return r.x.head(n);
}

}  // namespace sdisc::lp
