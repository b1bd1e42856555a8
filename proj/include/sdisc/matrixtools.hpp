#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "sdisc/discretize.hpp"

namespace sdisc {

enum class BasisKind { raw, orthonormal };

/// m0 x N matrix of basis values: column i = (u_i(xi^1), ..., u_i(xi^{m0})).
struct DesignMatrix {
    CMat A;
    std::string subspace_id;
    std::string pointset_id;
    BasisKind basis = BasisKind::raw;
    CMat T;  ///< orthonormal basis: u = T phi (identity for raw)
};

/// S(f, xi) = A c for f with coefficients c in the chosen basis.
inline DesignMatrix build_design(const Subspace& s, const PointSet& pts, BasisKind basis,
                                 const std::optional<DomainSpec>& dom = std::nullopt, std::string subspace_id = {},
                                 std::string pointset_id = {}) {
    DesignMatrix d;
    d.basis = basis;
    d.subspace_id = std::move(subspace_id);
    d.pointset_id = std::move(pointset_id);
    if (basis == BasisKind::raw) {
        d.A = s.eval_rows(pts.points);
        d.T = CMat::Identity(s.dim(), s.dim());
    } else {
        const OrthoBasis ob = orthonormalize(s, dom ? *dom : natural_domain(s.system()));
        d.A = s.eval_rows(pts.points) * ob.T.transpose();
        d.T = ob.T;
    }
    return d;
}

inline CMat submatrix_rows(const CMat& a, const std::vector<std::size_t>& rows) {
    CMat out(rows.size(), a.cols());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        require(rows[k] < static_cast<std::size_t>(a.rows()), ErrorKind::invalid_parameters, "row index out of range");
        out.row(k) = a.row(static_cast<Eigen::Index>(rows[k]));
    }
    return out;
}

inline Field matrix_field(const CMat& a) { return a.imag().cwiseAbs().maxCoeff() == 0.0 ? Field::real : Field::complex; }

struct OpNorm {
    double value = 0.0;
    CVec witness;
    std::string method;
};

/// ||A||_(r,p) = sup_{||x||_{l_r} <= 1} ||A x||_{l_p} with unweighted l-norms. Exact for (2,2),
/// r = 1 (largest column l_p norm) and p = inf (largest row l_{r'} norm); optimized otherwise.
inline OpNorm opnorm_rp(const CMat& a, double r, double p, std::optional<Field> field = std::nullopt,
                        RatioOptions opt = {}) {
    check_exponent(r, "r");
    check_exponent(p, "p");
    const Eigen::Index n = a.cols();
    OpNorm out;
    const RVec ones_m = RVec::Ones(a.rows());
    if (r == 2.0 && p == 2.0) {
        Eigen::JacobiSVD<CMat> svd(a, Eigen::ComputeFullV);
        out.value = svd.singularValues()(0);
        out.witness = svd.matrixV().col(0);
        out.method = "singular-value";
        return out;
    }
    if (r == 1.0) {
        Eigen::Index best = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double v = fit::weighted_norm(a.col(i), ones_m, p);
            if (v > out.value) {
                out.value = v;
                best = i;
            }
        }
        out.witness = CVec::Unit(n, best);
        out.method = "column-norm";
        return out;
    }
    if (is_inf_exponent(p)) {
        // sup over x of |<row, x>| = ||row||_{r'}, attained at the Hoelder-dual vector.
        const double rp = is_inf_exponent(r) ? 1.0 : (r == 1.0 ? std::numeric_limits<double>::infinity() : r / (r - 1));
        Eigen::Index best = 0;
        for (Eigen::Index j = 0; j < a.rows(); ++j) {
            const double v = fit::weighted_norm(a.row(j).transpose(), RVec::Ones(n), rp);
            if (v > out.value) {
                out.value = v;
                best = j;
            }
        }
        CVec x(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const Scalar e = a(best, i);
            const double mag = std::abs(e);
            const Scalar ph = mag > 0 ? std::conj(e) / mag : Scalar(1.0);
            x(i) = ph * (is_inf_exponent(r) ? 1.0 : std::pow(mag, rp - 1));
        }
        out.witness = x;
        out.method = "row-dual-norm";
        return out;
    }
    const LinearNorm num{a, ones_m, p};
    const LinearNorm den{CMat::Identity(n, n), RVec::Ones(n), r};
    Eigen::JacobiSVD<CMat> svd(a, Eigen::ComputeFullV);
    opt.starts.push_back(svd.matrixV().col(0));
    for (Eigen::Index i = 0; i < n; ++i) opt.probes.push_back(CVec::Unit(n, i));
    const RatioResult rr = maximize_ratio(num, den, n, field.value_or(matrix_field(a)), opt);
    out.value = rr.value;
    out.witness = rr.witness;
    out.method = "optimized";
    return out;
}

// ---------------------------------------------------------------------------
// Row selection
// ---------------------------------------------------------------------------

enum class SelectMethod { greedy, exhaustive };

struct RowSelection {
    std::vector<std::size_t> rows;
    double achieved_norm = 0.0;  ///< ||A1||_(2,2) of the (renormalized) matrix
    double raw_norm = 0.0;       ///< ||A1||_(2,2) of the matrix as given
    double rdi_constant = 0.0;   ///< sup ||A1 x||_{L2^m} / ||A x||_{L2^{m0}}
    double ratio_to_full = 0.0;  ///< ||A1||_(2,2) / ||A||_(2,2)
    bool renormalized = false;
    std::string method;
    std::size_t subsets_checked = 0;  ///< exhaustive: certificate that every subset was scored
};

inline constexpr std::size_t exhaustive_max_rows = 12;
inline constexpr Eigen::Index exhaustive_max_cols = 4;

/// Columns orthonormal in L2^{m0}: (1/m0) A^* A = I within tol.
inline bool columns_orthonormal(const CMat& a, double tol = 1e-6) {
    const CMat g = a.adjoint() * a / static_cast<double>(a.rows());
    return (g - CMat::Identity(a.cols(), a.cols())).cwiseAbs().maxCoeff() <= tol;
}

namespace detail {

inline void for_each_subset(std::size_t n, std::size_t k, const std::function<void(const std::vector<std::size_t>&)>& f) {
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    while (true) {
        f(idx);
        std::size_t i = k;
        while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
        if (i == 0) return;
        ++idx[i - 1];
        for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

}  // namespace detail

/// m distinct rows of A with small (2,2)-norm. Greedy adds, one at a time, the row that keeps
/// the running spectral norm smallest (lowest index on ties); exhaustive scores all C(m0, m)
/// subsets (m0 <= 12, N <= 4). Columns not orthonormal in L2^{m0} are renormalized first.
inline RowSelection select_rdi_rows(const CMat& a_in, std::size_t m, SelectMethod method = SelectMethod::greedy) {
    const std::size_t m0 = static_cast<std::size_t>(a_in.rows());
    require(m >= 1 && m <= m0, ErrorKind::invalid_parameters, "need 1 <= m <= m0");
    RowSelection out;
    CMat a = a_in;
    if (!columns_orthonormal(a_in)) {
        const CMat g = a_in.adjoint() * a_in / static_cast<double>(m0);
        const CMat r = linalg::cholesky_upper(g);
        a = a_in * r.triangularView<Eigen::Upper>().solve(CMat::Identity(r.rows(), r.cols()));
        out.renormalized = true;
    }
    if (method == SelectMethod::greedy) {
        std::vector<bool> used(m0, false);
        CMat gram = CMat::Zero(a.cols(), a.cols());
        for (std::size_t step = 0; step < m; ++step) {
            double best = std::numeric_limits<double>::infinity();
            std::size_t pick = 0;
            for (std::size_t i = 0; i < m0; ++i) {
                if (used[i]) continue;
                const CMat trial = gram + a.row(i).adjoint() * a.row(i);
                Eigen::SelfAdjointEigenSolver<CMat> es(linalg::hermitian_part(trial), Eigen::EigenvaluesOnly);
                const double v = es.eigenvalues().maxCoeff();
                if (std::isinf(best) || v < best - 1e-14 * std::max(1.0, best)) {
                    best = v;
                    pick = i;
                }
            }
            used[pick] = true;
            out.rows.push_back(pick);
            gram += a.row(pick).adjoint() * a.row(pick);
        }
        std::sort(out.rows.begin(), out.rows.end());
        out.method = "greedy";
    } else {
        require(m0 <= exhaustive_max_rows && a.cols() <= exhaustive_max_cols, ErrorKind::size_limit,
                "exhaustive selection limited to m0 <= 12, N <= 4");
        double best = std::numeric_limits<double>::infinity();
        detail::for_each_subset(m0, m, [&](const std::vector<std::size_t>& idx) {
            const double v = linalg::spectral_norm(submatrix_rows(a, idx));
            ++out.subsets_checked;
            if (std::isinf(best) || v < best - 1e-14 * std::max(1.0, best)) {
                best = v;
                out.rows = idx;
            }
        });
        out.method = "exhaustive";
    }
    out.achieved_norm = linalg::spectral_norm(submatrix_rows(a, out.rows));
    out.raw_norm = linalg::spectral_norm(submatrix_rows(a_in, out.rows));
    // ||A x||_{L2^{m0}} = ||x||_2 for orthonormal columns, ||A1 x||_{L2^m} = m^{-1/2} ||A1 x||_2.
    out.rdi_constant = out.achieved_norm / std::sqrt(static_cast<double>(m));
    out.ratio_to_full = out.achieved_norm / linalg::spectral_norm(a);
    return out;
}

// ---------------------------------------------------------------------------
// Pointwise estimates
// ---------------------------------------------------------------------------

enum class Side { ldi, rdi };

struct PointwiseResult {
    bool holds = false;
    double measured = 0.0;  ///< sup of the ratio (inf when A1 kills a direction A does not)
    CVec witness;
    std::string method;
};

namespace detail {

inline LinearNorm lpm_norm(const CMat& a, double p) {
    return LinearNorm{a, RVec::Constant(a.rows(), 1.0 / static_cast<double>(a.rows())), p};
}

}  // namespace detail

/// LDI side: ||A x||_p <= D ||A1 x||_p; RDI side: ||A1 x||_p <= D ||A x||_p, in L_p^m norms.
inline PointwiseResult pointwise_check(const CMat& a, const std::vector<std::size_t>& rows, Side side, double p,
                                       double d, RatioOptions opt = {}) {
    check_exponent(p, "p");
    const CMat a1 = submatrix_rows(a, rows);
    const Eigen::Index n = a.cols();
    const LinearNorm full = detail::lpm_norm(a, p), sub = detail::lpm_norm(a1, p);
    const LinearNorm& num = side == Side::ldi ? full : sub;
    const LinearNorm& den = side == Side::ldi ? sub : full;
    PointwiseResult out;
    // Directions killed by the denominator but not the numerator make the ratio infinite.
    Eigen::JacobiSVD<CMat> svd(den.matrix, Eigen::ComputeFullV);
    const Eigen::Index rk = linalg::numerical_rank(den.matrix);
    for (Eigen::Index k = rk; k < n; ++k) {
        const CVec v = svd.matrixV().col(k);
        if (num.value(v) > 1e-9 * linalg::spectral_norm(num.matrix)) {
            out.measured = std::numeric_limits<double>::infinity();
            out.witness = v;
            out.holds = false;
            out.method = "kernel";
            return out;
        }
    }
    if (p == 2.0 && rk == n) {
        const CMat hn = num.matrix.adjoint() * num.weights.asDiagonal() * num.matrix;
        const CMat hd = den.matrix.adjoint() * den.weights.asDiagonal() * den.matrix;
        const linalg::GenEig ge = linalg::generalized_eig(hn, hd);
        out.measured = std::sqrt(std::max(0.0, ge.values(n - 1)));
        out.witness = ge.vectors.col(n - 1).normalized();
        out.method = "eigen-exact";
    } else {
        const RatioResult rr = maximize_ratio(num, den, n, matrix_field(a), opt);
        out.measured = rr.value;
        out.witness = rr.witness;
        out.method = "optimized";
    }
    out.holds = within(out.measured, d);
    return out;
}

struct MatrixNormCorollary {
    double lhs = 0.0;  ///< ||A1||_(r,p)^p
    double rhs = 0.0;  ///< D^p (m/m0) ||A||_(r,p)^p
    double D = 0.0;    ///< measured RDI-side constant (probed at the A1 norm witness)
    AuditStatus status = AuditStatus::not_applicable;
};

/// The RDI pointwise estimate with measured D implies ||A1||^p_(r,p) <= D^p (m/m0) ||A||^p_(r,p).
inline MatrixNormCorollary matrix_norms_corollary(const CMat& a, const std::vector<std::size_t>& rows, double r,
                                                  double p, std::uint64_t seed = 0) {
    require(!is_inf_exponent(p), ErrorKind::invalid_parameters, "corollary needs p < inf");
    const CMat a1 = submatrix_rows(a, rows);
    RatioOptions ro;
    ro.seed = seed;
    const OpNorm n1 = opnorm_rp(a1, r, p, std::nullopt, ro);
    RatioOptions ro2 = ro;
    ro2.probes.push_back(n1.witness);
    const OpNorm n0 = opnorm_rp(a, r, p, std::nullopt, ro2);
    const double full_at_w = fit::weighted_norm(a * n1.witness, RVec::Ones(a.rows()), p) /
                             fit::weighted_norm(n1.witness, RVec::Ones(a.cols()), r);
    RatioOptions ro3 = ro;
    ro3.probes.push_back(n1.witness);
    PointwiseResult pw = pointwise_check(a, rows, Side::rdi, p, 0.0, ro3);
    MatrixNormCorollary out;
    out.D = pw.measured;
    out.lhs = std::pow(n1.value, p);
    const double full = std::max(n0.value, full_at_w);
    out.rhs = std::pow(out.D, p) * static_cast<double>(rows.size()) / static_cast<double>(a.rows()) * std::pow(full, p);
    out.status = std::isinf(out.D) ? AuditStatus::not_applicable : status_of(within(out.lhs, out.rhs));
    return out;
}

// ---------------------------------------------------------------------------
// Even-p corollary through product systems
// ---------------------------------------------------------------------------

struct EvenQResult {
    int p = 4;
    std::size_t N = 0, m = 0;  ///< m = dim of the product space <= N^{p/2}
    RowSelection selection;    ///< RDI(2,2) selection for the product space
    double D_products = 0.0;   ///< RDI(2,2) constant of the products at the selection
    double claimed = 0.0;      ///< D_products^{2/p}
    double measured = 0.0;     ///< RDI(p) of X at the selected points, measured directly
    AuditStatus status = AuditStatus::not_applicable;
};

/// X given by the values A (m0 x N) on m0 equally weighted atoms. For p = 2s the functions f^s
/// span the s-fold product space Y; an RDI(2,2) selection for Y with m = dim Y points gives
/// RD(m, p, D_Y^{2/p}) for X since |f|^p = |f^s|^2.
inline EvenQResult even_q_rdi(const CMat& a, int p, SelectMethod method = SelectMethod::greedy,
                              std::uint64_t seed = 0) {
    require(p >= 2 && p % 2 == 0, ErrorKind::invalid_parameters, "p must be an even integer");
    const int s = p / 2;
    const Eigen::Index m0 = a.rows(), n = a.cols();
    // All multisets i_1 <= ... <= i_s.
    std::vector<std::vector<Eigen::Index>> sets{{}};
    for (int level = 0; level < s; ++level) {
        std::vector<std::vector<Eigen::Index>> next;
        for (const auto& st : sets)
            for (Eigen::Index i = st.empty() ? 0 : st.back(); i < n; ++i) {
                auto e = st;
                e.push_back(i);
                next.push_back(e);
            }
        sets = std::move(next);
    }
    CMat prod(m0, static_cast<Eigen::Index>(sets.size()));
    for (std::size_t k = 0; k < sets.size(); ++k)
        for (Eigen::Index j = 0; j < m0; ++j) {
            Scalar v = 1.0;
            for (Eigen::Index i : sets[k]) v *= a(j, i);
            prod(j, static_cast<Eigen::Index>(k)) = v;
        }
    Eigen::JacobiSVD<CMat> svd(prod, Eigen::ComputeThinU);
    const Eigen::Index rk = linalg::numerical_rank(prod);
    const CMat ay = std::sqrt(static_cast<double>(m0)) * svd.matrixU().leftCols(rk);
    EvenQResult out;
    out.p = p;
    out.N = static_cast<std::size_t>(n);
    out.m = static_cast<std::size_t>(rk);
    out.selection = select_rdi_rows(ay, out.m, method);
    out.D_products = out.selection.rdi_constant;
    out.claimed = std::pow(out.D_products, 2.0 / p);

    const DomainSpec dom = DomainSpec::finite_set(static_cast<std::size_t>(m0));
    const Subspace x = FunctionSystem::discrete(a);
    std::vector<Point> pts;
    for (std::size_t r : out.selection.rows) pts.push_back({static_cast<double>(r)});
    DiscOptions o;
    o.seed = seed;
    out.measured = disc_constants(x, dom, PointSet(pts), p, p, o).D_R.value();
    out.status = status_of(within(out.measured, out.claimed));
    return out;
}

}  // namespace sdisc
