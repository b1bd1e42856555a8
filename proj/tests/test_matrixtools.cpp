#include <gtest/gtest.h>

#include "sdisc/matrixtools.hpp"

using namespace sdisc;

namespace {

const double inf = std::numeric_limits<double>::infinity();

CMat random_orthonormal_columns(int m0, int n, Rng& rng, bool complex_entries = false) {
    CMat g(m0, n);
    for (int i = 0; i < m0; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = complex_entries ? Scalar(normal(rng), normal(rng)) : Scalar(normal(rng));
    Eigen::HouseholderQR<CMat> qr(g);
    const CMat q = qr.householderQ() * CMat::Identity(m0, n);
    return std::sqrt(static_cast<double>(m0)) * q;
}

}  // namespace

TEST(BuildDesign, Examples) {
    std::vector<Point> pts{{0.0}, {two_pi / 3}, {2 * two_pi / 3}};
    const auto d = build_design(FunctionSystem::trig_degree(1), PointSet(pts), BasisKind::orthonormal);
    EXPECT_EQ(d.A.rows(), 3);
    EXPECT_NEAR((d.A.cwiseAbs().array() - 1.0).abs().maxCoeff(), 0.0, 1e-14);
    const auto one = build_design(FunctionSystem::trig({{0}}), PointSet(pts), BasisKind::raw);
    EXPECT_TRUE(one.A.isApprox(CMat::Ones(3, 1)));
    const Subspace hats = FunctionSystem::hat_family({0.5, 0.2});
    const PointSet hp(std::vector<Point>{{0.1}, {0.3}, {0.9}});
    CVec c(2);
    c << 0.7, -1.1;
    const auto dh = build_design(hats, hp, BasisKind::raw);
    EXPECT_NEAR((dh.A * c - sample_vector(hats, c, hp)).norm(), 0.0, 1e-12);
    const auto dho = build_design(hats, hp, BasisKind::orthonormal, DomainSpec::interval(32));
    // coefficients in the orthonormal basis: f = sum_i x_i u_i with u = T phi
    const CVec x = dho.T.transpose().fullPivLu().solve(c);
    EXPECT_NEAR((dho.A * x - sample_vector(hats, c, hp)).norm(), 0.0, 1e-12);
}

TEST(OpNorm, Examples) {
    EXPECT_NEAR(opnorm_rp(CMat::Identity(4, 4), 2, 2).value, 1.0, 1e-14);
    CMat a(2, 2);
    a << 1, 0, 1, 0;
    EXPECT_NEAR(opnorm_rp(a, 2, 2).value, std::sqrt(2.0), 1e-14);
    CMat b(2, 2);
    b << 1, 2, 3, 4;
    EXPECT_DOUBLE_EQ(opnorm_rp(b, 1, inf).value, 4.0);
    EXPECT_THROW(opnorm_rp(b, 0.5, 2), Error);
}

TEST(OpNorm, ExactRoutesAgainstOptimizer) {
    Rng rng = make_rng(21, 0);
    for (int t = 0; t < 5; ++t) {
        CMat a(5, 3);
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 3; ++j) a(i, j) = normal(rng);
        Eigen::JacobiSVD<CMat> svd(a);
        EXPECT_NEAR(opnorm_rp(a, 2, 2).value, svd.singularValues()(0), 1e-10);
        for (double p : {1.0, 3.0}) {
            double mx = 0.0;
            for (int j = 0; j < 3; ++j) mx = std::max(mx, fit::weighted_norm(a.col(j), RVec::Ones(5), p));
            EXPECT_EQ(opnorm_rp(a, 1, p).value, mx);
        }
        // p = inf route vs optimizer on the same (r, p)
        const LinearNorm num{a, RVec::Ones(5), inf}, den{CMat::Identity(3, 3), RVec::Ones(3), 3.0};
        const auto rr = maximize_ratio(num, den, 3, Field::real);
        EXPECT_NEAR(opnorm_rp(a, 3.0, inf).value, rr.value, 1e-6 * rr.value);
        // row permutation invariance
        CMat pa = a;
        pa.row(0).swap(pa.row(4));
        EXPECT_NEAR(opnorm_rp(pa, 1.5, 3.0).value, opnorm_rp(a, 1.5, 3.0).value, 1e-8);
    }
}

TEST(SelectRows, StackedIdentity) {
    const int n = 3;
    CMat a(2 * n, n);
    a << CMat::Identity(n, n) / std::sqrt(2.0), CMat::Identity(n, n) / std::sqrt(2.0);
    for (auto method : {SelectMethod::greedy, SelectMethod::exhaustive}) {
        const auto sel = select_rdi_rows(a, n, method);
        EXPECT_NEAR(sel.raw_norm, 1.0 / std::sqrt(2.0), 1e-14);
        EXPECT_NEAR(sel.rdi_constant, 1.0, 1e-12);
        const auto pw = pointwise_check(sel.renormalized ? CMat(a * std::sqrt(2.0 * n)) : a, sel.rows, Side::rdi, 2.0, 1.0);
        EXPECT_TRUE(pw.holds);
    }
}

TEST(SelectRows, SingleColumn) {
    CMat a(2, 1);
    a << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);
    const auto sel = select_rdi_rows(a, 1);
    EXPECT_EQ(sel.rows.size(), 1u);
    EXPECT_NEAR(sel.raw_norm, 1 / std::sqrt(2.0), 1e-15);
    EXPECT_THROW(select_rdi_rows(a, 3), Error);
}

TEST(SelectRows, GreedyWithinFactorTwoOfExhaustive) {
    Rng rng = make_rng(22, 0);
    for (int t = 0; t < 20; ++t) {
        const CMat a = random_orthonormal_columns(10, 3, rng);
        const auto g = select_rdi_rows(a, 3, SelectMethod::greedy);
        const auto e = select_rdi_rows(a, 3, SelectMethod::exhaustive);
        EXPECT_EQ(e.subsets_checked, 120u);
        EXPECT_LE(e.achieved_norm, g.achieved_norm + 1e-12);
        EXPECT_LE(g.achieved_norm, 2.0 * e.achieved_norm);
        // permuting rows leaves the exhaustive optimum unchanged
        CMat pa = a;
        pa.row(1).swap(pa.row(7));
        EXPECT_NEAR(select_rdi_rows(pa, 3, SelectMethod::exhaustive).achieved_norm, e.achieved_norm, 1e-12);
    }
}

TEST(Pointwise, AllRowsAndKernel) {
    Rng rng = make_rng(23, 0);
    const CMat a = random_orthonormal_columns(6, 2, rng);
    std::vector<std::size_t> all{0, 1, 2, 3, 4, 5};
    for (double p : {1.0, 2.0, 3.0}) {
        EXPECT_TRUE(pointwise_check(a, all, Side::ldi, p, 1.0).holds);
        EXPECT_TRUE(pointwise_check(a, all, Side::rdi, p, 1.0).holds);
    }
    CMat b = CMat::Zero(4, 2);
    b(0, 0) = 1;
    b(1, 0) = 1;
    b(2, 1) = 1;
    b(3, 1) = 1;
    const auto r = pointwise_check(b, {0, 1}, Side::ldi, 2.0, 100.0);
    EXPECT_FALSE(r.holds);
    EXPECT_TRUE(std::isinf(r.measured));
    EXPECT_NEAR(std::abs(r.witness(1)), 1.0, 1e-12);
}

TEST(Pointwise, MatrixNormCorollary) {
    Rng rng = make_rng(24, 0);
    for (int t = 0; t < 4; ++t) {
        const CMat a = random_orthonormal_columns(8, 2, rng);
        const auto sel = select_rdi_rows(a, 3);
        for (auto [r, p] : {std::pair{2.0, 2.0}, std::pair{1.0, 3.0}, std::pair{1.5, 2.5}}) {
            const auto c = matrix_norms_corollary(a, sel.rows, r, p, t);
            EXPECT_EQ(c.status, AuditStatus::holds) << r << " " << p;
        }
    }
}

TEST(EvenQ, ProductSystemGivesRdi) {
    Rng rng = make_rng(25, 0);
    for (int n = 1; n <= 3; ++n) {
        const CMat a = random_orthonormal_columns(12, n, rng);
        const auto r = even_q_rdi(a, 4);
        EXPECT_LE(r.m, static_cast<std::size_t>(n * n));
        EXPECT_EQ(r.status, AuditStatus::holds) << r.measured << " vs " << r.claimed;
    }
}
