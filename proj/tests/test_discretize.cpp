#include <gtest/gtest.h>

#include "sdisc/discretize.hpp"

using namespace sdisc;

namespace {

const double inf = std::numeric_limits<double>::infinity();

std::vector<Point> equispaced(int m, double shift = 0.0) {
    std::vector<Point> out;
    for (int j = 0; j < m; ++j) out.push_back({shift + two_pi * j / m});
    return out;
}

Subspace sqrt2_sin() {
    CMat mix(2, 1);
    mix << Scalar(0, 1) / std::sqrt(2.0), Scalar(0, -1) / std::sqrt(2.0);
    return Subspace(FunctionSystem::trig({{-1}, {1}}), mix);
}

std::vector<Point> random_torus_grid_points(int m, int grid, Rng& rng) {
    std::vector<Point> out;
    for (int j = 0; j < m; ++j) out.push_back({two_pi * static_cast<double>(uniform_index(rng, grid)) / grid});
    return out;
}

}  // namespace

TEST(SampleVector, Examples) {
    const PointSet pts(std::vector<Point>{{0.125}, {0.375}, {0.75}});
    const CVec v = sample_vector([](const Point& x) { return Scalar(fa(0.25, x[0])); }, pts);
    EXPECT_DOUBLE_EQ(v(0).real(), 1.0);
    EXPECT_DOUBLE_EQ(v(1).real(), 0.5);
    EXPECT_DOUBLE_EQ(v(2).real(), 0.0);
    const CVec ones = sample_vector([](const Point&) { return Scalar(1.0); }, pts);
    EXPECT_TRUE(ones.isApprox(CVec::Ones(3)));
    const Subspace x = FunctionSystem::hat_family({0.25, 0.1});
    CVec a(2), b(2);
    a << 1.0, 2.0;
    b << -0.5, 3.0;
    EXPECT_TRUE(sample_vector(x, CVec(2.0 * a - 3.0 * b), pts)
                    .isApprox(2.0 * sample_vector(x, a, pts) - 3.0 * sample_vector(x, b, pts)));
}

TEST(DiscNorm, Examples) {
    CVec v(2);
    v << 3.0, 4.0;
    EXPECT_NEAR(disc_norm(v, 2.0), std::sqrt(12.5), 1e-14);
    EXPECT_NEAR(disc_norm(v, 2.0, RVec::Ones(2)), 5.0, 1e-14);
    EXPECT_NEAR(disc_norm(v, inf), 4.0, 0.0);
    for (double q : {1.0, 2.0, 3.5, inf}) EXPECT_NEAR(disc_norm(CVec::Ones(5), q), 1.0, 1e-15);
    RVec bad(2);
    bad << 1.0, -1.0;
    EXPECT_THROW(disc_norm(v, 2.0, bad), Error);
}

TEST(PointSetTest, Invariants) {
    EXPECT_THROW(PointSet(std::vector<Point>{}), Error);
    EXPECT_THROW(PointSet({{0.1}}, {-1.0}), Error);
    PointSet p({{0.1}, {0.2}}, {0.5, 0.7});
    p.weight_budget = 1.0;
    EXPECT_THROW(p.validate(), Error);
}

TEST(DiscConstants, EquispacedTrigIsExact) {
    const auto dom = DomainSpec::torus(1, 64);
    const auto rep = disc_constants(FunctionSystem::trig_degree(1), dom, PointSet(equispaced(3)), 2, 2);
    EXPECT_EQ(rep.method, "eigen-exact");
    EXPECT_NEAR(rep.D_L.value(), 1.0, 1e-12);
    EXPECT_NEAR(rep.D_R.value(), 1.0, 1e-12);
}

TEST(DiscConstants, ConstantSpace) {
    const auto dom = DomainSpec::torus(1, 32);
    const Subspace one = FunctionSystem::trig({{0}});
    for (double p : {1.0, 2.0, 3.0, inf})
        for (double q : {1.0, 2.0, inf}) {
            const auto rep = disc_constants(one, dom, PointSet(std::vector<Point>{{1.234}}), p, q);
            EXPECT_NEAR(rep.D_L.value(), 1.0, 1e-12);
            EXPECT_NEAR(rep.D_R.value(), 1.0, 1e-12);
        }
}

TEST(DiscConstants, KernelGivesInfiniteLeftConstant) {
    const auto dom = DomainSpec::torus(1, 64);
    const PointSet pts(std::vector<Point>{{0.0}, {pi}});
    const Subspace s = sqrt2_sin();
    EXPECT_FALSE(is_injective(s, pts));
    for (double pq : {2.0, 3.0}) {
        const auto rep = disc_constants(s, dom, pts, pq, pq);
        EXPECT_TRUE(rep.D_L.is_infinite());
        EXPECT_NEAR(rep.D_R.value(), 0.0, 1e-12);
    }
}

TEST(Injectivity, Examples) {
    EXPECT_TRUE(is_injective(FunctionSystem::trig_degree(1), equispaced(3)));
    EXPECT_FALSE(is_injective(FunctionSystem::trig_degree(2), equispaced(4)));
    EXPECT_FALSE(is_injective(FunctionSystem::trig_degree(2), equispaced(3)));
}

TEST(DiscConstants, ReplicationInvariance) {
    const auto dom = DomainSpec::torus(1, 64);
    Rng rng = make_rng(2, 0);
    const Subspace x = FunctionSystem::trig_degree(2);
    const PointSet pts(random_torus_grid_points(9, 64, rng));
    for (auto [p, q] : {std::pair{2.0, 2.0}, std::pair{4.0, 3.0}}) {
        DiscOptions o;
        o.seed = 3;
        const auto base = disc_constants(x, dom, pts, p, q, o);
        for (int k : {2, 3}) {
            const auto rep = disc_constants(x, dom, pts.replicated(k), p, q, o);
            EXPECT_NEAR(rep.D_L.value(), base.D_L.value(), 1e-9 * base.D_L.value());
            EXPECT_NEAR(rep.D_R.value(), base.D_R.value(), 1e-9 * base.D_R.value());
        }
    }
}

TEST(DiscConstants, ChainingAndOracle) {
    // Random instances, N <= 6: optimizer equals the eigenvalue route for p = q = 2.
    Rng rng = make_rng(8, 0);
    const auto dom = DomainSpec::torus(1, 64);
    for (int trial = 0; trial < 6; ++trial) {
        const int n = 1 + trial % 3;  // degree 1..3 -> N = 3, 5, 7 truncated below
        std::vector<std::vector<int>> q;
        for (int k = -n; k <= n && static_cast<int>(q.size()) < 6; ++k) q.push_back({k});
        const Subspace x = FunctionSystem::trig(q);
        const PointSet pts(random_torus_grid_points(12, 64, rng));
        const auto exact = disc_constants(x, dom, pts, 2, 2);
        DiscOptions o;
        o.force_optimizer = true;
        o.seed = trial;
        const auto opt = disc_constants(x, dom, pts, 2, 2, o);
        ASSERT_TRUE(exact.D_L.is_finite());
        EXPECT_NEAR(opt.D_R.value(), exact.D_R.value(), 1e-6 * exact.D_R.value());
        EXPECT_NEAR(opt.D_L.value(), exact.D_L.value(), 1e-6 * exact.D_L.value());
        EXPECT_GE(exact.D_L.value() * exact.D_R.value(), 1 - 1e-9);
        const auto gen = disc_constants(x, dom, pts, 3.0, 1.5, o);
        EXPECT_GE(gen.D_L.value() * gen.D_R.value(), 1 - 1e-9);
    }
}

TEST(DiscConstants, PaddingMonotonicity) {
    // m' <= 2m points obtained by repeating m' - m of them: D_L' <= 2^{1/q} D_L.
    const auto dom = DomainSpec::torus(1, 64);
    Rng rng = make_rng(4, 0);
    const Subspace x = FunctionSystem::trig_degree(1);
    const PointSet pts(random_torus_grid_points(5, 64, rng));
    const auto base = disc_constants(x, dom, pts, 2, 2);
    for (int extra = 1; extra <= 5; ++extra) {
        PointSet padded = pts;
        for (int k = 0; k < extra; ++k) padded.points.push_back(pts.points[k]);
        const auto rep = disc_constants(x, dom, padded, 2, 2);
        EXPECT_LE(rep.D_L.value(), std::sqrt(2.0) * base.D_L.value() * (1 + 1e-12));
    }
}

TEST(Rip3, BoundFormula) {
    EXPECT_NEAR(rip3_bound(0.125, 2, 2, 1), 4.0, 1e-12);
    EXPECT_NEAR(rip3_bound(1.0 / 32, 2, 2, 1), 16.0, 1e-12);
    EXPECT_EQ(rip3_bound(0.125, 2, 2, inf), 0.0);
    EXPECT_LT(rip3_bound(0.125, 2, 2, 1e6), 1e-10);
    EXPECT_THROW(rip3_bound(0.3, 2, 2, 1), Error);
}

TEST(Rip3, AuditOnInjectiveSets) {
    Rng rng = make_rng(6, 0);
    for (int t = 0; t < 10; ++t) {
        std::vector<Point> pts;
        const int m = 3 + static_cast<int>(uniform_index(rng, 8));
        for (int j = 0; j < m; ++j) pts.push_back({uniform01(rng)});
        pts.push_back({0.01});  // f_a = f_{a/2} = 1 here
        pts.push_back({0.05});  // f_a = 1, f_{a/2} = 0.4: together injective
        const auto a = rip3_audit(0.0625, 2, 2, PointSet(pts));
        EXPECT_TRUE(a.injective);
        EXPECT_EQ(a.status, AuditStatus::holds);
    }
}

TEST(Ril1, OneDimensionalEquality) {
    const auto dom = DomainSpec::interval(64);
    const Subspace x = make_fa(0.3);
    const PointSet pts({{0.4}}, {0.7});
    const auto a = ril1_audit(x, dom, pts, 4.0, 3.0);
    EXPECT_EQ(a.status, AuditStatus::holds);
    EXPECT_NEAR(a.lhs[0], a.rhs[0], 1e-9 * a.rhs[0]);
}

TEST(Ril1, TrigEquispaced) {
    const auto dom = DomainSpec::torus(1, 64);
    const Subspace x = FunctionSystem::trig_degree(1);
    const PointSet pts(equispaced(5));
    const auto a = ril1_audit(x, dom, pts, 4.0, 2.0);
    EXPECT_EQ(a.status, AuditStatus::holds);
    for (double l : a.lhs) EXPECT_NEAR(l, 3.0 / 5.0, 1e-12);  // lambda_j N with lambda_j = 1/m
}

TEST(Ril1, WeightHomogeneity) {
    const auto dom = DomainSpec::torus(1, 64);
    const Subspace x = FunctionSystem::trig({{0}, {2}});
    const PointSet a({{0.3}, {1.1}, {2.9}}, {0.2, 0.3, 0.5});
    const PointSet b({{0.3}, {1.1}, {2.9}}, {0.6, 0.9, 1.5});
    const auto ra = ril1_audit(x, dom, a, 3.0, 2.0, 1);
    const auto rb = ril1_audit(x, dom, b, 3.0, 2.0, 1);
    for (std::size_t j = 0; j < 3; ++j) {
        EXPECT_NEAR(rb.lhs[j], 3.0 * ra.lhs[j], 1e-12);
        EXPECT_NEAR(rb.rhs[j], 3.0 * ra.rhs[j], 1e-6 * rb.rhs[j]);
    }
}

TEST(Rip1, LacunaryAudit) {
    const auto dom = DomainSpec::torus(1, 128);
    const Subspace x = FunctionSystem::lacunary({1, 3, 9}, 3.0);
    Rng rng = make_rng(10, 0);
    for (int t = 0; t < 3; ++t) {
        const auto a = rip1_audit(x, dom, PointSet(random_torus_grid_points(6, 128, rng)), 4.0, 3.0, t);
        EXPECT_NEAR(a.c, 1.0, 1e-12);
        EXPECT_EQ(a.status, AuditStatus::holds);
    }
}

TEST(RemLosi, Chain) {
    const auto dom = DomainSpec::torus(1, 128);
    const Subspace x = FunctionSystem::lacunary({1, 2, 4}, 2.0);
    const auto a = remlosi_audit(x, dom, PointSet(equispaced(17)), 4.0, 3.0);
    EXPECT_EQ(a.status, AuditStatus::holds);
}

TEST(Khinchin, ConstantFormula) {
    EXPECT_NEAR(khinchin_constant(2.0), 1.0, 1e-14);
    EXPECT_NEAR(std::pow(khinchin_constant(4.0), 4), 3.0, 1e-12);
    EXPECT_NEAR(std::pow(khinchin_constant(6.0), 6), 15.0, 1e-11);  // Gaussian moment (p-1)!!
}

TEST(Khinchin, EnumerationOracles) {
    CVec a(2);
    a << 0.7, -1.3;
    const double x = 0.7, y = 1.3;
    EXPECT_NEAR(rademacher_moment(a, 4.0), std::pow(x, 4) + 6 * x * x * y * y + std::pow(y, 4), 1e-12);
    Rng rng = make_rng(12, 0);
    for (int n = 1; n <= 10; ++n) {
        CVec c(n);
        for (int i = 0; i < n; ++i) c(i) = normal(rng);
        const double s2 = c.squaredNorm();
        double s4 = 0.0;
        for (int i = 0; i < n; ++i) s4 += std::pow(std::abs(c(i)), 4);
        EXPECT_NEAR(rademacher_moment(c, 4.0), 3 * s2 * s2 - 2 * s4, 1e-12 * s2 * s2);
        for (double p : {2.5, 3.0, 5.0}) {
            EXPECT_LE(rademacher_moment(c, p), std::pow(khinchin_constant(p), p) * std::pow(s2, p / 2) * (1 + 1e-12));
            // complex coefficients obey the same bound
            CVec z(n);
            for (int i = 0; i < n; ++i) z(i) = Scalar(normal(rng), normal(rng));
            EXPECT_LE(rademacher_moment(z, p),
                      std::pow(khinchin_constant(p), p) * std::pow(z.squaredNorm(), p / 2) * (1 + 1e-12));
        }
    }
    // Equal coefficients approach the Gaussian moment from below.
    const double k4 = rademacher_moment(CVec::Ones(12) / std::sqrt(12.0), 4.0);
    EXPECT_LT(k4, 3.0);
    EXPECT_GT(k4, 2.8);
    EXPECT_THROW(rademacher_moment(CVec::Ones(13), 4.0), Error);
}

TEST(Khinchin, AuditChains) {
    const auto dom = DomainSpec::torus(1, 64);
    const Subspace x1 = FunctionSystem::trig({{0}});
    const auto one = khinchin_audit(x1, dom, PointSet({{0.3}, {2.0}}, {0.4, 0.6}), 2.0);
    EXPECT_NEAR(one.average, 1.0, 1e-12);  // lambda-weighted christoffel with K_2 = 1
    EXPECT_NEAR(one.khinchin_rhs, one.average, 1e-12);
    const Subspace x = FunctionSystem::trig_degree(2);
    Rng rng = make_rng(13, 0);
    const auto a = khinchin_audit(x, dom, PointSet(random_torus_grid_points(11, 64, rng)), 4.0);
    EXPECT_EQ(a.status, AuditStatus::holds);
    EXPECT_EQ(a.step_lower, AuditStatus::holds);
    EXPECT_EQ(a.step_khinchin, AuditStatus::holds);
}

TEST(Wrdi, TransferFormula) {
    EXPECT_DOUBLE_EQ(wrdi_transfer(2.0, 1.5, 4.0, 2.0), 3.0);
    EXPECT_DOUBLE_EQ(wrdi_transfer(2.0, 1.0, 4.0, 3.0), 2.0);
    EXPECT_THROW(wrdi_transfer(2.0, 1.0, 4.0, 4.0), Error);
    EXPECT_THROW(wrdi_transfer(2.0, 1.0, 4.0, 1.5), Error);
}

TEST(Wrdi, InstanceCheck) {
    const auto dom = DomainSpec::torus(1, 64);
    const Subspace x = FunctionSystem::trig_degree(1);
    const PointSet pts(equispaced(3), {1.0 / 3, 1.0 / 3, 1.0 / 3});
    const auto a = wrdi_transfer_audit(x, dom, pts, 4.0, 2.0);
    EXPECT_EQ(a.status, AuditStatus::holds);
    EXPECT_LE(a.D_r, a.transfer + 1e-9);
}
