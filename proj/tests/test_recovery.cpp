#include <gtest/gtest.h>

#include "sdisc/recovery.hpp"

using namespace sdisc;

namespace {

const double inf = std::numeric_limits<double>::infinity();

std::vector<Point> equispaced(int m) {
    std::vector<Point> out;
    for (int j = 0; j < m; ++j) out.push_back({two_pi * j / m});
    return out;
}

Subspace constants_on_interval() {
    const FunctionSystem aug = make_fa(0.25).augmented_with_constant();
    CMat mix = CMat::Zero(2, 1);
    mix(1, 0) = 1.0;
    return Subspace(aug, mix);
}

// Random real table system on a finite set.
Subspace random_table(int k, int n, std::uint64_t seed) {
    Rng rng = make_rng(seed, 0);
    CMat t(k, n);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < n; ++j) t(i, j) = normal(rng);
    return FunctionSystem::discrete(t);
}

Function bump(double c, double w) {
    return [c, w](const Point& x) { return Scalar(std::exp(-std::pow((x[0] - c) / w, 2))); };
}

}  // namespace

TEST(EllFit, ReproducesSpanElements) {
    const Subspace x = FunctionSystem::hat_family({0.25, 0.1});
    const PointSet pts(std::vector<Point>{{0.05}, {0.2}, {0.3}, {0.45}});
    CVec c(2);
    c << 1.5, -0.7;
    for (double p : {1.0, 1.5, 2.0, 3.0, inf}) {
        const CVec u = ell_fit(span_function(x, c), x, pts, p);
        EXPECT_LT((u - c).norm(), 1e-8) << p;
    }
}

TEST(EllFit, ChebyshevCenter) {
    const Subspace one = constants_on_interval();
    const PointSet pts(std::vector<Point>{{0.125}, {0.75}});
    const CVec u = ell_fit([](const Point& x) { return Scalar(fa(0.25, x[0])); }, one, pts, inf);
    EXPECT_NEAR(u(0).real(), 0.5, 1e-12);
    const CVec y = sample_vector([](const Point& x) { return Scalar(fa(0.25, x[0])); }, pts);
    EXPECT_NEAR((y - one.eval_rows(pts.points) * u).cwiseAbs().maxCoeff(), 0.5, 1e-12);
}

TEST(EllFit, LeastSquaresIsLinear) {
    const Subspace x = FunctionSystem::trig_degree(2);
    Rng rng = make_rng(1, 0);
    const PointSet pts(draw_points(DomainSpec::torus(1, 32), 9, rng));
    CVec f(9), g(9);
    for (int j = 0; j < 9; ++j) {
        f(j) = Scalar(normal(rng), normal(rng));
        g(j) = Scalar(normal(rng), normal(rng));
    }
    const Scalar a(0.3, -1.2), b(2.0, 0.5);
    const CVec lhs = ell_fit(CVec(a * f + b * g), x, pts, 2.0);
    const CVec rhs = a * ell_fit(f, x, pts, 2.0) + b * ell_fit(g, x, pts, 2.0);
    EXPECT_LT((lhs - rhs).norm(), 1e-10);
}

TEST(EllFit, WrongLength) {
    EXPECT_THROW(ell_fit(CVec::Ones(2), FunctionSystem::trig_degree(1), PointSet(equispaced(3)), 2.0), Error);
}

TEST(SigmaV, ParsevalExample) {
    const Subspace modes = FunctionSystem::trig({{0}, {1}, {2}, {3}});
    const DomainSpec dom = DomainSpec::torus(1, 32);
    const Function f = [](const Point& x) { return std::polar(1.0, x[0]) + 0.5 * std::polar(1.0, 3 * x[0]); };
    const SigmaResult s = sigma_v(f, modes, 1, NormSpec{}, dom);
    EXPECT_NEAR(s.value, 0.5, 1e-12);
    EXPECT_EQ(s.support, (std::vector<std::size_t>{1}));
    EXPECT_NEAR(sigma_v(f, modes, 0, NormSpec{}, dom).value, std::sqrt(1.25), 1e-12);
    EXPECT_NEAR(sigma_v(f, modes, 2, NormSpec{}, dom).value, 0.0, 1e-12);
    EXPECT_NEAR(sigma_v(f, modes, 2, NormSpec{inf, std::nullopt, {}}, dom).value, 0.0, 1e-9);
}

TEST(SigmaV, TiesKeepFirstSupport) {
    const Subspace modes = FunctionSystem::trig({{1}, {2}, {3}});
    const Function f = [](const Point& x) { return std::polar(1.0, x[0]) + std::polar(1.0, 2 * x[0]); };
    EXPECT_EQ(sigma_v(f, modes, 1, NormSpec{}, DomainSpec::torus(1, 16)).support, (std::vector<std::size_t>{0}));
}

TEST(SigmaV, DiscreteNorm) {
    const Subspace x = FunctionSystem::hat_family({0.25, 0.1, 0.05});
    const PointSet pts(std::vector<Point>{{0.01}, {0.15}, {0.3}, {0.45}, {0.6}});
    const Function f = bump(0.2, 0.2);
    NormSpec ns;
    ns.p = 2.0;
    ns.at = pts;
    const SigmaResult s = sigma_v(f, x, 2, ns, DomainSpec::interval(32));
    const RecoveryReport r = recover_universal(RecoveryInput(f), x, 2, pts, 2.0, Variant::lp_s, DomainSpec::interval(32));
    EXPECT_NEAR(r.errors.at("Lp_xi"), s.value, 1e-12);
    EXPECT_EQ(r.support, s.support);
}

TEST(SigmaV, Guard) {
    const CollectionSpec c{FunctionSystem::discrete(CMat::Identity(40, 40)), 20};
    EXPECT_THROW(sigma_v([](const Point&) { return Scalar(1.0); }, c.dictionary, 20, NormSpec{},
                         DomainSpec::finite_set(40)),
                 Error);
}

TEST(Recover, FullSpanEqualsEllFit) {
    const Subspace x = FunctionSystem::hat_family({0.25, 0.1});
    const DomainSpec dom = DomainSpec::interval(32);
    const PointSet pts(std::vector<Point>{{0.05}, {0.2}, {0.3}, {0.45}});
    const Function f = bump(0.3, 0.1);
    for (Variant var : {Variant::lp, Variant::lp_s}) {
        const RecoveryReport r = recover_universal(RecoveryInput(f), x, 2, pts, 2.0, var, dom);
        EXPECT_LT((r.coef - ell_fit(f, x, pts, 2.0)).norm(), 1e-12);
    }
    const RecoveryReport r = recover_universal(RecoveryInput(f), x, 2, pts, 2.0, Variant::lp_inf, dom);
    EXPECT_LT((r.coef - ell_fit(f, x, pts, inf)).norm(), 1e-9);
}

TEST(Recover, SamplesOnlyNeedsSampleVariant) {
    const Subspace x = FunctionSystem::trig_degree(1);
    const PointSet pts(equispaced(4));
    const RecoveryInput in = RecoveryInput::from_samples(CVec::Ones(4));
    EXPECT_NO_THROW(recover_universal(in, x, 1, pts, 2.0, Variant::lp_s, DomainSpec::torus(1, 16)));
    try {
        recover_universal(in, x, 1, pts, 2.0, Variant::lp, DomainSpec::torus(1, 16));
        ADD_FAILURE();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::not_applicable);
    }
}

TEST(Recover, ExactSparseReproduction) {
    const Subspace modes = FunctionSystem::trig_degree(3);  // N = 7
    const DomainSpec dom = DomainSpec::torus(1, 32);
    const PointSet pts(equispaced(9));
    for (int t = 0; t < 10; ++t) {
        Rng rng = make_rng(40, t);
        const std::size_t i = uniform_index(rng, 7), j = (i + 1 + uniform_index(rng, 6)) % 7;
        CVec c = CVec::Zero(7);
        c(i) = Scalar(normal(rng), normal(rng));
        c(j) = Scalar(normal(rng), normal(rng));
        for (double p : {1.0, 2.0, 4.0}) {
            const RecoveryReport r = recover_universal(RecoveryInput(span_function(modes, c)), modes, 2, pts, p,
                                                       Variant::lp_s, dom);
            EXPECT_LT(r.errors.at("Lp"), 1e-8) << t << " " << p;
        }
    }
}

TEST(Recover, ScaleEquivariance) {
    const Subspace x = FunctionSystem::hat_family({0.25, 0.125, 0.0625});
    const DomainSpec dom = DomainSpec::interval(32);
    const PointSet pts(std::vector<Point>{{0.02}, {0.1}, {0.2}, {0.35}, {0.5}});
    const Function f = bump(0.15, 0.1);
    const Scalar c(-2.5, 0.0);
    const Function cf = [&](const Point& x) { return c * f(x); };
    for (Variant var : {Variant::lp, Variant::lp_s}) {
        const RecoveryReport a = recover_universal(RecoveryInput(f), x, 1, pts, 2.0, var, dom);
        const RecoveryReport b = recover_universal(RecoveryInput(cf), x, 1, pts, 2.0, var, dom);
        EXPECT_EQ(a.support, b.support);
        EXPECT_LT((b.coef - c * a.coef).norm(), 1e-10);
    }
    const RecoveryReport a = recover_universal(RecoveryInput(f), x, 1, pts, 3.0, Variant::lp_inf, dom);
    const RecoveryReport b = recover_universal(RecoveryInput(cf), x, 1, pts, 3.0, Variant::lp_inf, dom);
    EXPECT_EQ(a.support, b.support);
}

TEST(Recover, ModePlusPerturbation) {
    const Subspace modes = FunctionSystem::trig_degree(3);
    const DomainSpec dom = DomainSpec::torus(1, 64);
    const PointSet pts(equispaced(13));
    const double delta = 0.05;
    const Function f = [&](const Point& x) { return std::polar(1.0, 2 * x[0]) + delta * std::cos(5 * x[0]); };
    AuditInstance inst{modes, dom, pts, {f}};
    inst.v = 1;
    const RecoveryReport r = lebesgue_audit(Theorem::ubT5, inst);
    ASSERT_NE(r.status, AuditStatus::not_applicable) << r.note;
    EXPECT_LE(r.errors.at("Lp"), (2 * r.constants.at("D") + 1) * delta + 1e-8);
    EXPECT_EQ(r.status, AuditStatus::holds);
}

TEST(Audit, SpanElementTrivial) {
    const Subspace x = FunctionSystem::hat_family({0.25, 0.1});
    const DomainSpec dom = DomainSpec::interval(32);
    const PointSet pts(std::vector<Point>{{0.05}, {0.2}, {0.3}});
    CVec c(2);
    c << 1.0, 2.0;
    const AuditInstance inst{x, dom, pts, {span_function(x, c)}};
    for (Theorem th : {Theorem::BT1, Theorem::BT1a, Theorem::BT2}) {
        const RecoveryReport r = lebesgue_audit(th, inst);
        EXPECT_EQ(r.status, AuditStatus::holds) << to_string(th);
        EXPECT_LT(r.errors.at("Lp"), 1e-8);
        EXPECT_LT(r.errors.at("d_inf"), 1e-8);
    }
}

TEST(Audit, BT2EquispacedTrig) {
    const Subspace x = FunctionSystem::trig_degree(1);
    const DomainSpec dom = DomainSpec::torus(1, 64);
    const Function f = [](const Point& x) { return Scalar(std::cos(x[0]) + 0.1 * std::cos(3 * x[0])); };
    const RecoveryReport r = lebesgue_audit(Theorem::BT2, AuditInstance{x, dom, PointSet(equispaced(3)), {f}});
    EXPECT_EQ(r.status, AuditStatus::holds);
    EXPECT_NEAR(r.constants.at("D"), 1.0, 1e-6);
    EXPECT_GE(r.min_slack(), 0.0);
}

TEST(Audit, BT1WithWeightsAndBudget) {
    const Subspace x = FunctionSystem::trig_degree(2);
    const DomainSpec dom = DomainSpec::torus(1, 64);
    const WeightedDiscretizer disc = [](const Subspace&) {
        WeightedDiscretization w;
        w.points = PointSet(equispaced(8), std::vector<double>(8, 1.0 / 8));
        return w;
    };
    const BudgetResult b = weight_budget_trick(x, dom, disc);
    const Function f = [](const Point& x) { return Scalar(std::exp(std::sin(x[0]))); };
    for (double p : {1.0, 2.0, 3.0}) {
        const RecoveryReport r = lebesgue_audit(Theorem::BT1, AuditInstance{x, dom, b.points, {f}, p});
        EXPECT_EQ(r.status, AuditStatus::holds) << p;
        EXPECT_NEAR(r.constants.at("W"), b.weight_sum, 1e-15);
    }
    const RecoveryReport r = lebesgue_audit(Theorem::BT1, AuditInstance{x, dom, b.points, {f}, inf});
    EXPECT_EQ(r.status, AuditStatus::holds);
}

TEST(Audit, NonInjectiveIsNotApplicable) {
    const Subspace x = FunctionSystem::trig_degree(2);
    const RecoveryReport r = lebesgue_audit(
        Theorem::BT2, AuditInstance{x, DomainSpec::torus(1, 32), PointSet(equispaced(3)), {bump(1.0, 0.5)}});
    EXPECT_EQ(r.status, AuditStatus::not_applicable);
}

TEST(Audit, RandomizedInterval) {
    const DomainSpec dom = DomainSpec::interval(32);
    int checked = 0;
    for (int t = 0; t < 6; ++t) {
        Rng rng = make_rng(55, t);
        const Subspace x = FunctionSystem::hat_family({0.3, 0.15, 0.07});
        const PointSet pts(draw_points(dom, 6, rng));
        const Function f = bump(uniform01(rng), 0.05 + 0.3 * uniform01(rng));
        for (Theorem th : {Theorem::BT1, Theorem::BT1a, Theorem::BT2}) {
            const RecoveryReport r = lebesgue_audit(th, AuditInstance{x, dom, pts, {f}, 1.0 + 2.0 * uniform01(rng)});
            EXPECT_NE(r.status, AuditStatus::violated) << to_string(th) << " " << t;
            if (r.status == AuditStatus::holds) {
                ++checked;
                for (const AuditLine& a : r.audits) EXPECT_GE(a.slack, -1e-8) << a.name;
            }
        }
    }
    EXPECT_GT(checked, 0);
}

TEST(Audit, UniversalTheorems) {
    const Subspace d = random_table(24, 4, 3);
    const DomainSpec dom = DomainSpec::finite_set(24);
    std::vector<Point> pts;
    for (int j = 0; j < 10; ++j) pts.push_back({static_cast<double>(2 * j)});
    Rng rng = make_rng(8, 0);
    std::vector<Function> fs;
    for (int k = 0; k < 3; ++k) {
        CVec c = CVec::Zero(4);
        c(uniform_index(rng, 4)) = 1.0;
        std::vector<double> noise(24);
        for (double& v : noise) v = 0.1 * normal(rng);
        fs.push_back([d, c, noise](const Point& x) { return d.eval(c, x) + noise[static_cast<std::size_t>(x[0])]; });
    }
    AuditInstance inst{d, dom, PointSet(pts), fs};
    inst.v = 1;
    inst.p = 2.0;
    for (Theorem th : {Theorem::ubT3, Theorem::ubT5, Theorem::ubT6}) {
        const RecoveryReport r = lebesgue_audit(th, inst);
        EXPECT_NE(r.status, AuditStatus::not_applicable) << to_string(th) << r.note;
        EXPECT_EQ(r.status, AuditStatus::holds) << to_string(th);
        for (const AuditLine& a : r.audits)
            if (a.kind == "corrected") EXPECT_EQ(a.status, AuditStatus::holds);
    }
    inst.v = 3;
    EXPECT_EQ(lebesgue_audit(Theorem::ubT5, inst).status, AuditStatus::not_applicable);
}

TEST(Audit, ExistenceTheoremsOnSearchedPoints) {
    const Subspace x = FunctionSystem::hat_family({0.25, 0.125});
    const DomainSpec dom = DomainSpec::interval(32);
    AuditInstance inst{x, dom, PointSet(std::vector<Point>{{0.5}}), {bump(0.4, 0.2)}};
    inst.search_m = 4;
    inst.search_restarts = 2;
    for (Theorem th : {Theorem::BT3, Theorem::BT4}) {
        const RecoveryReport r = lebesgue_audit(th, inst);
        EXPECT_EQ(r.status, AuditStatus::holds) << to_string(th);
        EXPECT_EQ(r.constants.at("m"), 4.0);
        EXPECT_FALSE(r.note.empty());
    }
}

// A dictionary {g1, g2} on a finite set where the sample-only algorithm overshoots: the
// samples of f are flat, g1 correlates with them through many small values and has most of
// its L2 mass off the sample set. The LDI(2, inf) hypothesis on X_2 holds with a moderate D,
// yet ||f - lp^s(f)||_2 exceeds (2D + 1) sigma_1(f)_inf. The proof link that fails is
// ||S(h - u)||_inf <= 2 sigma_v(f)_inf; the bound with (1 + D(1 + m^{1/p})) holds.
TEST(Audit, SampleOnlyBoundCounterexample) {
    const int m = 200, k = m + 1;
    const double eps = 1.0 / std::sqrt(m - 1.0), gamma = 10.0;
    CMat t = CMat::Zero(k, 2);
    t(0, 0) = 1.0;
    for (int j = 1; j < m; ++j) t(j, 0) = eps;
    t(m, 0) = gamma * std::sqrt(static_cast<double>(k));
    t(0, 1) = 1.0;
    t(1, 1) = -1.0;
    const Subspace d = FunctionSystem::discrete(t);
    const DomainSpec dom = DomainSpec::finite_set(k);
    std::vector<Point> pts;
    for (int j = 0; j < m; ++j) pts.push_back({static_cast<double>(j)});
    const Function f = [](const Point&) { return Scalar(0.01); };
    AuditInstance inst{d, dom, PointSet(pts), {f}};
    inst.v = 1;
    const RecoveryReport r = lebesgue_audit(Theorem::ubT5, inst);
    ASSERT_NE(r.status, AuditStatus::not_applicable) << r.note;
    EXPECT_EQ(r.support, (std::vector<std::size_t>{0}));
    EXPECT_EQ(r.status, AuditStatus::violated);
    for (const AuditLine& a : r.audits) {
        if (a.name == "||S(h-u)||_inf <= 2 sigma_v(f)_inf") EXPECT_EQ(a.status, AuditStatus::violated);
        if (a.name == "||h-u||_p <= D ||S(h-u)||_inf") EXPECT_EQ(a.status, AuditStatus::holds);
        if (a.kind == "corrected") EXPECT_EQ(a.status, AuditStatus::holds);
    }
    // LDI(2, 2) on the same points would give the bound of the p-norm version.
    const DiscReport d22 = disc_constants(d, dom, PointSet(pts), 2.0, 2.0);
    EXPECT_LE(r.errors.at("Lp"), (2 * d22.D_L.value() + 1) * r.errors.at("sigma_inf") + 1e-8);
}

TEST(Chain, TrigEquispaced) {
    const Subspace x = FunctionSystem::trig_degree(3);
    const RecoveryReport r = chain_audit(x, DomainSpec::torus(1, 64), PointSet(equispaced(7)), std::sqrt(7.0));
    EXPECT_EQ(r.status, AuditStatus::holds);
    EXPECT_NEAR(r.constants.at("M"), std::sqrt(7.0), 1e-9);
    EXPECT_NEAR(r.constants.at("D22"), 1.0, 1e-12);
    for (const AuditLine& a : r.audits) EXPECT_EQ(a.status, AuditStatus::holds) << a.name;
}

TEST(Chain, KieferWolfowitz) {
    const Subspace x = random_table(128, 4, 12);
    const DomainSpec dom = DomainSpec::finite_set(128);
    const KwChainResult k = kw_chain_audit(x, dom, sup_grid(dom), 0, 1e-3, 2, 5);
    EXPECT_TRUE(k.design.converged);
    EXPECT_EQ(k.points.m(), 8u);
    EXPECT_EQ(k.report.status, AuditStatus::holds) << k.report.note;
    for (const AuditLine& a : k.report.audits) EXPECT_EQ(a.status, AuditStatus::holds) << a.name;
}
