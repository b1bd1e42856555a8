#include <gtest/gtest.h>

#include "sdisc/fnspace.hpp"

using namespace sdisc;

namespace {

const double inf = std::numeric_limits<double>::infinity();

// sqrt 2 sin x = (e^{ix} - e^{-ix}) / (sqrt 2 i) over trig({-1, 1}).
Subspace sqrt2_sin() {
    CMat mix(2, 1);
    mix << Scalar(0, 1) / std::sqrt(2.0), Scalar(0, -1) / std::sqrt(2.0);
    return Subspace(FunctionSystem::trig({{-1}, {1}}), mix);
}

}  // namespace

TEST(EvalSystem, ClosedForms) {
    EXPECT_NEAR(std::abs(eval_system(FunctionSystem::trig({{0}}), {{1.234}})(0, 0) - 1.0), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(eval_system(FunctionSystem::trig({{1}}), {{pi}})(0, 0) + 1.0), 0.0, 1e-15);
    EXPECT_DOUBLE_EQ(eval_system(make_fa(0.25), {{0.375}})(0, 0).real(), 0.5);
    EXPECT_DOUBLE_EQ(fa(0.25, 0.25), 1.0);
    EXPECT_DOUBLE_EQ(fa(0.25, 0.5), 0.0);
}

TEST(EvalSystem, DomainMismatch) {
    try {
        eval_system(make_fa(0.25), {{1.5}});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::domain_mismatch);
    }
    EXPECT_THROW(eval_system(FunctionSystem::trig({{1, 2}}), {{0.5}}), Error);
}

TEST(FunctionSystemTest, Validation) {
    EXPECT_THROW(make_fa(0.0), Error);
    EXPECT_THROW(make_fa(0.6), Error);
    EXPECT_THROW(FunctionSystem::lacunary({1, 2, 3}, 2.0), Error);
    EXPECT_NO_THROW(FunctionSystem::lacunary({1, 2, 4, 8}, 2.0));
    EXPECT_THROW(DomainSpec::interval(1), Error);
    EXPECT_THROW(DomainSpec::finite_set(3).with_atomic_measure({{0}, {1}}, {0.5, 0.6}), Error);
}

TEST(Gram, TrigIsIdentity) {
    const auto dom = DomainSpec::torus(1, 64);
    const CMat g = gram(FunctionSystem::trig_degree(3), dom);
    EXPECT_TRUE(g.isApprox(CMat::Identity(7, 7), 1e-14));
}

TEST(Gram, HatPairClosedForm) {
    // int f_{1/4}^2 = 1/3, int f_{1/8}^2 = 1/6, int f_{1/4} f_{1/8} = 3/16 (piecewise polynomials).
    const CMat g = gram(FunctionSystem::hat_family({0.25, 0.125}), DomainSpec::interval(16));
    EXPECT_NEAR(g(0, 0).real(), 1.0 / 3, 1e-14);
    EXPECT_NEAR(g(1, 1).real(), 1.0 / 6, 1e-14);
    EXPECT_NEAR(g(0, 1).real(), 3.0 / 16, 1e-14);
    EXPECT_NEAR(g(1, 0).real(), 3.0 / 16, 1e-14);
}

TEST(Gram, HatGramIndependentOfGrid) {
    // Breakpoint-aligned Gauss cells integrate piecewise polynomials exactly on any grid.
    const auto sys = FunctionSystem::hat_family({0.3, 0.17});
    const CMat a = gram(sys, DomainSpec::interval(3));
    const CMat b = gram(sys, DomainSpec::interval(101));
    EXPECT_TRUE(a.isApprox(b, 1e-13));
}

TEST(Gram, DiscreteIdentityAtoms) {
    const CMat g = gram(FunctionSystem::discrete(CMat::Identity(3, 3)), DomainSpec::finite_set(3));
    EXPECT_TRUE(g.isApprox(CMat::Identity(3, 3) / 3.0, 1e-15));
}

TEST(Gram, DegenerateRaises) {
    CMat t(3, 2);
    t << 1, 2, 1, 2, 1, 2;
    try {
        gram(FunctionSystem::discrete(t), DomainSpec::finite_set(3));
        FAIL();
    } catch (const DegenerateError& e) {
        EXPECT_NEAR(e.smallest_eigenvalue, 0.0, 1e-12);
    }
    // frequency 0 twice: trig({0}) plus a constant
    EXPECT_THROW(gram(FunctionSystem::trig({{0}, {1}}).augmented_with_constant(), DomainSpec::torus(1, 8)),
                 DegenerateError);
}

TEST(Orthonormalize, Cases) {
    const auto dom = DomainSpec::torus(1, 32);
    EXPECT_TRUE(orthonormalize(FunctionSystem::trig_degree(2), dom).T.isApprox(CMat::Identity(5, 5), 1e-14));
    const auto sys2 = FunctionSystem::trig_degree(2).scaled({2, 2, 2, 2, 2});
    EXPECT_TRUE(orthonormalize(sys2, dom).T.isApprox(0.5 * CMat::Identity(5, 5), 1e-14));

    const auto idom = DomainSpec::interval(16);
    const auto hats = FunctionSystem::hat_family({0.25, 0.125});
    const auto ob = orthonormalize(hats, idom);
    RMat g(2, 2);
    g << 1.0 / 3, 3.0 / 16, 3.0 / 16, 1.0 / 6;
    const RMat l = Eigen::LLT<RMat>(g).matrixL();
    const RMat linv = l.inverse();
    EXPECT_TRUE(ob.T.real().isApprox(linv, 1e-12));
    EXPECT_TRUE(gram(ob.as_subspace(), idom).isApprox(CMat::Identity(2, 2), 1e-9));
}

TEST(LpNorm, Examples) {
    const auto dom = DomainSpec::torus(1, 64);
    const Subspace e3 = FunctionSystem::trig({{3}});
    for (double p : {1.0, 1.5, 2.0, 4.0, inf}) EXPECT_NEAR(lp_norm(e3, CVec::Ones(1), dom, p), 1.0, 1e-12) << p;
    const auto idom = DomainSpec::interval(64);
    const Subspace f = make_fa(0.25);
    EXPECT_NEAR(lp_norm(f, CVec::Ones(1), idom, 2.0), std::sqrt(1.0 / 3), 1e-13);
    EXPECT_NEAR(lp_norm(f, CVec::Ones(1), idom, inf), 1.0, 1e-15);
    for (double a : {0.1, 0.25, 0.37, 0.5})
        for (double p : {1.0, 1.5, 2.0, 3.0, 7.0}) {
            const double v = lp_norm(Subspace(make_fa(a)), CVec::Ones(1), idom, p);
            // |f_a|^p is a polynomial of degree p on each piece; Gauss-5 is exact to degree 9.
            const double tol = p == std::floor(p) ? 1e-13 : 1e-8;
            EXPECT_NEAR(std::pow(v, p), a * (p + 2) / (p + 1), tol) << a << " " << p;
        }
}

TEST(LpNorm, ParsevalAndMonotone) {
    const auto dom = DomainSpec::torus(2, 24);
    const auto sys = FunctionSystem::trig({{0, 0}, {1, 0}, {0, 2}, {-1, 3}, {2, -2}});
    Rng rng = make_rng(3, 0);
    for (int t = 0; t < 10; ++t) {
        CVec c(5);
        for (int i = 0; i < 5; ++i) c(i) = Scalar(normal(rng), normal(rng));
        EXPECT_NEAR(std::pow(lp_norm(sys, c, dom, 2.0), 2), c.squaredNorm(), 1e-12 * c.squaredNorm());
        double prev = 0.0;
        for (double p : {1.0, 1.5, 2.0, 3.0, 6.0, inf}) {
            const double v = lp_norm(sys, c, dom, p);
            EXPECT_GE(v, prev - 1e-8);
            prev = v;
            EXPECT_NEAR(lp_norm(sys, CVec(2.5 * c), dom, p), 2.5 * v, 1e-12 * v);
        }
    }
}

TEST(LpNorm, TorusSupRefinement) {
    // cos(x - 0.1): grid of 16 misses the maximum at 0.1, refinement recovers it.
    CVec c(2);
    c << 0.5 * std::polar(1.0, 0.1), 0.5 * std::polar(1.0, -0.1);
    const Subspace s = FunctionSystem::trig({{-1}, {1}});
    const auto dom = DomainSpec::torus(1, 16);
    EXPECT_NEAR(lp_norm(s, c, dom, inf), 1.0, 1e-10);
    EXPECT_LT(lp_norm(s, c, dom, inf, NormOptions{false}), 1.0 - 1e-3);
}

TEST(Christoffel, Values) {
    const auto dom = DomainSpec::torus(1, 32);
    const auto ob = orthonormalize(FunctionSystem::trig_degree(3), dom);
    EXPECT_NEAR(christoffel(ob, {0.77}), 7.0, 1e-12);
    const auto sob = orthonormalize(sqrt2_sin(), dom);
    EXPECT_NEAR(christoffel(sob, {0.0}), 0.0, 1e-15);
    EXPECT_NEAR(christoffel(sob, {pi / 2}), 2.0, 1e-12);
}

TEST(Christoffel, UnitaryInvariance) {
    const auto dom = DomainSpec::interval(32);
    const Subspace hats = FunctionSystem::hat_family({0.5, 0.25, 0.1});
    const auto ob = orthonormalize(hats, dom);
    // rotate the orthonormal basis by a real orthogonal matrix
    Eigen::HouseholderQR<RMat> qr(RMat::Random(3, 3));
    const RMat q = qr.householderQ();
    OrthoBasis rotated{q.cast<Scalar>() * ob.T, ob.source};
    for (double x : {0.0, 0.05, 0.3, 0.9})
        EXPECT_NEAR(christoffel(ob, {x}), christoffel(rotated, {x}), 1e-10);
}

TEST(Christoffel, DualityAgainstSweep) {
    // christoffel(w)^{1/2} = sup |f(w)| over ||f||_2 = 1.
    const auto dom = DomainSpec::interval(32);
    const Subspace hats = FunctionSystem::hat_family({0.5, 0.2});
    const auto ob = orthonormalize(hats, dom);
    Rng rng = make_rng(1, 1);
    for (int t = 0; t < 5; ++t) {
        const double x = uniform01(rng);
        LinearNorm point{hats.eval_rows({{x}}), RVec::Ones(1), 2.0};
        const LinearNorm l2 = domain_norm(hats, dom, 2.0);
        const RatioResult sw = sphere_sweep(point, l2, 2, Field::real, 2000);
        EXPECT_NEAR(std::sqrt(christoffel(ob, {x})), sw.value, 1e-3 * sw.value);
    }
}

TEST(BestApprox, Examples) {
    const auto dom = DomainSpec::torus(1, 32);
    const Subspace x = FunctionSystem::trig({{0}, {1}});
    const auto r = best_approx([](const Point& t) { return std::polar(1.0, 2 * t[0]); }, x, dom, 2.0);
    EXPECT_NEAR(r.coef.norm(), 0.0, 1e-14);
    EXPECT_NEAR(r.distance, 1.0, 1e-14);

    const auto idom = DomainSpec::interval(64);
    const auto r2 = best_approx([](const Point& t) { return Scalar(fa(0.25, t[0])); },
                                Subspace(FunctionSystem::hat_family({0.5}).augmented_with_constant(),
                                         CMat(CVec::Unit(2, 1))),
                                idom, inf);
    EXPECT_NEAR(r2.coef(0).real(), 0.5, 1e-10);
    EXPECT_NEAR(r2.distance, 0.5, 1e-10);
}

TEST(BestApprox, IdempotentAndOrthogonal) {
    const auto dom = DomainSpec::torus(1, 64);
    const Subspace x = FunctionSystem::trig_degree(2);
    CVec c(5);
    c << 1.0, Scalar(0, 2), -0.5, 0.25, Scalar(1, 1);
    for (double p : {1.0, 2.0, 3.0, inf}) {
        const auto r = best_approx(span_function(x, c), x, dom, p);
        EXPECT_NEAR(r.distance, 0.0, 1e-7) << p;
        EXPECT_NEAR((r.coef - c).norm(), 0.0, 1e-6) << p;
    }
    const Function f = [](const Point& t) { return Scalar(std::abs(std::sin(t[0])), 0.0); };
    const auto r = best_approx(f, x, dom, 2.0);
    const NodeSet q = quadrature(dom, &x.system());
    const CMat b = x.eval_rows(q.nodes);
    CVec res(q.nodes.size());
    for (std::size_t k = 0; k < q.nodes.size(); ++k) res(k) = f(q.nodes[k]);
    res = b * r.coef - res;
    const CVec ip = b.adjoint() * (q.weights.asDiagonal() * res);
    EXPECT_LE(ip.cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_NEAR(r.distance, lp_norm([&](const Point& t) { return f(t) - x.eval(r.coef, t); }, dom, 2.0), 1e-12);
}

TEST(BestApprox, HomogeneousAndPGeneral) {
    const auto dom = DomainSpec::interval(64);
    const Subspace x = FunctionSystem::hat_family({0.5, 0.25});
    const Function f = [](const Point& t) { return Scalar(t[0] * t[0]); };
    for (double p : {1.0, 1.5, 3.0, inf}) {
        const auto a = best_approx(f, x, dom, p);
        const auto b = best_approx([&](const Point& t) { return -3.0 * f(t); }, x, dom, p);
        EXPECT_NEAR(b.distance, 3.0 * a.distance, 1e-7 * std::max(1.0, a.distance)) << p;
        EXPECT_NEAR(a.distance, lp_norm([&](const Point& t) { return f(t) - x.eval(a.coef, t); }, dom, p, &x.system()),
                    1e-12);
    }
}

TEST(Nikolskii, Examples) {
    const auto dom = DomainSpec::torus(1, 64);
    const Subspace t3 = FunctionSystem::trig_degree(3);
    EXPECT_NEAR(nikolskii_constant(t3, dom, 2.0, inf).value, std::sqrt(7.0), 1e-12);
    EXPECT_DOUBLE_EQ(nikolskii_constant(t3, dom, 3.0, 3.0).value, 1.0);
    const auto idom = DomainSpec::interval(64);
    EXPECT_NEAR(nikolskii_constant(make_fa(0.25), idom, 2.0, inf).value, std::sqrt(3.0), 1e-12);
    EXPECT_THROW(nikolskii_constant(t3, dom, 4.0, 2.0), Error);
}

TEST(Nikolskii, OptimizedAgreesWithClosedForm) {
    // (2, inf) through the generic optimizer reproduces the christoffel value.
    const auto idom = DomainSpec::interval(64);
    const Subspace hats = FunctionSystem::hat_family({0.5, 0.25, 0.125});
    const double exact = nikolskii_constant(hats, idom, 2.0, inf).value;
    const RatioResult r = maximize_ratio(domain_norm(hats, idom, inf), domain_norm(hats, idom, 2.0), 3, Field::real);
    EXPECT_NEAR(r.value, exact, 1e-6 * exact);
    const auto m = nikolskii_constant(hats, idom, 1.0, 4.0);
    EXPECT_GE(m.value, 1.0);
    EXPECT_EQ(m.method, "optimized");
}
