#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sdisc/discretize.hpp"

namespace sdisc {

// ---------------------------------------------------------------------------
// Sampling from mu
// ---------------------------------------------------------------------------

/// One draw from the domain's measure: uniform on [0, 2pi)^d or [0, 1], uniform atom of a
/// finite set, or an atom of an atomic measure with probability equal to its mass.
inline Point draw_point(const DomainSpec& dom, Rng& rng) {
    if (dom.atomic) {
        double u = uniform01(rng), acc = 0.0;
        for (std::size_t k = 0; k < dom.atoms.size(); ++k) {
            acc += dom.masses[k];
            if (u < acc) return dom.atoms[k];
        }
        for (std::size_t k = dom.atoms.size(); k-- > 0;)
            if (dom.masses[k] > 0.0) return dom.atoms[k];
    }
    switch (dom.kind) {
    case DomainKind::torus: {
        Point x(dom.dim);
        for (double& v : x) v = two_pi * uniform01(rng);
        return x;
    }
    case DomainKind::interval: return {uniform01(rng)};
    case DomainKind::finite_set: return {static_cast<double>(uniform_index(rng, dom.finite_size))};
    }
    return {};
}

inline std::vector<Point> draw_points(const DomainSpec& dom, std::size_t m, Rng& rng) {
    std::vector<Point> out;
    out.reserve(m);
    for (std::size_t j = 0; j < m; ++j) out.push_back(draw_point(dom, rng));
    return out;
}

// ---------------------------------------------------------------------------
// Verified i.i.d. sampling
// ---------------------------------------------------------------------------

struct IidResult {
    PointSet points;
    DiscReport report;
    bool certified = false;
    int rounds = 0;
    std::vector<std::size_t> sizes;  ///< m tried in each round
    double lower = 0.0, upper = 0.0; ///< D_L^{-p} and D_R^p of the returned set
    std::uint64_t seed = 0;
};

/// Draws i.i.d. points from mu, doubling m each round (starting from dim X), until
/// (1 - eps)||f||_p^p <= m^{-1} sum |f(xi^j)|^p <= (1 + eps)||f||_p^p is certified on X.
/// When max_rounds runs out the best round (largest min(lower - (1-eps), (1+eps) - upper))
/// is returned with certified = false.
inline IidResult iid_points_verified(const Subspace& s, const DomainSpec& dom, double p, double eps,
                                     std::uint64_t seed, int max_rounds = 12) {
    check_exponent(p, "p");
    require(!is_inf_exponent(p), ErrorKind::invalid_parameters, "iid sampling needs p < inf");
    require(eps >= 0.0 && eps < 1.0, ErrorKind::invalid_parameters, "eps must lie in [0, 1)");
    require(max_rounds >= 1, ErrorKind::invalid_parameters, "max_rounds >= 1");
    Rng rng = make_rng(seed, 0);
    std::vector<Point> pts;
    std::size_t m = static_cast<std::size_t>(std::max<Eigen::Index>(1, s.dim()));
    IidResult best;
    best.seed = seed;
    double best_score = -std::numeric_limits<double>::infinity();
    for (int r = 0; r < max_rounds; ++r) {
        while (pts.size() < m) pts.push_back(draw_point(dom, rng));
        PointSet ps(pts);
        DiscOptions o;
        o.seed = task_seed(seed, static_cast<std::uint64_t>(r + 1));
        DiscReport rep = disc_constants(s, dom, ps, p, p, o);
        const double upper = std::pow(rep.D_R.value(), p);
        const double lower = rep.D_L.is_finite() ? std::pow(rep.D_L.value(), -p) : 0.0;
        best.sizes.push_back(m);
        const double score = std::min(lower - (1.0 - eps), (1.0 + eps) - upper);
        const bool ok = lower >= (1.0 - eps) * (1 - 1e-12) && upper <= (1.0 + eps) * (1 + 1e-12);
        if (ok || score > best_score) {
            best_score = score;
            best.points = ps;
            best.report = rep;
            best.lower = lower;
            best.upper = upper;
        }
        best.rounds = r + 1;
        if (ok) {
            best.certified = true;
            return best;
        }
        m *= 2;
    }
    return best;
}

// ---------------------------------------------------------------------------
// Weight equalization
// ---------------------------------------------------------------------------

struct EqualizeResult {
    PointSet points;               ///< equal weights (no weight vector)
    std::vector<std::size_t> counts;
    std::size_t m = 0, m0 = 0;
    double C = 1.0, q = 2.0;
    double factor = 1.0;           ///< ((C^2 + 1)/C)^{1/q}
};

/// Replicates xi^j exactly floor(lambda_j C m) + 1 times, so m0 <= (C^2 + 1) m and a
/// WLDI(p, q) constant D becomes an unweighted LDI constant D ((C^2 + 1)/C)^{1/q}.
inline EqualizeResult equalize_weights(const PointSet& pts, double C, double q) {
    pts.validate();
    require(pts.weights.has_value(), ErrorKind::invalid_parameters, "equalize_weights needs weights");
    check_exponent(q, "q");
    require(!is_inf_exponent(q), ErrorKind::invalid_parameters, "equalize_weights needs q < inf");
    require(C > 0.0 && pts.weight_sum() <= C * (1 + 1e-12), ErrorKind::invalid_parameters,
            "weights must satisfy sum lambda_j <= C");
    EqualizeResult out;
    out.m = pts.m();
    out.C = C;
    out.q = q;
    const double md = static_cast<double>(out.m);
    std::vector<Point> rep;
    for (std::size_t j = 0; j < out.m; ++j) {
        const std::size_t k = static_cast<std::size_t>(std::floor((*pts.weights)[j] * C * md)) + 1;
        out.counts.push_back(k);
        for (std::size_t r = 0; r < k; ++r) rep.push_back(pts.points[j]);
    }
    out.m0 = rep.size();
    out.points = PointSet(std::move(rep));
    out.factor = std::pow((C * C + 1.0) / C, 1.0 / q);
    return out;
}

struct EqualizeAudit {
    EqualizeResult result;
    Constant D_weighted, D_equal;  ///< WLDI of the input, LDI of the output
    double bound = 0.0;            ///< D_weighted * factor
    bool size_ok = false;
    AuditStatus status = AuditStatus::not_applicable;
};

/// Measures both constants; the weighted one is probed at the unweighted witness so the chain
/// D_equal <= factor D_weighted is checked against a consistent pair.
inline EqualizeAudit equalize_audit(const Subspace& s, const DomainSpec& dom, const PointSet& pts, double p, double q,
                                    double C, std::uint64_t seed = 0) {
    EqualizeAudit out;
    out.result = equalize_weights(pts, C, q);
    const double cap = (C * C + 1.0) * static_cast<double>(out.result.m);
    out.size_ok = static_cast<double>(out.result.m0) <= cap;
    DiscOptions oe;
    oe.seed = seed;
    const DiscReport re = disc_constants(s, dom, out.result.points, p, q, oe);
    out.D_equal = re.D_L;
    DiscOptions ow;
    ow.seed = seed;
    ow.weighted = true;
    if (re.D_L.is_finite()) ow.probes_L.push_back(re.witness_L);
    const DiscReport rw = disc_constants(s, dom, pts, p, q, ow);
    out.D_weighted = rw.D_L;
    if (rw.D_L.is_infinite()) {
        out.bound = std::numeric_limits<double>::infinity();
        out.status = out.size_ok ? AuditStatus::not_applicable : AuditStatus::violated;
        return out;
    }
    out.bound = rw.D_L.value() * out.result.factor;
    const bool chain_ok = re.D_L.is_finite() && re.D_L.value() <= out.bound + 1e-9;
    out.status = status_of(out.size_ok && chain_ok);
    return out;
}

// ---------------------------------------------------------------------------
// Weight budget through X + span{1}
// ---------------------------------------------------------------------------

/// Output of a weighted discretizer: points with weights and the claimed constants of
/// D1^{-1}||f||_{p1} <= (sum lambda_j |f(xi^j)|^q)^{1/q} <= D2 ||f||_{p2}.
struct WeightedDiscretization {
    PointSet points;
    double D1 = 1.0, D2 = 1.0;
    double p1 = 2.0, p2 = 2.0, q = 2.0;
};

using WeightedDiscretizer = std::function<WeightedDiscretization(const Subspace&)>;

/// X itself when the constants already lie in X, otherwise X + span{1}; `one` receives the
/// coefficients of f = 1.
inline Subspace with_constants(const Subspace& s, const DomainSpec& dom, CVec& one) {
    const BestApprox ba = best_approx([](const Point&) { return Scalar(1.0); }, s, dom, 2.0);
    if (ba.distance <= 1e-10) {
        one = ba.coef;
        return s;
    }
    const FunctionSystem aug = s.system().augmented_with_constant();
    const Eigen::Index r = s.mix().rows(), c = s.mix().cols();
    CMat mix = CMat::Zero(r + 1, c + 1);
    mix.topLeftCorner(r, c) = s.mix();
    mix(r, c) = 1.0;
    one = CVec::Unit(c + 1, c);
    return Subspace(aug, mix);
}

struct BudgetResult {
    PointSet points;
    double weight_sum = 0.0;
    double budget = 0.0;         ///< D2^q
    double D1_measured = 0.0, D2_measured = 0.0;
    Eigen::Index augmented_dim = 0;
    bool constant_in_X = false;
};

/// Runs the discretizer on X' = X + span{1}, checks its claimed two-sided weighted inequality
/// on X' (premise), and returns its weights with sum lambda_j <= D2^q, which is the right
/// inequality at f = 1.
inline BudgetResult weight_budget_trick(const Subspace& s, const DomainSpec& dom, const WeightedDiscretizer& disc,
                                        std::uint64_t seed = 0) {
    CVec one;
    const Subspace xp = with_constants(s, dom, one);
    WeightedDiscretization wd = disc(xp);
    require(wd.points.weights.has_value(), ErrorKind::premise_failed, "discretizer returned no weights");
    wd.points.validate();
    BudgetResult out;
    out.constant_in_X = xp.dim() == s.dim();
    out.augmented_dim = xp.dim();
    DiscOptions o;
    o.seed = seed;
    o.weighted = true;
    o.probes_R.push_back(one);
    const DiscReport r2 = disc_constants(xp, dom, wd.points, wd.p2, wd.q, o);
    out.D2_measured = r2.D_R.value();
    const DiscReport r1 = (wd.p1 == wd.p2) ? r2 : disc_constants(xp, dom, wd.points, wd.p1, wd.q, o);
    out.D1_measured = r1.D_L.as_double();
    require(within(out.D2_measured, wd.D2), ErrorKind::premise_failed,
            "augmented-space right inequality fails: measured D2 = " + std::to_string(out.D2_measured) +
                " > claimed " + std::to_string(wd.D2));
    require(r1.D_L.is_finite() && within(out.D1_measured, wd.D1), ErrorKind::premise_failed,
            "augmented-space left inequality fails: measured D1 = " + std::to_string(out.D1_measured) +
                " > claimed " + std::to_string(wd.D1));
    out.points = wd.points;
    out.weight_sum = wd.points.weight_sum();
    out.budget = std::pow(wd.D2, wd.q);
    require(out.weight_sum <= out.budget + 1e-12, ErrorKind::premise_failed, "sum of weights exceeds D2^q");
    return out;
}

// ---------------------------------------------------------------------------
// Kiefer-Wolfowitz design
// ---------------------------------------------------------------------------

struct DesignMeasure {
    std::vector<Point> points;
    std::vector<double> masses;
    int iterations = 0;
    bool converged = false;
    double max_christoffel = 0.0;      ///< with respect to the returned masses
    std::vector<double> history;       ///< max christoffel before each update
    std::vector<double> logdet;        ///< log det G(mu) before each update
    bool monotone = true;              ///< history non-increasing (up to 1e-12 relative)
    bool logdet_monotone = true;       ///< logdet non-decreasing (up to 1e-12 absolute)
    double eps = 1e-3;

    /// The masses as an atomic measure on `dom`.
    DomainSpec as_domain(const DomainSpec& dom) const { return dom.with_atomic_measure(points, masses); }
};

/// Multiplicative algorithm mu_k <- mu_k d_k / N, d_k = b_k G(mu)^{-1} b_k^* the christoffel
/// value of candidate k, started from the uniform measure on the grid. Stops once
/// max_k d_k <= N (1 + eps); converged = false when max_iters runs out. log det G(mu) never
/// decreases under this update; the max christoffel value usually does but can tick up, and
/// `monotone` records whether it did.
inline DesignMeasure kw_design(const Subspace& s, const std::vector<Point>& candidates, double eps = 1e-3,
                               int max_iters = 50000) {
    require(!candidates.empty(), ErrorKind::invalid_parameters, "empty candidate grid");
    require(eps > 0.0, ErrorKind::invalid_parameters, "eps must be positive");
    const Eigen::Index n = s.dim();
    const Eigen::Index k = static_cast<Eigen::Index>(candidates.size());
    // Work in a basis orthonormal for the uniform grid measure; christoffel values do not
    // depend on the basis.
    CMat b = s.eval_rows(candidates);
    {
        const CMat g0 = b.adjoint() * b / static_cast<double>(k);
        linalg::check_nondegenerate(g0);
        const CMat r = linalg::cholesky_upper(g0);
        b = r.triangularView<Eigen::Upper>().solve<Eigen::OnTheRight>(b);
    }
    RVec mu = RVec::Constant(k, 1.0 / static_cast<double>(k));
    DesignMeasure out;
    out.eps = eps;
    const double target = static_cast<double>(n) * (1.0 + eps);
    RVec d(k);
    double ld = 0.0;
    auto christoffel_all = [&]() {
        const CMat g = b.adjoint() * mu.asDiagonal() * b;
        Eigen::LLT<CMat> llt(g);
        require(llt.info() == Eigen::Success, ErrorKind::degenerate_system, "design Gram lost definiteness");
        const CMat y = llt.matrixL().solve(b.adjoint());  // n x k
        d = y.colwise().squaredNorm().transpose();
        ld = 2.0 * llt.matrixL().toDenseMatrix().diagonal().real().array().log().sum();
    };
    christoffel_all();
    for (int it = 0;; ++it) {
        const double mx = d.maxCoeff();
        if (!out.history.empty() && mx > out.history.back() * (1 + 1e-12)) out.monotone = false;
        if (!out.logdet.empty() && ld < out.logdet.back() - 1e-12) out.logdet_monotone = false;
        out.history.push_back(mx);
        out.logdet.push_back(ld);
        out.max_christoffel = mx;
        out.iterations = it;
        if (mx <= target) {
            out.converged = true;
            break;
        }
        if (it >= max_iters) break;
        mu = mu.cwiseProduct(d) / static_cast<double>(n);
        mu /= mu.sum();
        christoffel_all();
    }
    out.points = candidates;
    out.masses.assign(mu.data(), mu.data() + k);
    return out;
}

// ---------------------------------------------------------------------------
// Randomized LDI point search
// ---------------------------------------------------------------------------

struct LdiSearchResult {
    PointSet points;
    Constant D_L;
    DiscReport report;
    int restarts = 0;
    int evaluations = 0;
    int best_restart = -1;
    std::uint64_t seed = 0;
};

struct LdiSearchOptions {
    bool refine = true;
    int max_refine_sweeps = 200;
    double min_step = 1e-9;
    RatioOptions ratio{.restarts = 6};
};

namespace detail {

// D_L of X on pts. The Gram factor is computed once; each call takes one SVD of the sampled
// orthonormal basis B = A R^{-1}, which gives injectivity (same floor as is_injective) and,
// for p = q = 2, D_L = m^{1/2} / sigma_min(B). Other exponents run a short ascent from there.
struct LdiEvaluator {
    const Subspace& s;
    const DomainSpec& dom;
    double p, q;
    LinearNorm lp;
    CMat rinv;
    RatioOptions ro;
    int count = 0;

    LdiEvaluator(const Subspace& s_, const DomainSpec& d_, double p_, double q_, RatioOptions r)
        : s(s_), dom(d_), p(p_), q(q_), lp(domain_norm(s_, d_, p_)), ro(std::move(r)) {
        const CMat u = linalg::cholesky_upper(gram(s_, d_));
        rinv = u.triangularView<Eigen::Upper>().solve(CMat::Identity(u.rows(), u.cols()));
    }

    double operator()(const std::vector<Point>& pts) {
        ++count;
        const double inf = std::numeric_limits<double>::infinity();
        if (pts.size() < static_cast<std::size_t>(s.dim())) return inf;
        Eigen::JacobiSVD<CMat> svd(s.eval_rows(pts) * rinv, Eigen::ComputeFullV);
        const RVec& sv = svd.singularValues();
        const double lo = sv(sv.size() - 1) * sv(sv.size() - 1);
        if (lo < linalg::degenerate_threshold * std::max(sv(0) * sv(0), 1.0)) return inf;
        if (p == 2.0 && q == 2.0) return std::sqrt(static_cast<double>(pts.size()) / lo);
        const PointSet ps(pts);
        const LinearNorm samp = sampling_norm(s, ps, q, false);
        RatioOptions r = ro;
        r.starts.push_back(rinv * svd.matrixV().col(sv.size() - 1));
        return maximize_ratio(lp, samp, s.dim(), s.field(), r).value;
    }
};

// One coordinate move inside the domain; false when the move leaves it.
inline bool move_point(const DomainSpec& dom, Point& x, std::size_t coord, double delta) {
    switch (dom.kind) {
    case DomainKind::torus: x[coord] = std::fmod(x[coord] + delta + two_pi, two_pi); return true;
    case DomainKind::interval: {
        const double v = x[coord] + delta;
        if (v < 0.0 || v > 1.0) return false;
        x[coord] = v;
        return true;
    }
    case DomainKind::finite_set: {
        const double v = x[coord] + std::round(delta);
        if (v < 0.0 || v >= static_cast<double>(dom.finite_size) || std::round(delta) == 0.0) return false;
        x[coord] = v;
        return true;
    }
    }
    return false;
}

}  // namespace detail

/// Best of `restarts` i.i.d. draws of m points from mu, each followed (optionally) by a
/// compass search: every coordinate of every point is moved by +-h, h halving when no move
/// improves D_L. Atomic measures keep points on their atoms (exchange moves only).
inline LdiSearchResult search_ldi_points(const Subspace& s, const DomainSpec& dom, std::size_t m, double p, double q,
                                         int restarts, std::uint64_t seed, const LdiSearchOptions& opt = {}) {
    require(m >= 1, ErrorKind::invalid_parameters, "search_ldi_points needs m >= 1");
    require(restarts >= 1, ErrorKind::invalid_parameters, "restarts >= 1");
    check_exponent(p, "p");
    check_exponent(q, "q");
    LdiSearchResult out;
    out.seed = seed;
    out.restarts = restarts;
    RatioOptions ro = opt.ratio;
    ro.seed = seed;
    detail::LdiEvaluator eval(s, dom, p, q, ro);
    double best = std::numeric_limits<double>::infinity();
    std::vector<Point> best_pts;
    const bool kernel_forced = m < static_cast<std::size_t>(s.dim());
    for (int r = 0; r < restarts; ++r) {
        Rng rng = make_rng(seed, static_cast<std::uint64_t>(r));
        std::vector<Point> pts = draw_points(dom, m, rng);
        double val = kernel_forced ? std::numeric_limits<double>::infinity() : eval(pts);
        if (opt.refine && !kernel_forced) {
            if (dom.atomic) {
                for (int sweep = 0; sweep < opt.max_refine_sweeps; ++sweep) {
                    bool improved = false;
                    for (std::size_t j = 0; j < m; ++j)
                        for (const Point& a : dom.atoms) {
                            std::vector<Point> trial = pts;
                            trial[j] = a;
                            const double v = eval(trial);
                            if (v < val * (1 - 1e-14)) {
                                val = v;
                                pts = std::move(trial);
                                improved = true;
                            }
                        }
                    if (!improved) break;
                }
            } else {
                const double extent = dom.kind == DomainKind::torus ? two_pi
                                      : dom.kind == DomainKind::interval
                                          ? 1.0
                                          : static_cast<double>(dom.finite_size);
                const double floor_step = dom.kind == DomainKind::finite_set ? 1.0 : opt.min_step;
                double h = std::max(floor_step, extent / (4.0 * static_cast<double>(m)));
                if (dom.kind == DomainKind::finite_set) h = std::round(h);
                for (int sweep = 0; sweep < opt.max_refine_sweeps && h >= floor_step; ++sweep) {
                    bool improved = false;
                    for (std::size_t j = 0; j < m; ++j)
                        for (std::size_t c = 0; c < pts[j].size(); ++c)
                            for (double sg : {1.0, -1.0}) {
                                std::vector<Point> trial = pts;
                                if (!detail::move_point(dom, trial[j], c, sg * h)) continue;
                                const double v = eval(trial);
                                if (v < val * (1 - 1e-14)) {
                                    val = v;
                                    pts = std::move(trial);
                                    improved = true;
                                }
                            }
                    if (!improved) {
                        h = dom.kind == DomainKind::finite_set ? std::floor(h / 2) : h / 2;
                    }
                }
            }
        }
        if (best_pts.empty() || val < best) {
            best = val;
            best_pts = pts;
            out.best_restart = r;
        }
    }
    out.evaluations = eval.count;
    out.points = PointSet(best_pts);
    DiscOptions o;
    o.seed = seed;
    out.report = disc_constants(s, dom, out.points, p, q, o);
    out.D_L = out.report.D_L;
    return out;
}

// ---------------------------------------------------------------------------
// Universal LDI over v-term collections
// ---------------------------------------------------------------------------

/// X_v(D_N): all spans of v elements of the dictionary (columns of `dictionary`).
struct CollectionSpec {
    Subspace dictionary;
    std::size_t v = 1;

    std::size_t N() const { return static_cast<std::size_t>(dictionary.dim()); }

    /// C(N, v), saturating at SIZE_MAX.
    std::size_t size() const {
        const std::size_t n = N();
        if (v > n) return 0;
        long double c = 1.0L;
        for (std::size_t i = 1; i <= v; ++i) c = c * static_cast<long double>(n - v + i) / static_cast<long double>(i);
        if (c > static_cast<long double>(std::numeric_limits<std::size_t>::max() / 2))
            return std::numeric_limits<std::size_t>::max();
        return static_cast<std::size_t>(std::llround(c));
    }

    /// Visits the v-subsets in lexicographic order; stops early when `visit` returns false.
    template <class Visit>
    void for_each(Visit&& visit) const {
        const std::size_t n = N();
        if (v == 0 || v > n) return;
        std::vector<std::size_t> idx(v);
        for (std::size_t i = 0; i < v; ++i) idx[i] = i;
        while (true) {
            if (!visit(static_cast<const std::vector<std::size_t>&>(idx))) return;
            std::size_t i = v;
            while (i > 0 && idx[i - 1] == n - v + i - 1) --i;
            if (i == 0) return;
            ++idx[i - 1];
            for (std::size_t k = i; k < v; ++k) idx[k] = idx[k - 1] + 1;
        }
    }
};

inline constexpr std::size_t universal_guard = 1000000;

struct UniversalReport {
    Constant value;
    std::vector<std::size_t> worst_support;
    std::size_t subspaces = 0;
};

/// max over X in X_v(D_N) of D_L(X; pts, p, q), q in {p, inf}.
inline UniversalReport universal_ldi_constant(const CollectionSpec& col, const DomainSpec& dom, const PointSet& pts,
                                              double p, double q, std::uint64_t seed = 0) {
    check_exponent(p, "p");
    check_exponent(q, "q");
    require(q == p || is_inf_exponent(q), ErrorKind::invalid_parameters, "universal LDI needs q = p or q = inf");
    require(col.v >= 1 && col.v <= col.N(), ErrorKind::invalid_parameters, "need 1 <= v <= N");
    require(col.size() <= universal_guard, ErrorKind::guard_exceeded,
            "collection has more than 1e6 subspaces");
    UniversalReport out;
    out.value = Constant::finite(0.0);
    col.for_each([&](const std::vector<std::size_t>& idx) {
        DiscOptions o;
        o.seed = task_seed(seed, out.subspaces);
        const DiscReport r = disc_constants(col.dictionary.columns(idx), dom, pts, p, q, o);
        ++out.subspaces;
        if (r.D_L.is_infinite()) {
            out.value = Constant::infinite();
            out.worst_support = idx;
            return false;
        }
        if (out.worst_support.empty() || r.D_L.value() > out.value.value()) {
            out.value = r.D_L;
            out.worst_support = idx;
        }
        return true;
    });
    return out;
}

}  // namespace sdisc
