#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sdisc/design.hpp"

namespace sdisc {

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

/// One audited inequality left <= right. kind: "theorem" (the statement itself), "step" (a
/// link of its proof), "hypothesis" (a premise measured on the instance), "info".
struct AuditLine {
    std::string name;
    std::string kind = "theorem";
    double left = 0.0, right = 0.0, slack = 0.0;
    AuditStatus status = AuditStatus::holds;
};

inline constexpr double audit_tolerance = 1e-8;

inline AuditLine audit_line(std::string name, double left, double right, std::string kind = "theorem") {
    AuditLine a;
    a.name = std::move(name);
    a.kind = std::move(kind);
    a.left = left;
    a.right = right;
    a.slack = right - left;
    a.status = status_of(left <= right + audit_tolerance);
    return a;
}

struct RecoveryReport {
    std::string algorithm;
    std::string input_id;
    std::vector<std::size_t> support;  ///< chosen dictionary elements (all of X for fixed-subspace fits)
    CVec coef;                         ///< coefficients on `support`
    std::map<std::string, double> errors;
    std::map<std::string, double> constants;
    std::vector<AuditLine> audits;
    AuditStatus status = AuditStatus::not_applicable;
    std::string note;

    /// Smallest slack among lines of the given kind (+inf if none).
    double min_slack(const std::string& kind = "theorem") const {
        double s = std::numeric_limits<double>::infinity();
        for (const AuditLine& a : audits)
            if (a.kind == kind) s = std::min(s, a.slack);
        return s;
    }
    void close() {
        bool any = false, bad = false;
        for (const AuditLine& a : audits)
            if (a.kind == "theorem") {
                any = true;
                bad = bad || a.status == AuditStatus::violated;
            }
        status = !any ? AuditStatus::not_applicable : bad ? AuditStatus::violated : AuditStatus::holds;
    }
};

// ---------------------------------------------------------------------------
// ell_p fits
// ---------------------------------------------------------------------------

/// argmin over u in X of ||S(f - u, xi)||_{p,w}, w = 1/m unless given; p = inf is the discrete
/// min-max. Minimum-norm coefficients when the sampled design has a kernel.
inline CVec ell_fit(const CVec& samples, const Subspace& s, const PointSet& pts, double p,
                    const std::optional<RVec>& weights = std::nullopt) {
    check_exponent(p, "p");
    pts.validate();
    require(samples.size() == static_cast<Eigen::Index>(pts.m()), ErrorKind::invalid_parameters,
            "ell_fit: sample vector length != m");
    const RVec w = weights ? *weights : RVec::Constant(pts.m(), 1.0 / static_cast<double>(pts.m()));
    return fit::weighted_lp_fit(s.eval_rows(pts.points), samples, w, p, s.field()).coef;
}

inline CVec ell_fit(const Function& f, const Subspace& s, const PointSet& pts, double p,
                    const std::optional<RVec>& weights = std::nullopt) {
    return ell_fit(sample_vector(f, pts), s, pts, p, weights);
}

// ---------------------------------------------------------------------------
// Grid-relative evaluation shared by sigma_v, the recovery algorithms and the audits
// ---------------------------------------------------------------------------

namespace detail {

// Dictionary values on the quadrature nodes (L_p, p < inf), on the sup set (sup grid plus
// quadrature nodes plus extra points, for L_inf) and at the sample points.
struct Nodes {
    Subspace dict;
    NodeSet quad;
    std::vector<Point> sup;
    CMat bq, bs;

    Nodes(const Subspace& d, const DomainSpec& dom, const std::vector<Point>& extra)
        : dict(d), quad(quadrature(dom, &d.system())) {
        check_compatible(d.system(), dom);
        sup = sup_grid(dom, &d.system());
        if (!dom.atomic && dom.kind == DomainKind::interval)
            sup.insert(sup.end(), quad.nodes.begin(), quad.nodes.end());
        sup.insert(sup.end(), extra.begin(), extra.end());
        bq = d.eval_rows(quad.nodes);
        bs = d.eval_rows(sup);
    }

    static CMat cols(const CMat& b, const std::vector<std::size_t>& idx) {
        CMat out(b.rows(), idx.size());
        for (std::size_t k = 0; k < idx.size(); ++k) out.col(k) = b.col(static_cast<Eigen::Index>(idx[k]));
        return out;
    }

    double norm_q(const CVec& vals, double p) const { return fit::weighted_norm(vals, quad.weights, p); }
    double norm_s(const CVec& vals) const { return vals.size() ? vals.cwiseAbs().maxCoeff() : 0.0; }
    /// Continuous norm: quadrature for p < inf, max over the sup set for p = inf.
    double norm(const CVec& on_q, const CVec& on_s, double p) const {
        return is_inf_exponent(p) ? norm_s(on_s) : norm_q(on_q, p);
    }

    LinearNorm span_norm(const std::vector<std::size_t>& idx, double p) const {
        LinearNorm n;
        n.p = p;
        if (is_inf_exponent(p)) {
            n.matrix = cols(bs, idx);
            n.weights = RVec::Ones(n.matrix.rows());
        } else {
            n.matrix = cols(bq, idx);
            n.weights = quad.weights;
        }
        return n;
    }
};

// f on the node sets.
struct Target {
    CVec on_q, on_s;
};

inline Target tabulate(const Function& f, const Nodes& nd) {
    Target t;
    t.on_q.resize(nd.quad.nodes.size());
    for (std::size_t k = 0; k < nd.quad.nodes.size(); ++k) t.on_q(k) = f(nd.quad.nodes[k]);
    t.on_s.resize(nd.sup.size());
    for (std::size_t k = 0; k < nd.sup.size(); ++k) t.on_s(k) = f(nd.sup[k]);
    return t;
}

inline std::vector<std::size_t> iota(std::size_t n) {
    std::vector<std::size_t> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = i;
    return v;
}

// sup of num/den over span(idx) with probes; 0 if the span is trivial.
inline RatioResult span_sup(const LinearNorm& num, const LinearNorm& den, Eigen::Index n, Field field,
                            const std::vector<CVec>& probes, std::uint64_t seed) {
    RatioOptions ro;
    ro.seed = seed;
    ro.restarts = 16;
    ro.probes = probes;
    // Structured start: least-singular direction of the denominator matrix.
    Eigen::JacobiSVD<CMat> svd(den.matrix, Eigen::ComputeFullV);
    ro.starts.push_back(svd.matrixV().col(n - 1));
    return maximize_ratio(num, den, n, field, ro);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Best v-term approximation
// ---------------------------------------------------------------------------

using Dictionary = CollectionSpec;

/// Norm in which sigma_v is taken: continuous L_p(mu) (p = inf over the sup set), or the
/// discrete ||S(., xi)||_p with weights 1/m when `at` is set.
struct NormSpec {
    double p = 2.0;
    std::optional<PointSet> at;
    std::vector<Point> extra_sup;  ///< added to the sup set for continuous p = inf
};

struct SigmaResult {
    double value = 0.0;
    std::vector<std::size_t> support;
    CVec coef;
    std::size_t subsets = 0;
};

namespace detail {

inline double fit_residual(const CMat& b, const CVec& y, const RVec& w, double p, Field field, CVec& coef) {
    const fit::FitResult r = fit::weighted_lp_fit(b, y, w, p, field);
    coef = r.coef;
    return r.residual_norm;
}

// Strictly better, with a relative margin so that near-ties keep the earlier support.
inline bool better(double v, double best) { return v < best * (1 - 1e-12) - 1e-15; }

}  // namespace detail

/// sigma_v(f, D_N) in the given norm: exhaustive over v-subsets in lexicographic order;
/// ties keep the lexicographically smallest support. v = 0 gives ||f||.
inline SigmaResult sigma_v(const Function& f, const Subspace& dict, std::size_t v, const NormSpec& norm,
                           const DomainSpec& dom) {
    check_exponent(norm.p, "p");
    const CollectionSpec col{dict, v};
    require(v <= col.N(), ErrorKind::invalid_parameters, "need v <= N");
    require(col.size() <= universal_guard, ErrorKind::guard_exceeded, "collection has more than 1e6 subspaces");
    SigmaResult out;
    const Field field = dict.field();
    CMat b;
    CVec y;
    RVec w;
    if (norm.at) {
        norm.at->validate();
        b = dict.eval_rows(norm.at->points);
        y = sample_vector(f, *norm.at);
        w = RVec::Constant(norm.at->m(), 1.0 / static_cast<double>(norm.at->m()));
    } else {
        const detail::Nodes nd(dict, dom, norm.extra_sup);
        const detail::Target t = detail::tabulate(f, nd);
        if (is_inf_exponent(norm.p)) {
            b = nd.bs;
            y = t.on_s;
            w = RVec::Ones(nd.sup.size());
        } else {
            b = nd.bq;
            y = t.on_q;
            w = nd.quad.weights;
        }
    }
    if (v == 0) {
        out.value = fit::weighted_norm(y, w, norm.p);
        out.coef = CVec(0);
        return out;
    }
    out.value = std::numeric_limits<double>::infinity();
    col.for_each([&](const std::vector<std::size_t>& idx) {
        CVec c;
        const double r = detail::fit_residual(detail::Nodes::cols(b, idx), y, w, norm.p, field, c);
        ++out.subsets;
        if (out.support.empty() || detail::better(r, out.value)) {
            out.value = r;
            out.support = idx;
            out.coef = c;
        }
        return true;
    });
    return out;
}

// ---------------------------------------------------------------------------
// Universal recovery algorithms
// ---------------------------------------------------------------------------

enum class Variant { lp, lp_s, lp_inf };

inline const char* to_string(Variant v) {
    switch (v) {
    case Variant::lp: return "lp";
    case Variant::lp_s: return "lp_s";
    case Variant::lp_inf: return "l(p,inf)";
    }
    return "unknown";
}

/// What the algorithm may look at: the function itself (continuous-norm oracle) or only its
/// samples at the point set.
struct RecoveryInput {
    std::optional<Function> f;
    std::optional<CVec> samples;
    std::string id = "f";

    RecoveryInput(Function fn, std::string name = "f") : f(std::move(fn)), id(std::move(name)) {}  // NOLINT
    static RecoveryInput from_samples(CVec y, std::string name = "samples") {
        RecoveryInput r([](const Point&) { return Scalar(0.0); }, std::move(name));
        r.f.reset();
        r.samples = std::move(y);
        return r;
    }
};

/// Algorithms lp, lp^s and l(p, inf) over X_v(D_N): every v-span L is fitted from the samples
/// (lp fit with w = 1/m, or the l_inf fit for l(p, inf)); the selected L minimizes
/// ||f - fit||_p (lp, l(p, inf)) or ||S(f - fit, xi)||_p (lp^s). Ties keep the
/// lexicographically smallest support.
inline RecoveryReport recover_universal(const RecoveryInput& in, const Subspace& dict, std::size_t v,
                                        const PointSet& pts, double p, Variant variant, const DomainSpec& dom) {
    check_exponent(p, "p");
    require(!is_inf_exponent(p), ErrorKind::invalid_parameters, "universal recovery needs p < inf");
    pts.validate();
    const CollectionSpec col{dict, v};
    require(v >= 1 && v <= col.N(), ErrorKind::invalid_parameters, "need 1 <= v <= N");
    require(col.size() <= universal_guard, ErrorKind::guard_exceeded, "collection has more than 1e6 subspaces");
    if (variant != Variant::lp_s)
        require(in.f.has_value(), ErrorKind::not_applicable,
                std::string(to_string(variant)) + " needs the continuous-norm oracle, only samples were given");
    const CVec y = in.samples ? *in.samples : sample_vector(*in.f, pts);
    require(y.size() == static_cast<Eigen::Index>(pts.m()), ErrorKind::invalid_parameters, "samples length != m");
    const CMat bx = dict.eval_rows(pts.points);
    const RVec w = RVec::Constant(pts.m(), 1.0 / static_cast<double>(pts.m()));
    std::optional<detail::Nodes> nd;
    std::optional<detail::Target> t;
    if (in.f) {
        nd.emplace(dict, dom, pts.points);
        t = detail::tabulate(*in.f, *nd);
    }
    RecoveryReport rep;
    rep.algorithm = to_string(variant);
    rep.input_id = in.id;
    double best = std::numeric_limits<double>::infinity();
    const double fit_p = variant == Variant::lp_inf ? std::numeric_limits<double>::infinity() : p;
    col.for_each([&](const std::vector<std::size_t>& idx) {
        const CMat bl = detail::Nodes::cols(bx, idx);
        const CVec c = fit::weighted_lp_fit(bl, y, w, fit_p, dict.field()).coef;
        double crit;
        if (variant == Variant::lp_s)
            crit = fit::weighted_norm(bl * c - y, w, p);
        else
            crit = nd->norm_q(t->on_q - detail::Nodes::cols(nd->bq, idx) * c, p);
        if (rep.support.empty() || detail::better(crit, best)) {
            best = crit;
            rep.support = idx;
            rep.coef = c;
        }
        return true;
    });
    const CMat bl = detail::Nodes::cols(bx, rep.support);
    rep.errors["Lp_xi"] = fit::weighted_norm(y - bl * rep.coef, w, p);
    if (in.f) {
        rep.errors["Lp"] = nd->norm_q(t->on_q - detail::Nodes::cols(nd->bq, rep.support) * rep.coef, p);
        rep.errors["Linf"] = nd->norm_s(t->on_s - detail::Nodes::cols(nd->bs, rep.support) * rep.coef);
    }
    rep.status = AuditStatus::not_applicable;
    return rep;
}

/// The recovered element as a function.
inline Function recovered_function(const RecoveryReport& r, const Subspace& dict) {
    return span_function(dict.columns(r.support), r.coef);
}

// ---------------------------------------------------------------------------
// Lebesgue-type audits
// ---------------------------------------------------------------------------

enum class Theorem { BT1, BT1a, BT2, BT3, BT4, ubT3, ubT5, ubT6 };

inline const char* to_string(Theorem t) {
    switch (t) {
    case Theorem::BT1: return "BT1";
    case Theorem::BT1a: return "BT1a";
    case Theorem::BT2: return "BT2";
    case Theorem::BT3: return "BT3";
    case Theorem::BT4: return "BT4";
    case Theorem::ubT3: return "ubT3";
    case Theorem::ubT5: return "ubT5";
    case Theorem::ubT6: return "ubT6";
    }
    return "unknown";
}

/// An audit instance. `space` is X_N (BT*) or the dictionary D_N (ub*). BT1/BT1a use the point
/// weights w (1/m when absent). BT3/BT4 replace `points` by a search_ldi_points result of size
/// search_m when search_m > 0. ubT6 treats all targets as the class F; the others audit each
/// target and report the worst.
struct AuditInstance {
    Subspace space;
    DomainSpec domain;
    PointSet points;
    std::vector<Function> targets;
    double p = 2.0;
    std::size_t v = 1;
    std::size_t search_m = 0;
    int search_restarts = 4;
    std::uint64_t seed = 0;
    std::string id = "instance";
};

namespace detail {

inline RecoveryReport not_applicable(Theorem th, const std::string& why) {
    RecoveryReport r;
    r.algorithm = to_string(th);
    r.status = AuditStatus::not_applicable;
    r.note = why;
    return r;
}

// BT1 (p < inf and p = inf), BT1a, BT2 on a fixed subspace for one target.
inline RecoveryReport audit_fixed(Theorem th, const Subspace& x, const DomainSpec& dom, const PointSet& pts,
                                  const Function& f, double p, std::uint64_t seed) {
    const bool sup_version = th == Theorem::BT1 && is_inf_exponent(p);
    if (th == Theorem::BT1a || th == Theorem::BT2)
        require(!is_inf_exponent(p), ErrorKind::invalid_parameters, "BT1a/BT2 need p < inf");
    RecoveryReport rep;
    rep.algorithm = to_string(th);
    const std::size_t n = static_cast<std::size_t>(x.dim());
    const std::vector<std::size_t> all = iota(n);
    const Nodes nd(x, dom, pts.points);
    const Target t = tabulate(f, nd);
    const CMat bx = x.eval_rows(pts.points);
    const CVec y = sample_vector(f, pts);
    const bool weighted_alg = th == Theorem::BT1 || th == Theorem::BT1a;
    const RVec w = (weighted_alg && pts.weights) ? pts.weight_vector()
                                                 : RVec::Constant(pts.m(), 1.0 / static_cast<double>(pts.m()));
    const double W = w.sum();
    const double inf = std::numeric_limits<double>::infinity();
    // Algorithm: weighted l_p fit (BT1, BT1a) or l_inf fit (BT2, BT1 with p = inf).
    const double alg_p = (th == Theorem::BT2 || sup_version) ? inf : p;
    const CVec u = fit::weighted_lp_fit(bx, y, w, alg_p, x.field()).coef;
    // Best L_inf approximation g on the sup set.
    const fit::FitResult gf = fit::weighted_lp_fit(nd.bs, t.on_s, RVec::Ones(nd.sup.size()), inf, x.field());
    const CVec& g = gf.coef;
    const double d_inf = gf.residual_norm;
    const CVec gu = g - u;
    rep.coef = u;
    rep.support = all;
    const double err_p = nd.norm(t.on_q - nd.bq * u, t.on_s - nd.bs * u, p);
    const double err_inf = nd.norm_s(t.on_s - nd.bs * u);
    rep.errors["Lp"] = sup_version ? err_inf : err_p;
    rep.errors["Linf"] = err_inf;
    rep.errors["d_inf"] = d_inf;
    rep.constants["W"] = W;
    if (!is_injective(x, pts, dom)) {
        rep.note = "hypothesis fails: sampling operator not injective on X (D = inf)";
        rep.status = AuditStatus::not_applicable;
        return rep;
    }
    // Hypothesis constant D, probed at g - u.
    LinearNorm samp;
    samp.matrix = bx;
    const double q_samp = (th == Theorem::BT2 || sup_version) ? inf : p;
    samp.weights = w;
    samp.p = q_samp;
    const LinearNorm cont = nd.span_norm(all, p);
    const double D = span_sup(cont, samp, x.dim(), x.field(), {gu}, seed).value;
    rep.constants["D"] = D;
    const double s_gu = samp.value(gu);
    const double c_gu = cont.value(gu);
    const double s_fg = fit::weighted_norm(y - bx * g, w, q_samp);
    const double s_fu = fit::weighted_norm(y - bx * u, w, q_samp);
    const double fg_p = nd.norm(t.on_q - nd.bq * g, t.on_s - nd.bs * g, p);
    rep.audits.push_back(audit_line("||f-g||_p <= d(f,X)_inf", fg_p, d_inf, "step"));
    rep.audits.push_back(audit_line("||g-u||_p <= D ||S(g-u)||", c_gu, D * s_gu, "step"));
    rep.audits.push_back(audit_line("||S(f-u)|| <= ||S(f-g)||", s_fu, s_fg, "step"));
    if (sup_version) {
        rep.audits.push_back(audit_line("||f-u||_inf <= (2D+1) d(f,X)_inf", err_inf, (2 * D + 1) * d_inf));
    } else if (th == Theorem::BT1) {
        const double b = 2 * D * std::pow(W, 1.0 / p) + 1;
        rep.audits.push_back(audit_line("||S(f-g)||_{p,w} <= W^{1/p} d(f,X)_inf", s_fg, std::pow(W, 1.0 / p) * d_inf, "step"));
        rep.audits.push_back(audit_line("||f-u||_p <= (2DW^{1/p}+1) d(f,X)_inf", err_p, b * d_inf));
    } else if (th == Theorem::BT1a) {
        const LinearNorm sup = nd.span_norm(all, inf);
        const double M = span_sup(sup, cont, x.dim(), x.field(), {gu}, task_seed(seed, 1)).value;
        rep.constants["M"] = M;
        rep.audits.push_back(audit_line("||g-u||_inf <= M ||g-u||_p", sup.value(gu), M * c_gu, "step"));
        const double b = 2 * M * D * std::pow(W, 1.0 / p) + 1;
        rep.audits.push_back(audit_line("||f-u||_inf <= (2MDW^{1/p}+1) d(f,X)_inf", err_inf, b * d_inf));
    } else {
        rep.audits.push_back(audit_line("||f-u||_p <= (2D+1) d(f,X)_inf", err_p, (2 * D + 1) * d_inf));
    }
    rep.close();
    return rep;
}

// Universal LDI(p, q) constant over X_k(D_N): max over k-spans of sup ||g||_p / ||S(g)||_q on
// the audit nodes. Probes are dictionary-coordinate vectors; each is used in every span
// containing its support. Returns +inf when some span is not injective on the points.
inline double universal_D(const Nodes& nd, const DomainSpec& dom, const PointSet& pts, std::size_t k, double p,
                          double q, const std::vector<CVec>& probes, std::uint64_t seed) {
    const CollectionSpec col{nd.dict, k};
    const CMat bx = nd.dict.eval_rows(pts.points);
    double D = 0.0;
    std::size_t count = 0;
    col.for_each([&](const std::vector<std::size_t>& idx) {
        const Subspace sub = nd.dict.columns(idx);
        ++count;
        if (!is_injective(sub, pts, dom)) {
            D = std::numeric_limits<double>::infinity();
            return false;
        }
        LinearNorm den;
        den.matrix = Nodes::cols(bx, idx);
        den.weights = RVec::Constant(pts.m(), 1.0 / static_cast<double>(pts.m()));
        den.p = q;
        std::vector<CVec> local;
        for (const CVec& c : probes) {
            bool inside = true;
            for (Eigen::Index i = 0; i < c.size() && inside; ++i)
                if (c(i) != Scalar(0.0) && std::find(idx.begin(), idx.end(), static_cast<std::size_t>(i)) == idx.end())
                    inside = false;
            if (!inside) continue;
            CVec r(idx.size());
            for (std::size_t a = 0; a < idx.size(); ++a) r(a) = c(static_cast<Eigen::Index>(idx[a]));
            if (r.norm() > 0.0) local.push_back(r);
        }
        const double val = span_sup(nd.span_norm(idx, p), den, sub.dim(), sub.field(), local, task_seed(seed, count)).value;
        D = std::max(D, val);
        return true;
    });
    return D;
}

// Dictionary-coordinate vector of coefficients c on `support`.
inline CVec embed(const std::vector<std::size_t>& support, const CVec& c, std::size_t n) {
    CVec out = CVec::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t a = 0; a < support.size(); ++a) out(static_cast<Eigen::Index>(support[a])) += c(static_cast<Eigen::Index>(a));
    return out;
}

struct UbCase {
    CVec u, h;           // dictionary coordinates
    double err_p = 0, err_xi = 0, sigma_inf = 0, sigma_xi = 0, s_hu = 0, hu_p = 0;
    RecoveryReport rec;
};

// lp^s recovery of f plus the quantities of the ubT5 chain.
inline UbCase ub_case(const Function& f, const Nodes& nd, const DomainSpec& dom, const PointSet& pts, std::size_t v,
                      double p) {
    UbCase c;
    const std::size_t n = static_cast<std::size_t>(nd.dict.dim());
    c.rec = recover_universal(RecoveryInput(f), nd.dict, v, pts, p, Variant::lp_s, dom);
    c.u = embed(c.rec.support, c.rec.coef, n);
    NormSpec sup_spec;
    sup_spec.p = std::numeric_limits<double>::infinity();
    sup_spec.extra_sup = pts.points;
    const SigmaResult hs = sigma_v(f, nd.dict, v, sup_spec, dom);
    c.h = embed(hs.support, hs.coef, n);
    c.sigma_inf = hs.value;
    NormSpec disc_spec;
    disc_spec.p = p;
    disc_spec.at = pts;
    c.sigma_xi = sigma_v(f, nd.dict, v, disc_spec, dom).value;
    const Target t = tabulate(f, nd);
    c.err_p = nd.norm_q(t.on_q - nd.bq * c.u, p);
    c.err_xi = c.rec.errors.at("Lp_xi");
    const CVec hu = c.h - c.u;
    c.s_hu = (nd.dict.eval_rows(pts.points) * hu).cwiseAbs().maxCoeff();
    c.hu_p = nd.norm_q(nd.bq * hu, p);
    return c;
}

}  // namespace detail

/// Audits one theorem on one instance. Hypothesis constants (D, W, M) are measured on the
/// instance, each probed at the element its proof applies them to, so every proof link is
/// checked against the same numbers. A theorem line with slack < -1e-8 is a violation;
/// failed hypotheses give not_applicable. With several targets the worst report is returned
/// (ubT6 takes them together as the class F).
inline RecoveryReport lebesgue_audit(Theorem th, const AuditInstance& inst) {
    require(!inst.targets.empty(), ErrorKind::invalid_parameters, "audit needs at least one target");
    const double p = inst.p;
    check_exponent(p, "p");
    auto worst_of = [](std::vector<RecoveryReport> reps) {
        std::size_t k = 0;
        for (std::size_t i = 1; i < reps.size(); ++i) {
            const bool cur_na = reps[k].status == AuditStatus::not_applicable;
            const bool new_na = reps[i].status == AuditStatus::not_applicable;
            if ((cur_na && !new_na) || (!new_na && reps[i].min_slack() < reps[k].min_slack())) k = i;
        }
        return reps[k];
    };
    switch (th) {
    case Theorem::BT1:
    case Theorem::BT1a:
    case Theorem::BT2:
    case Theorem::BT3:
    case Theorem::BT4: {
        PointSet pts = inst.points;
        Theorem run = th;
        double pp = p;
        std::string note;
        if (th == Theorem::BT3 || th == Theorem::BT4) {
            pp = 2.0;
            run = th == Theorem::BT3 ? Theorem::BT2 : Theorem::BT1;
            if (inst.search_m > 0) {
                const double q = th == Theorem::BT3 ? std::numeric_limits<double>::infinity() : 2.0;
                pts = search_ldi_points(inst.space, inst.domain, inst.search_m, 2.0, q, inst.search_restarts, inst.seed)
                          .points;
            }
            if (th == Theorem::BT4) pts.weights.reset();
            note = "existence theorem: audited on the given/searched points; a failed search is not a refutation";
        }
        std::vector<RecoveryReport> reps;
        for (std::size_t i = 0; i < inst.targets.size(); ++i) {
            RecoveryReport r = detail::audit_fixed(run, inst.space, inst.domain, pts, inst.targets[i], pp,
                                                   task_seed(inst.seed, i));
            r.algorithm = to_string(th);
            r.input_id = inst.id + "/" + std::to_string(i);
            if (!note.empty()) r.note = r.note.empty() ? note : r.note + "; " + note;
            if (th == Theorem::BT3 || th == Theorem::BT4) r.constants["m"] = static_cast<double>(pts.m());
            reps.push_back(std::move(r));
        }
        return worst_of(std::move(reps));
    }
    case Theorem::ubT3: {
        require(!is_inf_exponent(p), ErrorKind::invalid_parameters, "ubT3 needs p < inf");
        const Subspace& dict = inst.space;
        const std::size_t n = static_cast<std::size_t>(dict.dim());
        if (inst.v < 1 || inst.v > n) return detail::not_applicable(th, "need 1 <= v <= N");
        const detail::Nodes nd(dict, inst.domain, inst.points.points);
        const CMat bx = dict.eval_rows(inst.points.points);
        const RVec w = RVec::Constant(inst.points.m(), 1.0 / static_cast<double>(inst.points.m()));
        const double inf = std::numeric_limits<double>::infinity();
        std::vector<RecoveryReport> reps;
        for (std::size_t i = 0; i < inst.targets.size(); ++i) {
            const Function& f = inst.targets[i];
            const detail::Target t = detail::tabulate(f, nd);
            const CVec y = sample_vector(f, inst.points);
            RecoveryReport rep = recover_universal(RecoveryInput(f), dict, inst.v, inst.points, p, Variant::lp_inf,
                                                   inst.domain);
            rep.algorithm = to_string(th);
            rep.input_id = inst.id + "/" + std::to_string(i);
            // n*: the span with the smallest d(f, X(n))_inf, its l_inf fit and best approximation.
            double sig = inf, err_star = 0.0;
            CVec hu_star;
            CollectionSpec{dict, inst.v}.for_each([&](const std::vector<std::size_t>& idx) {
                const fit::FitResult hf =
                    fit::weighted_lp_fit(detail::Nodes::cols(nd.bs, idx), t.on_s, RVec::Ones(nd.sup.size()), inf, dict.field());
                if (detail::better(hf.residual_norm, sig)) {
                    sig = hf.residual_norm;
                    const CVec un = fit::weighted_lp_fit(detail::Nodes::cols(bx, idx), y, w, inf, dict.field()).coef;
                    err_star = nd.norm_q(t.on_q - detail::Nodes::cols(nd.bq, idx) * un, p);
                    hu_star = detail::embed(idx, hf.coef - un, n);
                }
                return true;
            });
            const double D = detail::universal_D(nd, inst.domain, inst.points, inst.v, p, inf, {hu_star},
                                                 task_seed(inst.seed, i));
            rep.constants["D"] = D;
            rep.errors["sigma_inf"] = sig;
            if (std::isinf(D)) {
                rep.note = "hypothesis fails: some v-span is not injective on the points (D = inf)";
                rep.status = AuditStatus::not_applicable;
            } else {
                rep.audits.push_back(audit_line("selection: ||f-u||_p <= ||f-u_n*||_p", rep.errors["Lp"], err_star, "step"));
                rep.audits.push_back(audit_line("BT2 on X(n*): ||f-u_n*||_p <= (2D+1) sigma_v(f)_inf", err_star,
                                                (2 * D + 1) * sig, "step"));
                rep.audits.push_back(audit_line("||f-u||_p <= (2D+1) sigma_v(f)_inf", rep.errors["Lp"], (2 * D + 1) * sig));
                rep.close();
            }
            reps.push_back(std::move(rep));
        }
        return worst_of(std::move(reps));
    }
    case Theorem::ubT5:
    case Theorem::ubT6: {
        require(!is_inf_exponent(p), ErrorKind::invalid_parameters, "ubT5/ubT6 need p < inf");
        const Subspace& dict = inst.space;
        const std::size_t n = static_cast<std::size_t>(dict.dim());
        if (inst.v < 1 || 2 * inst.v > n) return detail::not_applicable(th, "need 1 <= v and 2v <= N");
        const detail::Nodes nd(dict, inst.domain, inst.points.points);
        const double inf = std::numeric_limits<double>::infinity();
        const double mp = std::pow(static_cast<double>(inst.points.m()), 1.0 / p);
        std::vector<detail::UbCase> cases;
        std::vector<CVec> probes;
        for (const Function& f : inst.targets) {
            cases.push_back(detail::ub_case(f, nd, inst.domain, inst.points, inst.v, p));
            probes.push_back(cases.back().h - cases.back().u);
        }
        const double D = detail::universal_D(nd, inst.domain, inst.points, 2 * inst.v, p, inf, probes, inst.seed);
        auto base = [&](const std::string& id) {
            RecoveryReport r;
            r.algorithm = to_string(th);
            r.input_id = id;
            r.constants["D"] = D;
            r.constants["m"] = static_cast<double>(inst.points.m());
            return r;
        };
        if (std::isinf(D)) {
            RecoveryReport r = base(inst.id);
            r.note = "hypothesis fails: some 2v-span is not injective on the points (D = inf)";
            return r;
        }
        if (th == Theorem::ubT6) {
            RecoveryReport r = base(inst.id);
            double left = 0.0, sig = 0.0;
            for (const detail::UbCase& c : cases) {
                left = std::max(left, c.err_p);
                sig = std::max(sig, c.sigma_inf);
            }
            r.errors["Lp"] = left;
            r.errors["sigma_inf"] = sig;
            r.audits.push_back(audit_line("sup_F ||f-lp_s(f)||_p <= (2D+1) sigma_v(F)_inf", left, (2 * D + 1) * sig));
            r.audits.push_back(audit_line("sup_F ||f-lp_s(f)||_p <= (1+D(1+m^{1/p})) sigma_v(F)_inf", left,
                                          (1 + D * (1 + mp)) * sig, "corrected"));
            r.note = "the lp^s error is one admissible mapping; exceeding the bound would not refute the optimal-recovery statement";
            r.close();
            return r;
        }
        std::vector<RecoveryReport> reps;
        for (std::size_t i = 0; i < cases.size(); ++i) {
            const detail::UbCase& c = cases[i];
            RecoveryReport r = base(inst.id + "/" + std::to_string(i));
            r.support = c.rec.support;
            r.coef = c.rec.coef;
            r.errors = c.rec.errors;
            r.errors["sigma_inf"] = c.sigma_inf;
            r.errors["sigma_xi"] = c.sigma_xi;
            r.audits.push_back(audit_line("ub15: ||S(f-u)||_p = sigma_v(f)_Lp(xi)", c.err_xi, c.sigma_xi, "step"));
            r.audits.push_back(audit_line("||S(h-u)||_inf <= 2 sigma_v(f)_inf", c.s_hu, 2 * c.sigma_inf, "step"));
            r.audits.push_back(audit_line("||h-u||_p <= D ||S(h-u)||_inf", c.hu_p, D * c.s_hu, "step"));
            r.audits.push_back(audit_line("||f-u||_p <= (2D+1) sigma_v(f)_inf", c.err_p, (2 * D + 1) * c.sigma_inf));
            r.audits.push_back(audit_line("||f-u||_p <= (1+D(1+m^{1/p})) sigma_v(f)_inf", c.err_p,
                                          (1 + D * (1 + mp)) * c.sigma_inf, "corrected"));
            r.close();
            reps.push_back(std::move(r));
        }
        return worst_of(std::move(reps));
    }
    }
    return detail::not_applicable(th, "unknown theorem");
}

// ---------------------------------------------------------------------------
// L_inf discretization chains
// ---------------------------------------------------------------------------

/// ||f||_inf <= M ||f||_2 <= M D (m^{-1} sum |f(xi^j)|^2)^{1/2} <= M D max_j |f(xi^j)|:
/// M = NI(2, inf) (christoffel), D = LDI(2, 2) (eigen-exact); the measured LDI(inf, 2) and
/// LDI(inf, inf) constants are checked against the chain link by link. `M_claim`, when given,
/// is checked as a hypothesis (|Q|^{1/2} for Tr(Q), (N(1+eps))^{1/2} for a KW measure).
inline RecoveryReport chain_audit(const Subspace& s, const DomainSpec& dom, const PointSet& pts,
                                  std::optional<double> M_claim = std::nullopt, std::uint64_t seed = 0) {
    const double inf = std::numeric_limits<double>::infinity();
    RecoveryReport r;
    r.algorithm = "ldi-inf-chain";
    const double M = nikolskii_constant(s, dom, 2.0, inf).value;
    r.constants["M"] = M;
    r.constants["N"] = static_cast<double>(s.dim());
    r.constants["m"] = static_cast<double>(pts.m());
    if (M_claim) r.audits.push_back(audit_line("NI(2,inf): M <= claimed", M, *M_claim, "hypothesis"));
    const DiscReport d22 = disc_constants(s, dom, pts, 2.0, 2.0);
    if (d22.D_L.is_infinite()) {
        r.note = "sampling operator not injective: LDI(2,2) fails, chain not applicable";
        r.status = AuditStatus::not_applicable;
        return r;
    }
    const double D = d22.D_L.value();
    r.constants["D22"] = D;
    // Probes: christoffel witnesses at the largest grid values and the LDI(2,2) witness.
    const OrthoBasis ob = orthonormalize(s, dom);
    const std::vector<Point> grid = sup_grid(dom, &s.system());
    const RVec ch = (s.eval_rows(grid) * ob.T.transpose()).rowwise().squaredNorm();
    std::vector<CVec> probes{d22.witness_L};
    {
        std::vector<Eigen::Index> order(ch.size());
        for (Eigen::Index k = 0; k < ch.size(); ++k) order[k] = k;
        const std::size_t top = std::min<std::size_t>(4, order.size());
        std::partial_sort(order.begin(), order.begin() + top, order.end(),
                          [&](Eigen::Index a, Eigen::Index b) { return ch(a) > ch(b) || (ch(a) == ch(b) && a < b); });
        for (std::size_t k = 0; k < top; ++k) probes.push_back(christoffel_witness(ob, grid[order[k]]));
    }
    DiscOptions o;
    o.seed = seed;
    o.probes_L = probes;
    const DiscReport dii = disc_constants(s, dom, pts, inf, inf, o);
    o.probes_L.push_back(dii.witness_L);
    const DiscReport di2 = disc_constants(s, dom, pts, inf, 2.0, o);
    const double Di2 = di2.D_L.as_double(), Dii = dii.D_L.as_double();
    r.constants["D_inf_2"] = Di2;
    r.constants["D_inf_inf"] = Dii;
    r.constants["C"] = Di2 / std::sqrt(static_cast<double>(s.dim()));
    r.audits.push_back(audit_line("LDI(inf,2): D_inf_2 <= M D22", Di2, M * D));
    r.audits.push_back(audit_line("LDI(inf,inf): D_inf_inf <= D_inf_2", Dii, Di2));
    r.close();
    return r;
}

struct KwChainResult {
    DesignMeasure design;
    PointSet points;
    RecoveryReport report;
};

/// Kiefer-Wolfowitz measure on the candidate grid, then m points (m <= 2N by default) searched
/// among its atoms for LDI(2,2) w.r.t. that measure, then the L_inf chain with
/// M_claim = (N(1+eps))^{1/2}.
inline KwChainResult kw_chain_audit(const Subspace& s, const DomainSpec& dom, const std::vector<Point>& candidates,
                                    std::size_t m = 0, double eps = 1e-3, int restarts = 4, std::uint64_t seed = 0) {
    KwChainResult out;
    out.design = kw_design(s, candidates, eps);
    const double n = static_cast<double>(s.dim());
    if (m == 0) m = static_cast<std::size_t>(2 * s.dim());
    std::vector<Point> atoms;
    std::vector<double> masses;
    for (std::size_t k = 0; k < candidates.size(); ++k) {
        atoms.push_back(candidates[k]);
        masses.push_back(out.design.masses[k]);
    }
    double tot = 0.0;
    for (double v : masses) tot += v;
    for (double& v : masses) v /= tot;
    const DomainSpec mu = dom.with_atomic_measure(atoms, masses);
    LdiSearchOptions so;
    so.max_refine_sweeps = 4;
    const LdiSearchResult sr = search_ldi_points(s, mu, m, 2.0, 2.0, restarts, seed, so);
    out.points = sr.points;
    out.report = chain_audit(s, mu, out.points, std::sqrt(n * (1 + eps)), seed);
    out.report.algorithm = "kw-chain";
    out.report.constants["kw_iterations"] = out.design.iterations;
    out.report.constants["kw_max_christoffel"] = out.design.max_christoffel;
    out.report.audits.insert(out.report.audits.begin(),
                             audit_line("KW: max christoffel <= N(1+eps)", out.design.max_christoffel, n * (1 + eps),
                                        "hypothesis"));
    std::size_t zero_mass = 0;
    for (double v : masses) zero_mass += v == 0.0;
    if (zero_mass) out.report.note = std::to_string(zero_mass) + " candidates carry zero mass and are outside the sup set";
    out.report.close();
    return out;
}

}  // namespace sdisc
