#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sdisc/fnspace.hpp"

namespace sdisc {

// ---------------------------------------------------------------------------
// Point sets and sampling
// ---------------------------------------------------------------------------

/// xi = {xi^j}, duplicates allowed, with optional weights lambda_j and budget W >= sum lambda_j.
struct PointSet {
    std::vector<Point> points;
    std::optional<std::vector<double>> weights;
    std::optional<double> weight_budget;

    PointSet() = default;
    explicit PointSet(std::vector<Point> pts) : points(std::move(pts)) { validate(); }
    PointSet(std::vector<Point> pts, std::vector<double> w) : points(std::move(pts)), weights(std::move(w)) { validate(); }

    std::size_t m() const { return points.size(); }

    void validate() const {
        require(!points.empty(), ErrorKind::invalid_parameters, "point set must be nonempty");
        if (weights) {
            require(weights->size() == points.size(), ErrorKind::invalid_parameters, "weights length != m");
            for (double w : *weights) require(w >= 0.0 && std::isfinite(w), ErrorKind::invalid_parameters, "negative weight");
        }
        if (weight_budget) {
            require(weights.has_value(), ErrorKind::invalid_parameters, "weight budget without weights");
            require(weight_sum() <= *weight_budget + 1e-12, ErrorKind::invalid_parameters, "sum of weights exceeds W");
        }
    }

    double weight_sum() const {
        double s = 0.0;
        if (weights)
            for (double w : *weights) s += w;
        return s;
    }

    /// lambda if present, otherwise 1/m.
    RVec weight_vector() const {
        if (weights) return Eigen::Map<const RVec>(weights->data(), weights->size());
        return RVec::Constant(m(), 1.0 / static_cast<double>(m()));
    }

    /// Every point repeated k times (weights divided by k).
    PointSet replicated(int k) const {
        PointSet out;
        for (std::size_t j = 0; j < m(); ++j)
            for (int r = 0; r < k; ++r) out.points.push_back(points[j]);
        if (weights) {
            out.weights.emplace();
            for (double w : *weights)
                for (int r = 0; r < k; ++r) out.weights->push_back(w / k);
        }
        out.weight_budget = weight_budget;
        return out;
    }
};

/// (f(xi^1), ..., f(xi^m)).
inline CVec sample_vector(const Function& f, const PointSet& pts) {
    CVec v(pts.m());
    for (std::size_t j = 0; j < pts.m(); ++j) v(j) = f(pts.points[j]);
    return v;
}

inline CVec sample_vector(const Subspace& s, const CVec& coef, const PointSet& pts) {
    return s.eval_rows(pts.points) * coef;
}

/// (m^{-1} sum |v_j|^q)^{1/q}, or (sum w_j |v_j|^q)^{1/q} with weights; max for q = inf.
inline double disc_norm(const CVec& v, double q, const std::optional<RVec>& weights = std::nullopt) {
    check_exponent(q, "q");
    if (weights) {
        require(weights->size() == v.size(), ErrorKind::invalid_parameters, "weights length != m");
        require((weights->array() >= 0.0).all(), ErrorKind::invalid_parameters, "negative weight");
        return fit::weighted_norm(v, *weights, q);
    }
    require(v.size() >= 1, ErrorKind::invalid_parameters, "empty sampling vector");
    return fit::weighted_norm(v, RVec::Constant(v.size(), 1.0 / static_cast<double>(v.size())), q);
}

/// Coefficient-space sampling norm: uniform 1/m weights, or lambda when `weighted`.
inline LinearNorm sampling_norm(const Subspace& s, const PointSet& pts, double q, bool weighted) {
    check_exponent(q, "q");
    if (weighted)
        require(pts.weights.has_value(), ErrorKind::invalid_parameters, "weighted norm needs point weights");
    LinearNorm out;
    out.matrix = s.eval_rows(pts.points);
    out.weights = weighted ? pts.weight_vector() : RVec::Constant(pts.m(), 1.0 / static_cast<double>(pts.m()));
    out.p = q;
    return out;
}

/// The domain on which a system's Gram matrix is exact (uniform measure).
inline DomainSpec natural_domain(const FunctionSystem& sys) {
    switch (sys.kind()) {
    case SystemKind::trig:
    case SystemKind::lacunary: return DomainSpec::torus(sys.torus_dim(), 16);
    case SystemKind::hat: return DomainSpec::interval(16);
    case SystemKind::discrete_matrix: return DomainSpec::finite_set(static_cast<std::size_t>(sys.table().rows()));
    }
    return DomainSpec::interval(16);
}

/// Full column rank of the sampled orthonormal basis: sigma_min^2 >= 1e-10 max(sigma_max^2, 1).
/// Working in an L2(mu)-orthonormal basis makes the test independent of how X is parametrized.
inline bool is_injective(const Subspace& s, const PointSet& pts, const std::optional<DomainSpec>& dom = std::nullopt) {
    if (pts.m() < static_cast<std::size_t>(s.dim())) return false;
    const CMat r = linalg::cholesky_upper(gram(s, dom ? *dom : natural_domain(s.system())));
    const CMat rinv = r.triangularView<Eigen::Upper>().solve(CMat::Identity(r.rows(), r.cols()));
    Eigen::JacobiSVD<CMat> svd(s.eval_rows(pts.points) * rinv);
    const RVec& sv = svd.singularValues();
    const double top = std::max(sv(0) * sv(0), 1.0);
    return sv(sv.size() - 1) * sv(sv.size() - 1) >= linalg::degenerate_threshold * top;
}

inline bool is_injective(const Subspace& s, const std::vector<Point>& pts) { return is_injective(s, PointSet(pts)); }

// ---------------------------------------------------------------------------
// Discretization constants
// ---------------------------------------------------------------------------

struct DiscReport {
    double p = 2.0, q = 2.0;
    Constant D_L, D_R;
    CVec witness_L, witness_R;
    std::string method;  ///< "eigen-exact" | "optimized"
    bool weighted = false;
    bool lower_bound_only = false;  ///< optimizer did not certify convergence
    std::map<std::string, double> margins;
    int grid_size = 0;
    std::uint64_t seed = 0;
};

struct DiscOptions {
    bool weighted = false;
    bool force_optimizer = false;
    std::uint64_t seed = 0;
    RatioOptions ratio{};
    std::vector<CVec> probes_R, probes_L;
};

/// D_R = sup disc_q(Sf)/||f||_p and D_L = sup ||f||_p/disc_q(Sf) over X (D_L = inf on a kernel).
/// p = q = 2: generalized eigenvalues of H = A^* diag(w) A against G; otherwise multi-start
/// ascent, with each side probed at the other side's witness so D_L D_R >= 1 holds as measured.
inline DiscReport disc_constants(const Subspace& s, const DomainSpec& dom, const PointSet& pts, double p, double q,
                                 const DiscOptions& opt = {}) {
    check_exponent(p, "p");
    check_exponent(q, "q");
    pts.validate();
    const CMat g = gram(s, dom);
    DiscReport rep;
    rep.p = p;
    rep.q = q;
    rep.weighted = opt.weighted;
    rep.grid_size = dom.grid_size;
    rep.seed = opt.seed;
    const Eigen::Index n = s.dim();
    const LinearNorm samp = sampling_norm(s, pts, q, opt.weighted);
    const bool injective = is_injective(s, pts, dom);

    if (p == 2.0 && q == 2.0 && !opt.force_optimizer) {
        const CMat h = samp.matrix.adjoint() * samp.weights.asDiagonal() * samp.matrix;
        const linalg::GenEig ge = linalg::generalized_eig(h, g);
        const double top = std::max(0.0, ge.values(n - 1));
        rep.D_R = Constant::finite(std::sqrt(top));
        rep.witness_R = ge.vectors.col(n - 1).normalized();
        const double bottom = ge.values(0);
        rep.witness_L = ge.vectors.col(0).normalized();
        if (!injective || bottom <= 0.0)
            rep.D_L = Constant::infinite();
        else
            rep.D_L = Constant::finite(1.0 / std::sqrt(bottom));
        rep.method = "eigen-exact";
    } else {
        const LinearNorm lp = domain_norm(s, dom, p);
        RatioOptions ro = opt.ratio;
        ro.seed = opt.seed;
        // Structured starts: extreme vectors of the (2,2) problem.
        const CMat h = samp.matrix.adjoint() * samp.weights.asDiagonal() * samp.matrix;
        const linalg::GenEig ge = linalg::generalized_eig(h, g);
        RatioOptions ro_r = ro;
        ro_r.starts.push_back(ge.vectors.col(n - 1));
        for (const CVec& c : opt.probes_R) ro_r.probes.push_back(c);
        const RatioResult rr = maximize_ratio(samp, lp, n, s.field(), ro_r);
        rep.lower_bound_only = !rr.converged;
        if (rr.sweep_value) rep.margins["sweep_R"] = rr.value - *rr.sweep_value;
        if (!injective) {
            rep.D_L = Constant::infinite();
            // Least-singular direction of the sampled orthonormal basis.
            const CMat r = linalg::cholesky_upper(g);
            const CMat rinv = r.triangularView<Eigen::Upper>().solve(CMat::Identity(n, n));
            Eigen::JacobiSVD<CMat> svd(samp.matrix * rinv, Eigen::ComputeFullV);
            rep.witness_L = (rinv * svd.matrixV().col(n - 1)).normalized();
            rep.D_R = Constant::finite(rr.value);
            rep.witness_R = rr.witness;
        } else {
            RatioOptions ro_l = ro;
            ro_l.starts.push_back(ge.vectors.col(0));
            for (const CVec& c : opt.probes_L) ro_l.probes.push_back(c);
            ro_l.probes.push_back(rr.witness);
            const RatioResult rl = maximize_ratio(lp, samp, n, s.field(), ro_l);
            if (rl.sweep_value) rep.margins["sweep_L"] = rl.value - *rl.sweep_value;
            rep.lower_bound_only = rep.lower_bound_only || !rl.converged;
            // Close the chain: D_R must dominate the ratio at the D_L witness too.
            const double back = detail::ratio_at(samp, lp, rl.witness);
            rep.D_R = Constant::finite(std::max(rr.value, back));
            rep.witness_R = back > rr.value ? CVec(rl.witness) : rr.witness;
            rep.D_L = Constant::finite(rl.value);
            rep.witness_L = rl.witness;
        }
        rep.method = "optimized";
    }
    if (rep.D_L.is_finite()) rep.margins["chain"] = rep.D_L.value() * rep.D_R.value() - 1.0;
    return rep;
}

/// sup over X of num/den with proof witnesses as probes; the generic measuring primitive.
inline RatioResult measure_sup(const LinearNorm& num, const LinearNorm& den, const Subspace& s,
                               std::vector<CVec> probes, std::uint64_t seed, RatioOptions ro = {}) {
    ro.seed = seed;
    for (CVec& c : probes) ro.probes.push_back(std::move(c));
    return maximize_ratio(num, den, s.dim(), s.field(), ro);
}

// ---------------------------------------------------------------------------
// Audits
// ---------------------------------------------------------------------------

enum class AuditStatus { holds, violated, not_applicable };

inline const char* to_string(AuditStatus s) {
    switch (s) {
    case AuditStatus::holds: return "holds";
    case AuditStatus::violated: return "violated";
    case AuditStatus::not_applicable: return "not-applicable";
    }
    return "unknown";
}

/// lhs <= rhs up to relative 1e-9.
inline bool within(double lhs, double rhs, double rel = 1e-9) { return lhs <= rhs * (1 + rel) + 1e-12; }

inline AuditStatus status_of(bool ok) { return ok ? AuditStatus::holds : AuditStatus::violated; }

/// m >= D^{-q} (2a)^{-q/p}; vacuous (0) for D = inf.
inline double rip3_bound(double a, double p, double q, double d) {
    require(a > 0.0 && a <= 0.25, ErrorKind::invalid_parameters, "rip3_bound needs 0 < a <= 1/4");
    check_exponent(p, "p");
    check_exponent(q, "q");
    require(d > 0.0, ErrorKind::invalid_parameters, "D must be positive");
    if (std::isinf(d)) return 0.0;
    return std::pow(d, -q) * std::pow(2 * a, -q / p);
}

struct Rip3Audit {
    double a = 0, p = 0, q = 0;
    std::size_t m = 0;
    bool injective = false;
    double D_R = 0;
    double bound = 0;
    AuditStatus status = AuditStatus::not_applicable;
};

/// span{f_a, f_{a/2}} on [0,1]: measured D_R(p,q) and the check m >= rip3_bound.
inline Rip3Audit rip3_audit(double a, double p, double q, const PointSet& pts, int grid_size = 256,
                            std::uint64_t seed = 0) {
    require(!is_inf_exponent(p) && !is_inf_exponent(q), ErrorKind::invalid_parameters, "p, q must be finite");
    Rip3Audit out;
    out.a = a;
    out.p = p;
    out.q = q;
    out.m = pts.m();
    const Subspace x = FunctionSystem::hat_family({a, a / 2});
    const DomainSpec dom = DomainSpec::interval(grid_size);
    out.injective = is_injective(x, pts, dom);
    DiscOptions o;
    o.seed = seed;
    o.probes_R.push_back(CVec::Unit(2, 0));  // f_a itself
    out.D_R = disc_constants(x, dom, pts, p, q, o).D_R.value();
    out.bound = rip3_bound(a, p, q, out.D_R);
    out.status = out.injective ? status_of(within(out.bound, static_cast<double>(out.m))) : AuditStatus::not_applicable;
    return out;
}

struct Ril1Audit {
    double p = 0, q = 0;
    double D = 0, M = 0;
    std::vector<double> lhs, rhs;  ///< lambda_j christoffel(xi^j)^{q/2} and (DM)^q
    double worst_slack = 0;        ///< min_j (rhs - lhs) / rhs
    std::size_t worst_index = 0;
    bool uniform_weights = false;  ///< weights absent: lambda_j = 1/m
    AuditStatus status = AuditStatus::not_applicable;
};

/// lambda_j (sum_i |u_i(xi^j)|^2)^{q/2} <= (D M)^q with D the measured WRDI(p -> q) constant
/// and M = NI(2, p); christoffel witnesses at the sample points are probed for both.
inline Ril1Audit ril1_audit(const Subspace& s, const DomainSpec& dom, const PointSet& pts, double p, double q,
                            std::uint64_t seed = 0) {
    require(p > 2.0 && !is_inf_exponent(p), ErrorKind::premise_failed, "RIL1 needs 2 < p < inf");
    require(q >= 1.0 && !is_inf_exponent(q), ErrorKind::premise_failed, "RIL1 needs 1 <= q < inf");
    Ril1Audit out;
    out.p = p;
    out.q = q;
    out.uniform_weights = !pts.weights.has_value();
    const OrthoBasis ob = orthonormalize(s, dom);
    std::vector<CVec> wit;
    std::vector<double> ch;
    for (const Point& x : pts.points) {
        wit.push_back(christoffel_witness(ob, x));
        ch.push_back(christoffel(ob, x));
    }
    PointSet wp = pts;
    if (!wp.weights) wp.weights = std::vector<double>(pts.m(), 1.0 / static_cast<double>(pts.m()));
    const LinearNorm samp = sampling_norm(s, wp, q, true);
    const LinearNorm lp = domain_norm(s, dom, p);
    out.D = measure_sup(samp, lp, s, wit, seed).value;
    RatioOptions nro;
    nro.probes = wit;
    nro.seed = seed;
    out.M = nikolskii_constant(s, dom, 2.0, p, nro).value;
    const double rhs = std::pow(out.D * out.M, q);
    out.worst_slack = std::numeric_limits<double>::infinity();
    bool ok = true;
    const RVec lam = wp.weight_vector();
    for (std::size_t j = 0; j < pts.m(); ++j) {
        const double l = lam(j) * std::pow(ch[j], q / 2);
        out.lhs.push_back(l);
        out.rhs.push_back(rhs);
        const double slack = rhs > 0 ? (rhs - l) / rhs : (l > 0 ? -1.0 : 0.0);
        if (slack < out.worst_slack) {
            out.worst_slack = slack;
            out.worst_index = j;
        }
        ok = ok && within(l, rhs);
    }
    out.status = status_of(ok);
    return out;
}

struct Rip1Audit {
    double p = 0, q = 0, c = 0;
    std::size_t N = 0, m = 0;
    double D = 0, M = 0;
    double lhs = 0, rhs = 0;  ///< (cN)^{q/2} and m (D M)^q
    AuditStatus status = AuditStatus::not_applicable;
};

/// (cN)^{q/2} <= m (D M)^q with c = min christoffel / N measured over the sup grid and the
/// sample points, D the unweighted RDI(p, q) constant and M = NI(2, p).
inline Rip1Audit rip1_audit(const Subspace& s, const DomainSpec& dom, const PointSet& pts, double p, double q,
                            std::uint64_t seed = 0) {
    require(p > 2.0 && !is_inf_exponent(p), ErrorKind::premise_failed, "RIP1 needs 2 < p < inf");
    require(q >= 1.0 && !is_inf_exponent(q), ErrorKind::premise_failed, "RIP1 needs 1 <= q < inf");
    Rip1Audit out;
    out.p = p;
    out.q = q;
    out.N = static_cast<std::size_t>(s.dim());
    out.m = pts.m();
    PointSet uniform(pts.points);
    const Ril1Audit r = ril1_audit(s, dom, uniform, p, q, seed);
    out.D = r.D;
    out.M = r.M;
    const OrthoBasis ob = orthonormalize(s, dom);
    double mn = std::numeric_limits<double>::infinity();
    for (const Point& x : sup_grid(dom, &s.system())) mn = std::min(mn, christoffel(ob, x));
    for (const Point& x : pts.points) mn = std::min(mn, christoffel(ob, x));
    out.c = mn / static_cast<double>(out.N);
    out.lhs = std::pow(out.c * out.N, q / 2);
    out.rhs = static_cast<double>(out.m) * std::pow(out.D * out.M, q);
    out.status = out.c > 0 ? status_of(within(out.lhs, out.rhs)) : AuditStatus::not_applicable;
    return out;
}

struct RemLosiAudit {
    double p = 0, q = 0;
    Constant D_L_pq;  ///< measured LDI(p, q)
    Constant D_L_22;  ///< exact LDI(2, 2)
    double M = 0;     ///< NI(2, p)
    AuditStatus status = AuditStatus::not_applicable;
};

/// ||f||_p <= M ||f||_2 <= M D_L(2,2) disc_2 <= M D_L(2,2) disc_q for q >= 2: D_L(p,q) <= M D_L(2,2).
inline RemLosiAudit remlosi_audit(const Subspace& s, const DomainSpec& dom, const PointSet& pts, double p, double q,
                                  std::uint64_t seed = 0) {
    require(p >= 2.0 && q >= 2.0, ErrorKind::premise_failed, "the chain needs p, q >= 2");
    RemLosiAudit out;
    out.p = p;
    out.q = q;
    DiscOptions o;
    o.seed = seed;
    const DiscReport r22 = disc_constants(s, dom, pts, 2.0, 2.0, o);
    out.D_L_22 = r22.D_L;
    if (r22.D_L.is_infinite()) {
        out.D_L_pq = Constant::infinite();
        out.status = AuditStatus::not_applicable;
        return out;
    }
    const DiscReport rpq = disc_constants(s, dom, pts, p, q, o);
    out.D_L_pq = rpq.D_L;
    RatioOptions nro;
    nro.seed = seed;
    nro.probes.push_back(rpq.witness_L);
    out.M = p == 2.0 ? 1.0 : nikolskii_constant(s, dom, 2.0, p, nro).value;
    out.status = status_of(within(rpq.D_L.value(), out.M * r22.D_L.value()));
    return out;
}

// ---------------------------------------------------------------------------
// Khinchin
// ---------------------------------------------------------------------------

/// Sharp Khinchin upper constant for p >= 2: sqrt 2 (Gamma((p+1)/2) / sqrt pi)^{1/p}.
inline double khinchin_constant(double p) {
    require(p >= 2.0 && !is_inf_exponent(p), ErrorKind::invalid_parameters, "K_p needs 2 <= p < inf");
    return std::sqrt(2.0) * std::exp((std::lgamma((p + 1) / 2) - 0.5 * std::log(pi)) / p);
}

inline constexpr int khinchin_max_n = 12;

/// E |sum_i a_i r_i|^p over all 2^N sign patterns.
inline double rademacher_moment(const CVec& a, double p) {
    const int n = static_cast<int>(a.size());
    require(n <= khinchin_max_n, ErrorKind::size_limit, "sign enumeration limited to N <= 12");
    const std::uint32_t total = 1u << n;
    double s = 0.0;
    for (std::uint32_t mask = 0; mask < total; ++mask) {
        Scalar v = 0.0;
        for (int i = 0; i < n; ++i) v += (mask >> i & 1u) ? a(i) : -a(i);
        s += std::pow(std::abs(v), p);
    }
    return s / total;
}

struct KhinchinAudit {
    std::size_t N = 0, m = 0;
    double p = 0, K_p = 0;
    double D1 = 0, D2 = 0, M = 0;
    double average = 0;         ///< int sum_j lambda_j |f(xi^j, theta)|^p dtheta (exact)
    double lower = 0;           ///< D1^{-p} N^{p/2}
    double khinchin_rhs = 0;    ///< K_p^p sum_j lambda_j christoffel(xi^j)^{p/2}
    double final_lhs = 0;       ///< N^{p/2}
    double final_rhs = 0;       ///< m (K_p D1 D2 M)^p
    AuditStatus step_lower = AuditStatus::not_applicable;
    AuditStatus step_khinchin = AuditStatus::not_applicable;
    AuditStatus step_final = AuditStatus::not_applicable;
    AuditStatus status = AuditStatus::not_applicable;
};

/// Rademacher-average chain for sum_i r_i u_i over an orthonormal basis, with D1 the measured
/// WLDI(2 -> p) constant, D2 the measured WRDI(p) constant and M = NI(2, p). When `d1` is given
/// it must dominate the measured D1 (premise) and is used in place of it.
inline KhinchinAudit khinchin_audit(const Subspace& s, const DomainSpec& dom, const PointSet& pts, double p,
                                    std::optional<double> d1 = std::nullopt, std::uint64_t seed = 0) {
    require(p >= 2.0 && !is_inf_exponent(p), ErrorKind::premise_failed, "Khinchin audit needs 2 <= p < inf");
    require(s.dim() <= khinchin_max_n, ErrorKind::size_limit, "Khinchin audit limited to N <= 12");
    KhinchinAudit out;
    out.N = static_cast<std::size_t>(s.dim());
    out.m = pts.m();
    out.p = p;
    out.K_p = khinchin_constant(p);
    PointSet wp = pts;
    if (!wp.weights) wp.weights = std::vector<double>(pts.m(), 1.0 / static_cast<double>(pts.m()));
    const RVec lam = wp.weight_vector();
    const OrthoBasis ob = orthonormalize(s, dom);
    const Subspace u = ob.as_subspace();
    const CMat vals = u.eval_rows(wp.points);  // m x N values u_i(xi^j)
    const int n = static_cast<int>(out.N);
    const std::uint32_t total = 1u << n;

    // Rademacher sums as probes for D1; christoffel witnesses for D2 and M.
    std::vector<CVec> signs;
    double avg = 0.0;
    for (std::uint32_t mask = 0; mask < total; ++mask) {
        CVec th(n);
        for (int i = 0; i < n; ++i) th(i) = (mask >> i & 1u) ? 1.0 : -1.0;
        const CVec fv = vals * th;
        double sm = 0.0;
        for (Eigen::Index j = 0; j < fv.size(); ++j) sm += lam(j) * std::pow(std::abs(fv(j)), p);
        avg += sm;
        signs.push_back(th);
    }
    out.average = avg / total;

    const LinearNorm samp_u = sampling_norm(u, wp, p, true);
    const LinearNorm l2_u = domain_norm(u, dom, 2.0);
    const LinearNorm lp_u = domain_norm(u, dom, p);
    const RatioResult r1 = measure_sup(l2_u, samp_u, u, signs, seed);
    if (d1) {
        require(*d1 >= r1.value * (1 - 1e-9), ErrorKind::premise_failed, "given D1 is below the measured WLDI(2, p) constant");
        out.D1 = std::max(*d1, r1.value);
    } else {
        out.D1 = r1.value;
    }
    std::vector<CVec> wit;
    double chsum = 0.0;
    const OrthoBasis uob = orthonormalize(u, dom);
    for (Eigen::Index j = 0; j < vals.rows(); ++j) {
        const double ch = vals.row(j).squaredNorm();
        chsum += lam(j) * std::pow(ch, p / 2);
        wit.push_back(christoffel_witness(uob, wp.points[j]));
    }
    out.D2 = measure_sup(samp_u, lp_u, u, wit, seed).value;
    RatioOptions nro;
    nro.probes = wit;
    nro.seed = seed;
    out.M = nikolskii_constant(u, dom, 2.0, p, nro).value;

    out.lower = std::pow(out.D1, -p) * std::pow(static_cast<double>(n), p / 2);
    out.khinchin_rhs = std::pow(out.K_p, p) * chsum;
    out.final_lhs = std::pow(static_cast<double>(n), p / 2);
    out.final_rhs = static_cast<double>(out.m) * std::pow(out.K_p * out.D1 * out.D2 * out.M, p);
    out.step_lower = status_of(within(out.lower, out.average));
    out.step_khinchin = status_of(within(out.average, out.khinchin_rhs));
    out.step_final = status_of(within(out.final_lhs, out.final_rhs));
    const bool ok = out.step_lower == AuditStatus::holds && out.step_khinchin == AuditStatus::holds &&
                    out.step_final == AuditStatus::holds;
    out.status = status_of(ok);
    return out;
}

// ---------------------------------------------------------------------------
// WRDI transfer
// ---------------------------------------------------------------------------

/// NI(2, p, M) and WRDI(p) with constant D give WRDI(r) with constant D M, 2 <= r < p.
inline double wrdi_transfer(double d, double m, double p, double r) {
    require(d > 0.0 && m > 0.0, ErrorKind::invalid_parameters, "D and M must be positive");
    require(r >= 2.0 && r < p, ErrorKind::invalid_parameters, "r must lie in [2, p)");
    return d * m;
}

struct WrdiAudit {
    double p = 0, r = 0;
    double D = 0, M = 0;  ///< measured WRDI(p) and NI(2, p)
    double D_r = 0;       ///< measured WRDI(r)
    double transfer = 0;  ///< D M
    AuditStatus status = AuditStatus::not_applicable;
};

/// Measures WRDI(r) and checks it against D M; D and M are probed at the WRDI(r) witness.
inline WrdiAudit wrdi_transfer_audit(const Subspace& s, const DomainSpec& dom, const PointSet& pts, double p, double r,
                                     std::uint64_t seed = 0) {
    require(pts.weights.has_value(), ErrorKind::premise_failed, "WRDI transfer needs weights");
    require(std::abs(pts.weight_sum() - 1.0) <= 1e-12, ErrorKind::premise_failed, "weights must sum to 1");
    require(r >= 2.0 && r < p && !is_inf_exponent(p), ErrorKind::invalid_parameters, "need 2 <= r < p < inf");
    WrdiAudit out;
    out.p = p;
    out.r = r;
    const RatioResult rr = measure_sup(sampling_norm(s, pts, r, true), domain_norm(s, dom, r), s, {}, seed);
    out.D_r = rr.value;
    out.D = measure_sup(sampling_norm(s, pts, p, true), domain_norm(s, dom, p), s, {rr.witness}, seed).value;
    RatioOptions nro;
    nro.seed = seed;
    nro.probes.push_back(rr.witness);
    out.M = nikolskii_constant(s, dom, 2.0, p, nro).value;
    out.transfer = wrdi_transfer(out.D, out.M, p, r);
    out.status = status_of(within(out.D_r, out.transfer));
    return out;
}

}  // namespace sdisc
