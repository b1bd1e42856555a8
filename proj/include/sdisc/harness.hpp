#pragma once

#include <algorithm>
#include <chrono>
#include <deque>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "sdisc/io.hpp"
#include "sdisc/matrixtools.hpp"

namespace sdisc {

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<Json>> rows;

    void add(std::vector<Json> row) {
        require(row.size() == columns.size(), ErrorKind::invalid_parameters, "table row width");
        rows.push_back(std::move(row));
    }
    std::string csv() const {
        std::string out;
        for (std::size_t k = 0; k < columns.size(); ++k) out += (k ? "," : "") + csv_cell(columns[k]);
        out += "\n";
        for (const auto& r : rows) {
            for (std::size_t k = 0; k < r.size(); ++k) out += (k ? "," : "") + csv_cell(r[k]);
            out += "\n";
        }
        return out;
    }
    Json to_json() const {
        Json out;
        out["name"] = name;
        out["columns"] = columns;
        out["rows"] = rows;
        return out;
    }
};

struct Verdict {
    std::size_t holds = 0, violated = 0, not_applicable = 0;
    double min_slack = std::numeric_limits<double>::infinity();
};

struct ExperimentReport {
    std::string experiment;
    Json config;  ///< resolved config, echoed verbatim
    std::deque<Table> tables;  // deque: references from table() stay valid
    std::map<std::string, Verdict> verdicts;    ///< counted against the exit status
    std::map<std::string, Verdict> diagnostics; ///< proof-step audits, reported only
    Json summary = Json::object();
    double wall_clock = 0.0;  ///< seconds; kept out of to_json() so reports stay bit-identical

    /// Records one audited case; a NaN slack is left out of min_slack.
    void check(const std::string& key, AuditStatus s, double slack = std::numeric_limits<double>::quiet_NaN()) {
        tally(verdicts[key], s, slack);
    }
    void diagnose(const std::string& key, AuditStatus s, double slack = std::numeric_limits<double>::quiet_NaN()) {
        tally(diagnostics[key], s, slack);
    }
    Table& table(const std::string& name, std::vector<std::string> columns) {
        tables.push_back(Table{name, std::move(columns), {}});
        return tables.back();
    }

    std::size_t violations() const {
        std::size_t n = 0;
        for (const auto& [k, v] : verdicts) n += v.violated;
        return n;
    }
    std::size_t checked() const {
        std::size_t n = 0;
        for (const auto& [k, v] : verdicts) n += v.holds + v.violated;
        return n;
    }
    double min_slack() const {
        double s = std::numeric_limits<double>::infinity();
        for (const auto& [k, v] : verdicts) s = std::min(s, v.min_slack);
        return s;
    }
    bool passed() const { return violations() == 0; }

    Json to_json() const {
        Json out;
        out["schema"] = schema_version;
        out["experiment"] = experiment;
        out["config"] = config;
        Json t = Json::array();
        for (const Table& tb : tables) t.push_back(tb.to_json());
        out["tables"] = t;
        out["verdicts"] = verdict_json(verdicts);
        out["diagnostics"] = verdict_json(diagnostics);
        out["summary"] = summary;
        out["violations"] = violations();
        out["min_slack"] = num(min_slack());
        out["passed"] = passed();
        return out;
    }

private:
    static void tally(Verdict& v, AuditStatus s, double slack) {
        switch (s) {
        case AuditStatus::holds: ++v.holds; break;
        case AuditStatus::violated: ++v.violated; break;
        case AuditStatus::not_applicable: ++v.not_applicable; return;
        }
        if (!std::isnan(slack)) v.min_slack = std::min(v.min_slack, slack);
    }
    static Json verdict_json(const std::map<std::string, Verdict>& m) {
        Json out = Json::object();
        for (const auto& [k, v] : m)
            out[k] = Json{{"holds", v.holds},
                          {"violated", v.violated},
                          {"not_applicable", v.not_applicable},
                          {"min_slack", num(v.min_slack)}};
        return out;
    }
};

struct ExperimentConfig {
    std::string name;
    Json params = Json::object();
    std::uint64_t seed = 0;
};

using ExperimentBody = std::function<void(const Json& params, std::uint64_t seed, ExperimentReport& rep)>;

struct Experiment {
    std::string name;
    std::string description;
    std::vector<std::string> covers;  ///< paper items exercised
    Json defaults;
    ExperimentBody body;
};

// ---------------------------------------------------------------------------
// Instance generators
// ---------------------------------------------------------------------------

namespace harness {

inline double relative_slack(double lhs, double rhs) {
    if (std::isinf(rhs) && !std::isinf(lhs)) return 1.0;
    const double scale = std::max(std::abs(rhs), 1e-300);
    return (rhs - lhs) / scale;
}

inline AuditStatus within_status(double lhs, double rhs) { return status_of(within(lhs, rhs)); }

inline CMat gaussian(Eigen::Index r, Eigen::Index c, Rng& rng) {
    CMat t(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index k = 0; k < c; ++k) t(i, k) = normal(rng);
    return t;
}

/// m0 x n real matrix with columns orthonormal in L2^{m0} (A^T A = m0 I).
inline CMat orthonormal_columns(Eigen::Index m0, Eigen::Index n, Rng& rng) {
    const Eigen::HouseholderQR<CMat> qr(gaussian(m0, n, rng));
    const CMat q = qr.householderQ() * CMat::Identity(m0, n);
    return std::sqrt(static_cast<double>(m0)) * q;
}

/// k distinct indices out of n (partial Fisher-Yates), sorted.
inline std::vector<std::size_t> distinct(std::size_t n, std::size_t k, Rng& rng) {
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    for (std::size_t i = 0; i < k; ++i) std::swap(all[i], all[i + uniform_index(rng, n - i)]);
    all.resize(k);
    std::sort(all.begin(), all.end());
    return all;
}

inline std::vector<Point> atom_points(const std::vector<std::size_t>& idx) {
    std::vector<Point> out;
    for (std::size_t i : idx) out.push_back({static_cast<double>(i)});
    return out;
}

inline std::vector<Point> equispaced_torus(int m) {
    std::vector<Point> out;
    for (int j = 0; j < m; ++j) out.push_back({two_pi * j / m});
    return out;
}

inline std::vector<double> random_weights(std::size_t m, Rng& rng, double total = 1.0) {
    std::vector<double> w(m);
    double s = 0.0;
    for (double& x : w) s += (x = 0.05 + uniform01(rng));
    for (double& x : w) x *= total / s;
    return w;
}

inline std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) { return lo + uniform_index(rng, hi - lo + 1); }

template <class T>
inline T pick_from(const std::vector<T>& v, Rng& rng) {
    return v[uniform_index(rng, v.size())];
}

/// A random real system on a finite set: table entries N(0,1).
struct FiniteCase {
    Subspace space;
    DomainSpec domain;
    PointSet points;
    CMat table;
};

inline FiniteCase finite_case(std::size_t atoms, std::size_t n, std::size_t m, Rng& rng) {
    const CMat t = gaussian(static_cast<Eigen::Index>(atoms), static_cast<Eigen::Index>(n), rng);
    return FiniteCase{Subspace(FunctionSystem::discrete(t)), DomainSpec::finite_set(atoms),
                      PointSet(atom_points(distinct(atoms, m, rng))), t};
}

/// span element plus independent noise on every atom.
inline Function noisy_target(const FiniteCase& fc, const CVec& coef, double noise, Rng& rng) {
    std::vector<double> e(static_cast<std::size_t>(fc.table.rows()));
    for (double& x : e) x = noise * normal(rng);
    const CVec vals = fc.table * coef;
    return [vals, e](const Point& x) {
        const auto i = static_cast<std::size_t>(x[0]);
        return vals(static_cast<Eigen::Index>(i)) + e[i];
    };
}

inline CVec sparse_coef(std::size_t n, std::size_t v, Rng& rng) {
    CVec c = CVec::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t i : distinct(n, v, rng)) c(static_cast<Eigen::Index>(i)) = normal(rng) + (normal(rng) > 0 ? 1.0 : -1.0);
    return c;
}

inline std::vector<double> exponents(const Json& j) {
    std::vector<double> out;
    for (const Json& e : j) out.push_back(as_number(e));
    return out;
}

inline std::vector<int> ints(const Json& j) { return j.get<std::vector<int>>(); }

/// Theorem and corrected lines count against the verdict; proof steps are diagnostics.
inline void record(ExperimentReport& rep, const std::string& key, const RecoveryReport& r) {
    if (r.status == AuditStatus::not_applicable) {
        rep.check(key, AuditStatus::not_applicable);
        return;
    }
    for (const AuditLine& a : r.audits) {
        if (a.kind == "theorem" || a.kind == "hypothesis")
            rep.check(key, a.status, a.slack);
        else if (a.kind == "corrected")
            rep.check(key + " corrected", a.status, a.slack);
        else if (a.kind == "step")
            rep.diagnose(key + ": " + a.name, a.status, a.slack);
    }
}

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

inline void dft_exact(const Json& prm, std::uint64_t, ExperimentReport& rep) {
    Table& t = rep.table("dft", {"degree", "N", "m", "D_L", "D_R", "method"});
    for (int n : ints(prm["degrees"])) {
        const Subspace x = FunctionSystem::trig_degree(n);
        const int m = 2 * n + 1;
        const DiscReport r = disc_constants(x, DomainSpec::torus(1, std::max(64, 4 * m)), PointSet(equispaced_torus(m)),
                                            2.0, 2.0);
        t.add({n, m, m, num(r.D_L), num(r.D_R), r.method});
        for (const auto& [side, c] : {std::pair{"D_L", r.D_L}, std::pair{"D_R", r.D_R}}) {
            const double dev = std::abs(c.as_double() - 1.0);
            rep.check(std::string("equispaced ") + side + " = 1", status_of(dev <= 1e-9), 1e-9 - dev);
        }
    }
}

inline void oracle_agreement(const Json& prm, std::uint64_t seed, ExperimentReport& rep) {
    const std::size_t count = prm["instances"].get<std::size_t>();
    const std::size_t max_n = prm["max_N"].get<std::size_t>(), max_m = prm["max_m"].get<std::size_t>();
    Table& t = rep.table("instances", {"case", "system", "N", "m", "D_L_exact", "D_L_opt", "D_R_exact", "D_R_opt"});
    for (std::size_t i = 0; i < count; ++i) {
        Rng rng = make_rng(seed, i);
        const std::size_t n = pick(rng, 1, max_n), m = pick(rng, 1, max_m);
        std::optional<Subspace> x;
        DomainSpec dom;
        std::string kind;
        switch (i % 3) {
        case 0: {
            std::vector<std::vector<int>> q;
            for (std::size_t k : distinct(11, n, rng)) q.push_back({static_cast<int>(k) - 5});
            x = Subspace(FunctionSystem::trig(q));
            dom = DomainSpec::torus(1, 64);
            kind = "trig";
            break;
        }
        case 1: {
            x = Subspace(FunctionSystem::discrete(gaussian(24, static_cast<Eigen::Index>(n), rng)));
            dom = DomainSpec::finite_set(24);
            kind = "discrete";
            break;
        }
        default: {
            std::vector<double> a;
            for (std::size_t k = 0; k < std::min<std::size_t>(n, 4); ++k) a.push_back(0.4 * std::pow(0.6, k) * (0.8 + 0.2 * uniform01(rng)));
            x = Subspace(FunctionSystem::hat_family(a));
            dom = DomainSpec::interval(64);
            kind = "hat";
        }
        }
        Rng prng = make_rng(seed, count + i);
        const PointSet pts(draw_points(dom, m, prng));
        const DiscReport ex = disc_constants(*x, dom, pts, 2.0, 2.0);
        DiscOptions o;
        o.force_optimizer = true;
        o.seed = task_seed(seed, 2 * count + i);
        const DiscReport op = disc_constants(*x, dom, pts, 2.0, 2.0, o);
        t.add({i, kind, x->dim(), pts.m(), num(ex.D_L), num(op.D_L), num(ex.D_R), num(op.D_R)});
        const auto agree = [](const Constant& a, const Constant& b) {
            if (a.is_infinite() || b.is_infinite()) return std::pair{a.is_infinite() == b.is_infinite(), 0.0};
            const double rel = std::abs(a.value() - b.value()) / std::max(a.value(), 1e-300);
            return std::pair{rel <= 1e-6, 1e-6 - rel};
        };
        const auto [okL, sL] = agree(ex.D_L, op.D_L);
        const auto [okR, sR] = agree(ex.D_R, op.D_R);
        rep.check("optimizer = eigen D_L", status_of(okL), sL);
        rep.check("optimizer = eigen D_R", status_of(okR), sR);
        if (ex.D_L.is_finite()) {
            const double prod = ex.D_L.value() * ex.D_R.value();
            rep.check("D_L D_R >= 1", status_of(prod >= 1 - 1e-9), prod - (1 - 1e-9));
        } else {
            rep.check("D_L D_R >= 1", AuditStatus::not_applicable);
        }
    }
}

inline void ril1(const Json& prm, std::uint64_t seed, ExperimentReport& rep) {
    const std::size_t count = prm["instances"].get<std::size_t>();
    const auto ps = exponents(prm["p"]), qs = exponents(prm["q"]);
    Table& t = rep.table("ril1", {"case", "N", "m", "p", "q", "D", "M", "worst_slack"});
    for (std::size_t i = 0; i < count; ++i) {
        Rng rng = make_rng(seed, i);
        const double p = pick_from(ps, rng), q = pick_from(qs, rng);
        const std::size_t m = pick(rng, 1, 8);
        Subspace x = FunctionSystem::trig_degree(1);
        DomainSpec dom = DomainSpec::torus(1, 64);
        if (i % 2) {
            x = FunctionSystem::discrete(gaussian(16, static_cast<Eigen::Index>(pick(rng, 1, 4)), rng));
            dom = DomainSpec::finite_set(16);
        } else if (i % 4 == 2) {
            x = FunctionSystem::trig_degree(2);
        }
        const PointSet pts(draw_points(dom, m, rng), random_weights(m, rng, 0.5 + 2 * uniform01(rng)));
        const Ril1Audit a = ril1_audit(x, dom, pts, p, q, task_seed(seed, count + i));
        t.add({i, x.dim(), m, p, q, num(a.D), num(a.M), num(a.worst_slack)});
        rep.check("lambda_j christoffel^{q/2} <= (D M)^q", a.status, a.worst_slack);
    }
}

inline void khinchin(const Json& prm, std::uint64_t seed, ExperimentReport& rep) {
    const int max_n = prm["max_N"].get<int>();
    Table& t = rep.table("chain", {"N", "p", "m", "D1", "D2", "M", "average", "lower", "khinchin_rhs", "N^{p/2}",
                                   "m (K D1 D2 M)^p"});
    Table& o = rep.table("p4_moment", {"N", "enumerated", "3(sum a^2)^2 - 2 sum a^4", "abs_diff"});
    for (int n = 1; n <= max_n; ++n) {
        Rng rng = make_rng(seed, static_cast<std::uint64_t>(n));
        CVec a(n);
        for (int i = 0; i < n; ++i) a(i) = normal(rng);
        const double s2 = a.squaredNorm(), s4 = a.cwiseAbs2().cwiseAbs2().sum();
        const double e = rademacher_moment(a, 4.0), f = 3 * s2 * s2 - 2 * s4;
        o.add({n, e, f, std::abs(e - f)});
        rep.check("p=4 enumeration = 3(sum a^2)^2 - 2 sum a^4", status_of(std::abs(e - f) <= 1e-12 * s2 * s2),
                  1e-12 * s2 * s2 - std::abs(e - f));
        for (double p : exponents(prm["p"])) {
            const std::size_t k = static_cast<std::size_t>(2 * n + 6), m = static_cast<std::size_t>(n + 2);
            FiniteCase fc = finite_case(k, static_cast<std::size_t>(n), m, rng);
            fc.points.weights = random_weights(m, rng);
            const KhinchinAudit r = khinchin_audit(fc.space, fc.domain, fc.points, p, std::nullopt,
                                                   task_seed(seed, 100 + static_cast<std::uint64_t>(n)));
            t.add({n, p, m, r.D1, r.D2, r.M, r.average, r.lower, r.khinchin_rhs, r.final_lhs, r.final_rhs});
            rep.check("D1^{-p} N^{p/2} <= average", r.step_lower, relative_slack(r.lower, r.average));
            rep.check("average <= K_p^p sum lambda christoffel^{p/2}", r.step_khinchin,
                      relative_slack(r.average, r.khinchin_rhs));
            rep.check("N^{p/2} <= m (K_p D1 D2 M)^p", r.step_final, relative_slack(r.final_lhs, r.final_rhs));
        }
    }
}

inline void ric1_scaling(const Json& prm, std::uint64_t seed, ExperimentReport& rep) {
    const double p = as_number(prm["p"]), q = as_number(prm["q"]);
    Table& t = rep.table("scaling", {"N", "m", "D_R", "M", "christoffel/N", "N^{q/2}", "m (D_R M)^q"});
    std::uint64_t task = 0;
    for (int n : ints(prm["N"])) {
        std::vector<int> k;
        for (int i = 0; i < n; ++i) k.push_back(1 << i);
        const Subspace x = FunctionSystem::lacunary(k, 2.0);
        const DomainSpec dom = DomainSpec::torus(1, std::max(128, 8 << n));
        for (int mult : ints(prm["m_over_N"])) {
            Rng rng = make_rng(seed, task);
            const PointSet pts(draw_points(dom, static_cast<std::size_t>(mult * n), rng));
            const Rip1Audit a = rip1_audit(x, dom, pts, p, q, task_seed(seed, 1000 + task));
            ++task;
            t.add({n, pts.m(), a.D, a.M, a.c, a.lhs, a.rhs});
            rep.check("N^{q/2} <= m (D_R M)^q", a.status, relative_slack(a.lhs, a.rhs));
            rep.check("christoffel = N", status_of(std::abs(a.c - 1.0) <= 1e-9), 1e-9 - std::abs(a.c - 1.0));
        }
    }
}

inline void rip3_fa(const Json& prm, std::uint64_t seed, ExperimentReport& rep) {
    const double p = as_number(prm["p"]), q = as_number(prm["q"]);
    const std::size_t sets = prm["sets"].get<std::size_t>();
    Table& t = rep.table("rip3", {"k", "a", "m", "injective", "D_R", "bound"});
    std::uint64_t task = 0;
    for (int k : ints(prm["k"])) {
        const double a = std::ldexp(1.0, -k);
        for (std::size_t s = 0; s < sets; ++s) {
            Rng rng = make_rng(seed, task++);
            std::vector<Point> pts;
            const std::size_t m = pick(rng, 2, 10);
            // points inside the support of f_a so that most sets are injective
            const std::size_t inside = pick(rng, 1, std::min<std::size_t>(m, 3));
            for (std::size_t j = 0; j < m; ++j)
                pts.push_back({j < inside ? 2 * a * uniform01(rng) : uniform01(rng)});
            const Rip3Audit r = rip3_audit(a, p, q, PointSet(pts), prm["grid"].get<int>(), task_seed(seed, 1000 + task));
            t.add({k, a, r.m, r.injective, r.D_R, r.bound});
            rep.check("m >= D^{-q} (2a)^{-q/p}", r.status, relative_slack(r.bound, static_cast<double>(r.m)));
        }
    }
}

inline void remlosi(const Json& prm, std::uint64_t seed, ExperimentReport& rep) {
    const int n = prm["N"].get<int>();
    const double p = as_number(prm["p"]), q = as_number(prm["q"]);
    std::vector<int> k;
    for (int i = 0; i < n; ++i) k.push_back(1 << i);
    const Subspace x = FunctionSystem::lacunary(k, 2.0);
    const DomainSpec dom = DomainSpec::torus(1, std::max(128, 8 << n));
    Table& t = rep.table("remlosi", {"m", "m/N", "D_L(2,2)", "M", "D_L(p,q)", "M D_L(2,2)"});
    std::uint64_t task = 0;
    for (int mult : ints(prm["m_over_N"])) {
        Rng rng = make_rng(seed, task);
        const PointSet pts(draw_points(dom, static_cast<std::size_t>(mult * n), rng));
        const RemLosiAudit a = remlosi_audit(x, dom, pts, p, q, task_seed(seed, 1000 + task));
        ++task;
        const double bound = a.M * a.D_L_22.as_double();
        t.add({pts.m(), mult, num(a.D_L_22), a.M, num(a.D_L_pq), num(bound)});
        rep.check("D_L(p,q) <= M D_L(2,2)", a.status,
                  a.status == AuditStatus::not_applicable ? std::numeric_limits<double>::quiet_NaN()
                                                          : relative_slack(a.D_L_pq.as_double(), bound));
        rep.check("finite D_L at m = O(N)", status_of(a.D_L_pq.is_finite()));
    }
}

inline void wrdi_comment(const Json& prm, std::uint64_t seed, ExperimentReport& rep) {
    const std::size_t count = prm["instances"].get<std::size_t>();
    const double p = as_number(prm["p"]);
    const auto rs = exponents(prm["r"]);
    Table& t = rep.table("transfer", {"case", "r", "D_r", "D", "M", "D M"});
    for (std::size_t i = 0; i < count; ++i) {
        Rng rng = make_rng(seed, i);
        const Subspace x = FunctionSystem::trig_degree(static_cast<int>(pick(rng, 1, 2)));
        const DomainSpec dom = DomainSpec::torus(1, 64);
        const std::size_t m = pick(rng, 2, 8);
        const PointSet pts(draw_points(dom, m, rng), random_weights(m, rng));
        const double r = pick_from(rs, rng);
        const WrdiAudit a = wrdi_transfer_audit(x, dom, pts, p, r, task_seed(seed, count + i));
        t.add({i, r, a.D_r, a.D, a.M, a.transfer});
        rep.check("WRDI(r) <= D M", a.status, relative_slack(a.D_r, a.transfer));
    }
}

inline void ap4_equalize(const Json& prm, std::uint64_t seed, ExperimentReport& rep) {
    const std::size_t count = prm["instances"].get<std::size_t>();
    const auto qs = exponents(prm["q"]);
    Table& t = rep.table("equalize", {"case", "m", "C", "q", "m0", "(C^2+1) m", "D_weighted", "D_equal", "bound"});
    for (std::size_t i = 0; i < count; ++i) {
        Rng rng = make_rng(seed, i);
        const double q = pick_from(qs, rng);
        const std::size_t m = pick(rng, 2, 8);
        Subspace x = FunctionSystem::trig_degree(1);
        DomainSpec dom = DomainSpec::torus(1, 64);
        if (i % 2) {
            x = FunctionSystem::discrete(gaussian(16, static_cast<Eigen::Index>(pick(rng, 1, 3)), rng));
            dom = DomainSpec::finite_set(16);
        }
        const double total = 0.3 + 2.0 * uniform01(rng);
        const PointSet pts(draw_points(dom, m, rng), random_weights(m, rng, total));
        const double C = total * (1.0 + 2.0 * uniform01(rng));
        const EqualizeAudit a = equalize_audit(x, dom, pts, q, q, C, task_seed(seed, count + i));
        const double cap = (C * C + 1) * static_cast<double>(m);
        t.add({i, m, C, q, a.result.m0, cap, num(a.D_weighted), num(a.D_equal), num(a.bound)});
        rep.check("m0 <= (C^2+1) m", status_of(a.size_ok), relative_slack(static_cast<double>(a.result.m0), cap));
        if (a.D_weighted.is_infinite())
            rep.check("D_equal <= D ((C^2+1)/C)^{1/q}", AuditStatus::not_applicable);
        else
            rep.check("D_equal <= D ((C^2+1)/C)^{1/q}", a.status, a.bound + 1e-9 - a.D_equal.as_double());
    }
}

inline void weight_budget(const Json& prm, std::uint64_t seed, ExperimentReport& rep) {
    const std::size_t count = prm["instances"].get<std::size_t>();
    Table& t = rep.table("budget", {"case", "N", "dim X+1", "m", "sum lambda", "D2^q", "D1", "D2"});
    for (std::size_t i = 0; i < count; ++i) {
        Rng rng = make_rng(seed, i);
        const std::size_t n = pick(rng, 1, 4), k = 24;
        const Subspace x = FunctionSystem::discrete(gaussian(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n), rng));
        const DomainSpec dom = DomainSpec::finite_set(k);
        // The discretizer: Kiefer-Wolfowitz masses on all atoms with a 2x weight inflation,
        // reporting its constants measured on X' with a safety margin.
        const double inflate = 0.5 + 1.5 * uniform01(rng);
        const WeightedDiscretizer disc = [&](const Subspace& xp) {
            const DesignMeasure dm = kw_design(xp, sup_grid(dom), 1e-3);
            std::vector<Point> pts;
            std::vector<double> w;
            for (std::size_t a = 0; a < dm.points.size(); ++a)
                if (dm.masses[a] > 1e-12) {
                    pts.push_back(dm.points[a]);
                    w.push_back(inflate * dm.masses[a]);
                }
            WeightedDiscretization wd;
            wd.points = PointSet(pts, w);
            DiscOptions o;
            o.weighted = true;
            const DiscReport r = disc_constants(xp, dom, wd.points, 2.0, 2.0, o);
            wd.D1 = r.D_L.as_double() * 1.01;
            wd.D2 = r.D_R.value() * 1.01;
            return wd;
        };
        try {
            const BudgetResult b = weight_budget_trick(x, dom, disc, task_seed(seed, count + i));
            t.add({i, n, b.augmented_dim, b.points.m(), b.weight_sum, b.budget, b.D1_measured, b.D2_measured});
            rep.check("sum lambda <= D2^q", within_status(b.weight_sum, b.budget), relative_slack(b.weight_sum, b.budget));
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::premise_failed) throw;
            t.add({i, n, nullptr, nullptr, nullptr, nullptr, nullptr, nullptr});
            rep.check("sum lambda <= D2^q", AuditStatus::not_applicable);
        }
    }
}

inline void ldi_search(const Json& prm, std::uint64_t seed, ExperimentReport& rep) {
    const double ratio = prm["m_over_N"].get<double>();
    const int restarts = prm["restarts"].get<int>();
    Table& t = rep.table("search", {"N", "m", "p", "D_L searched", "KW weighted D_L", "m0 equalized", "D_L equalized",
                                    "equalizer bound"});
    std::uint64_t task = 0;
    for (int n : ints(prm["N"])) {
        for (double p : exponents(prm["p"])) {
            Rng rng = make_rng(seed, task);
            const std::size_t k = 32;
            const Subspace x = FunctionSystem::discrete(gaussian(static_cast<Eigen::Index>(k), n, rng));
            const DomainSpec dom = DomainSpec::finite_set(k);
            const std::size_t m = static_cast<std::size_t>(std::ceil(ratio * n * (p == 2.0 ? 1 : n)));
            const LdiSearchResult s = search_ldi_points(x, dom, std::min(m, k), p, p, restarts, task_seed(seed, 100 + task));
            // p = 2 route through weights: KW masses give a WLDI, the equalizer turns it into an LDI.
            const DesignMeasure dm = kw_design(x, sup_grid(dom), 1e-3);
            std::vector<Point> pts;
            std::vector<double> w;
            for (std::size_t a = 0; a < dm.points.size(); ++a)
                if (dm.masses[a] > 1e-9) {
                    pts.push_back(dm.points[a]);
                    w.push_back(dm.masses[a]);
                }
            double tot = 0.0;
            for (double v : w) tot += v;
            const EqualizeAudit eq = equalize_audit(x, dom, PointSet(pts, w), p, p, tot, task_seed(seed, 200 + task));
            ++task;
            t.add({n, s.points.m(), p, num(s.D_L), num(eq.D_weighted), eq.result.m0, num(eq.D_equal), num(eq.bound)});
            rep.check("searched set has finite D_L", status_of(s.D_L.is_finite()));
            rep.check("KW weights + equalizer", eq.status,
                      eq.D_weighted.is_finite() ? eq.bound + 1e-9 - eq.D_equal.as_double()
                                                : std::numeric_limits<double>::quiet_NaN());
        }
    }
}

inline void iid_sampling(const Json& prm, std::uint64_t seed, ExperimentReport& rep) {
    const double eps = prm["eps"].get<double>();
    Table& t = rep.table("iid", {"degree", "p", "rounds", "m", "lower", "upper", "certified"});
    std::uint64_t task = 0;
    for (int n : ints(prm["degrees"]))
        for (double p : exponents(prm["p"])) {
            const IidResult r =
                iid_points_verified(FunctionSystem::trig_degree(n), DomainSpec::torus(1, 64), p, eps, task_seed(seed, task++));
            t.add({n, p, r.rounds, r.points.m(), r.lower, r.upper, r.certified});
            rep.check("two-sided bound certified", status_of(r.certified),
                      std::min(r.lower - (1 - eps), (1 + eps) - r.upper));
        }
}

inline void matrix_suite(const Json& prm, std::uint64_t seed, ExperimentReport& rep) {
    const std::size_t count = prm["instances"].get<std::size_t>();
    const std::size_t m0 = prm["m0"].get<std::size_t>();
    Table& t = rep.table("matrices", {"case", "N", "m", "rows", "RDI (2,2) eigen", "RDI svd", "LDI (2,2) eigen", "LDI svd"});
    Table& c = rep.table("norms", {"case", "r", "p", "||A1||^p", "D^p (m/m0) ||A||^p"});
    for (std::size_t i = 0; i < count; ++i) {
        Rng rng = make_rng(seed, i);
        const std::size_t n = pick(rng, 1, 3);
        // design matrix of a random system over all atoms of a uniform finite set
        const Subspace x = FunctionSystem::discrete(gaussian(static_cast<Eigen::Index>(m0), static_cast<Eigen::Index>(n), rng));
        const DomainSpec dom = DomainSpec::finite_set(m0);
        const DesignMatrix d = build_design(x, PointSet(sup_grid(dom)), BasisKind::orthonormal, dom);
        rep.check("design columns orthonormal in L2^{m0}", status_of(columns_orthonormal(d.A, 1e-9)));
        const std::size_t m = pick(rng, n, 2 * n + 1);
        const RowSelection sel = select_rdi_rows(d.A, m);
        const PointwiseResult rdi = pointwise_check(d.A, sel.rows, Side::rdi, 2.0, sel.rdi_constant);
        const PointwiseResult ldi = pointwise_check(d.A, sel.rows, Side::ldi, 2.0, 0.0);
        const CMat a1 = submatrix_rows(d.A, sel.rows);
        Eigen::JacobiSVD<CMat> svd(a1);
        const double smin = svd.singularValues()(svd.singularValues().size() - 1);
        const double ldi_svd = smin > 0 ? std::sqrt(static_cast<double>(m)) / smin : std::numeric_limits<double>::infinity();
        std::string rows;
        for (std::size_t r : sel.rows) rows += (rows.empty() ? "" : " ") + std::to_string(r);
        t.add({i, n, m, rows, num(rdi.measured), num(sel.rdi_constant), num(ldi.measured), num(ldi_svd)});
        rep.check("RDI pointwise = ||A1||/sqrt(m)", status_of(std::abs(rdi.measured - sel.rdi_constant) <= 1e-9 * sel.rdi_constant));
        if (std::isinf(ldi_svd))
            rep.check("LDI pointwise = sqrt(m)/s_min(A1)", status_of(std::isinf(ldi.measured)));
        else
            rep.check("LDI pointwise = sqrt(m)/s_min(A1)", status_of(std::abs(ldi.measured - ldi_svd) <= 1e-8 * ldi_svd));
        for (const Json& rp : prm["norm_pairs"]) {
            const double r = as_number(rp[0]), p = as_number(rp[1]);
            const MatrixNormCorollary mc = matrix_norms_corollary(d.A, sel.rows, r, p, task_seed(seed, count + i));
            c.add({i, r, p, mc.lhs, num(mc.rhs)});
            rep.check("||A1||_(r,p)^p <= D^p (m/m0) ||A||_(r,p)^p", mc.status, relative_slack(mc.lhs, mc.rhs));
        }
    }
}

inline void lunin_bench(const Json& prm, std::uint64_t seed, ExperimentReport& rep) {
    const std::size_t count = prm["instances"].get<std::size_t>();
    const std::size_t max_m0 = prm["max_m0"].get<std::size_t>(), max_n = prm["max_N"].get<std::size_t>();
    Table& t = rep.table("instances", {"case", "m0", "N", "greedy", "exhaustive", "ratio", "rdi_constant"});
    std::vector<double> ratios;
    for (std::size_t i = 0; i < count; ++i) {
        Rng rng = make_rng(seed, i);
        const std::size_t n = pick(rng, 1, max_n), m0 = pick(rng, n + 1, max_m0);
        const CMat a = orthonormal_columns(static_cast<Eigen::Index>(m0), static_cast<Eigen::Index>(n), rng);
        const RowSelection g = select_rdi_rows(a, n, SelectMethod::greedy);
        const RowSelection e = select_rdi_rows(a, n, SelectMethod::exhaustive);
        const double ratio = g.achieved_norm / e.achieved_norm;
        ratios.push_back(ratio);
        t.add({i, m0, n, g.achieved_norm, e.achieved_norm, ratio, g.rdi_constant});
        rep.check("exhaustive <= greedy", within_status(e.achieved_norm, g.achieved_norm),
                  relative_slack(e.achieved_norm, g.achieved_norm));
    }
    Table& h = rep.table("ratio_distribution", {"upper", "count"});
    for (double ub : {1.0 + 1e-12, 1.1, 1.25, 1.5, 2.0, 3.0, std::numeric_limits<double>::infinity()}) {
        std::size_t c = 0;
        for (double r : ratios) c += r <= ub;
        h.add({num(ub), c});
    }
    std::size_t ok = 0;
    for (double r : ratios) ok += r <= 2.0;
    const double frac = ratios.empty() ? 1.0 : static_cast<double>(ok) / static_cast<double>(ratios.size());
    rep.summary["greedy_within_2_fraction"] = frac;
    rep.check("greedy within factor 2 on >= 95%", status_of(frac >= 0.95), frac - 0.95);

    Table& ev = rep.table("even_q", {"N", "p", "m", "claimed", "measured"});
    for (int n = 1; n <= prm["even_q_max_N"].get<int>(); ++n) {
        Rng rng = make_rng(seed, count + static_cast<std::uint64_t>(n));
        const CMat a = orthonormal_columns(12, n, rng);
        const EvenQResult r = even_q_rdi(a, 4, SelectMethod::greedy, task_seed(seed, 2 * count + n));
        ev.add({n, 4, r.m, r.claimed, r.measured});
        rep.check("RD(N^{p/2}, p, D^{2/p})", r.status, relative_slack(r.measured, r.claimed));
        rep.check("m <= N^{p/2}", status_of(r.m <= static_cast<std::size_t>(n * n)));
    }
}

inline void kw_chain(const Json& prm, std::uint64_t seed, ExperimentReport& rep) {
    const double eps = prm["eps"].get<double>();
    const int n = prm["N"].get<int>();
    const std::size_t grid = prm["grid"].get<std::size_t>();
    Table& t = rep.table("kw", {"system", "N", "iterations", "max christoffel", "M", "m", "D22", "D_inf_2", "D_inf_inf",
                                "C = D_inf_2/sqrt(N)"});
    const auto run = [&](const std::string& name, const Subspace& x, const DomainSpec& dom, std::uint64_t task) {
        const KwChainResult k = kw_chain_audit(x, dom, sup_grid(dom, &x.system()), 0, eps, prm["restarts"].get<int>(),
                                               task_seed(seed, task));
        const auto& c = k.report.constants;
        const auto get = [&](const char* key) { return c.count(key) ? num(c.at(key)) : Json(nullptr); };
        t.add({name, x.dim(), k.design.iterations, k.design.max_christoffel, get("M"), k.points.m(), get("D22"),
               get("D_inf_2"), get("D_inf_inf"), get("C")});
        rep.check("KW converged", status_of(k.design.converged));
        const double cert = c.count("M") ? c.at("M") : std::numeric_limits<double>::infinity();
        const double claim = std::sqrt(static_cast<double>(x.dim())) * (1 + eps);
        rep.check("NI(2,inf) certificate <= sqrt(N)(1+eps)", within_status(cert, claim), relative_slack(cert, claim));
        rep.check("KW log det monotone", status_of(k.design.logdet_monotone));
        rep.check("m <= 2N", status_of(k.points.m() <= static_cast<std::size_t>(2 * x.dim())));
        record(rep, "L_inf chain", k.report);
    };
    Rng rng = make_rng(seed, 0);
    run("random discrete", FunctionSystem::discrete(gaussian(static_cast<Eigen::Index>(grid), n, rng)),
        DomainSpec::finite_set(grid), 1);
    run("trig degree 2", FunctionSystem::trig_degree(2), DomainSpec::torus(1, 64), 2);
    run("hat family", FunctionSystem::hat_family({0.4, 0.2, 0.1}), DomainSpec::interval(64), 3);
}

inline void trd_chain(const Json& prm, std::uint64_t seed, ExperimentReport& rep) {
    Table& t = rep.table("chain", {"Q", "|Q|", "points", "m", "M", "D22", "D_inf_2", "D_inf_inf"});
    std::uint64_t task = 0;
    const auto run = [&](const std::string& qname, const Subspace& x, const DomainSpec& dom, const PointSet& pts,
                         const std::string& how) {
        const double nq = static_cast<double>(x.dim());
        const RecoveryReport r = chain_audit(x, dom, pts, std::sqrt(nq), task_seed(seed, 1000 + task));
        const auto get = [&](const char* key) { return r.constants.count(key) ? num(r.constants.at(key)) : Json(nullptr); };
        t.add({qname, x.dim(), how, pts.m(), get("M"), get("D22"), get("D_inf_2"), get("D_inf_inf")});
        record(rep, "||f||_inf <= |Q|^{1/2} D22 disc_2 <= |Q|^{1/2} D22 max", r);
    };
    for (int n : ints(prm["degrees"])) {
        const Subspace x = FunctionSystem::trig_degree(n);
        const DomainSpec dom = DomainSpec::torus(1, 64);
        run("{-" + std::to_string(n) + ".." + std::to_string(n) + "}", x, dom, PointSet(equispaced_torus(2 * n + 1)),
            "equispaced");
        Rng rng = make_rng(seed, task++);
        run("{-" + std::to_string(n) + ".." + std::to_string(n) + "}", x, dom,
            PointSet(draw_points(dom, static_cast<std::size_t>(prm["m_over_Q"].get<int>() * (2 * n + 1)), rng)), "random");
    }
    // a two-dimensional Q
    std::vector<std::vector<int>> q;
    for (int a = -1; a <= 1; ++a)
        for (int b = -1; b <= 1; ++b)
            if (std::abs(a) + std::abs(b) <= 1) q.push_back({a, b});
    const Subspace x2 = FunctionSystem::trig(q);
    const DomainSpec d2 = DomainSpec::torus(2, 24);
    Rng rng = make_rng(seed, task++);
    run("l1 ball radius 1 in Z^2", x2, d2, PointSet(draw_points(d2, static_cast<std::size_t>(prm["m_over_Q"].get<int>()) * q.size(), rng)),
        "random");
}

inline void recovery_suite(const Json& prm, std::uint64_t seed, ExperimentReport& rep) {
    const std::size_t count = prm["instances"].get<std::size_t>();
    const auto ps = exponents(prm["p"]);
    Table& t = rep.table("audits", {"theorem", "case", "N", "m", "p", "v", "status", "theorem_min_slack", "Lp error"});
    std::uint64_t task = 0;
    for (const Json& jt : prm["theorems"]) {
        const std::string name = jt.get<std::string>();
        Theorem th{};
        bool found = false;
        for (Theorem c : {Theorem::BT1, Theorem::BT1a, Theorem::BT2, Theorem::BT3, Theorem::BT4, Theorem::ubT3,
                          Theorem::ubT5, Theorem::ubT6})
            if (name == to_string(c)) {
                th = c;
                found = true;
            }
        require(found, ErrorKind::invalid_parameters, "unknown theorem " + name);
        const bool existence = th == Theorem::BT3 || th == Theorem::BT4;
        const bool universal = th == Theorem::ubT3 || th == Theorem::ubT5 || th == Theorem::ubT6;
        const std::size_t n_cases = existence ? prm["existence_instances"].get<std::size_t>() : count;
        for (std::size_t i = 0; i < n_cases; ++i) {
            Rng rng = make_rng(seed, task++);
            const std::size_t n = pick(rng, 2, universal ? 5 : 4);
            const std::size_t v = universal ? pick(rng, 1, th == Theorem::ubT3 ? n - 1 : n / 2) : 1;
            const std::size_t m = pick(rng, n + 1, 2 * n + 4);
            const std::size_t k = pick(rng, 2 * n + 8, 40);
            FiniteCase fc = finite_case(k, n, m, rng);
            double p = pick_from(ps, rng);
            if (th == Theorem::BT1 && uniform01(rng) < 0.5) fc.points.weights = random_weights(m, rng, 0.5 + uniform01(rng));
            if (th == Theorem::BT1 && uniform01(rng) < 0.2) p = std::numeric_limits<double>::infinity();
            std::vector<Function> targets;
            const std::size_t n_t = th == Theorem::ubT6 ? 3 : 1;
            for (std::size_t j = 0; j < n_t; ++j)
                targets.push_back(noisy_target(fc, universal ? sparse_coef(n, v, rng) : gaussian(n, 1, rng).col(0),
                                               std::pow(10.0, -2.0 + 2.0 * uniform01(rng)), rng));
            AuditInstance inst{fc.space, fc.domain, fc.points, targets, p, v};
            inst.seed = task_seed(seed, 100000 + task);
            inst.id = name + "#" + std::to_string(i);
            if (existence) {
                inst.search_m = pick(rng, n, 2 * n);
                inst.search_restarts = 2;
            }
            const RecoveryReport r = lebesgue_audit(th, inst);
            const double ms = r.min_slack();
            t.add({name, i, n, existence ? inst.search_m : m, num(p), v, to_string(r.status), num(ms),
                   r.errors.count("Lp") ? num(r.errors.at("Lp")) : Json(nullptr)});
            record(rep, name, r);
        }
    }
}

inline void sparse_reproduction(const Json& prm, std::uint64_t seed, ExperimentReport& rep) {
    const std::size_t count = prm["instances"].get<std::size_t>();
    const double p = as_number(prm["p"]);
    Table& t = rep.table("cases", {"case", "N", "v", "m", "universal D (X_2v)", "exact error", "noisy error",
                                   "(2D+1) sigma_inf"});
    for (std::size_t i = 0; i < count; ++i) {
        Rng rng = make_rng(seed, i);
        const std::size_t n = pick(rng, 4, prm["max_N"].get<std::size_t>());
        const std::size_t v = pick(rng, 1, prm["max_v"].get<std::size_t>());
        const std::size_t k = 40, m = pick(rng, 2 * v + 2, 20);
        const FiniteCase fc = finite_case(k, n, m, rng);
        const CollectionSpec col2{fc.space, 2 * v};
        const UniversalReport u = universal_ldi_constant(col2, fc.domain, fc.points, p, p, task_seed(seed, count + i));
        if (u.value.is_infinite()) {
            t.add({i, n, v, m, "inf", nullptr, nullptr, nullptr});
            rep.check("exact v-sparse reproduction", AuditStatus::not_applicable);
            continue;
        }
        const CVec c = sparse_coef(n, v, rng);
        const RecoveryReport exact =
            recover_universal(RecoveryInput(span_function(fc.space, c)), fc.space, v, fc.points, p, Variant::lp_s, fc.domain);
        const double err = exact.errors.at("Lp");
        rep.check("exact v-sparse reproduction", status_of(err <= 1e-8), 1e-8 - err);
        // noisy target: the sample-only bound with universal LDI(p,p) on X_2v
        const Function f = noisy_target(fc, c, 0.05, rng);
        const RecoveryReport noisy = recover_universal(RecoveryInput(f), fc.space, v, fc.points, p, Variant::lp_s, fc.domain);
        NormSpec sup;
        sup.p = std::numeric_limits<double>::infinity();
        sup.extra_sup = fc.points.points;
        const double sig = sigma_v(f, fc.space, v, sup, fc.domain).value;
        const double bound = (2 * u.value.value() + 1) * sig;
        t.add({i, n, v, m, u.value.value(), err, noisy.errors.at("Lp"), bound});
        rep.check("lp^s error <= (2D+1) sigma_v(f)_inf (LDI(p,p))", status_of(noisy.errors.at("Lp") <= bound + audit_tolerance),
                  bound - noisy.errors.at("Lp"));
        // lp over X_v with universal LDI(p,p) on X_v
        const UniversalReport u1 = universal_ldi_constant(CollectionSpec{fc.space, v}, fc.domain, fc.points, p, p,
                                                          task_seed(seed, 2 * count + i));
        const RecoveryReport lp = recover_universal(RecoveryInput(f), fc.space, v, fc.points, p, Variant::lp, fc.domain);
        const double b1 = (2 * u1.value.as_double() + 1) * sig;
        rep.check("lp error <= (2D+1) sigma_v(f)_inf (LDI(p,p))", status_of(lp.errors.at("Lp") <= b1 + audit_tolerance),
                  b1 - lp.errors.at("Lp"));
    }
}

}  // namespace harness

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

/// Items of the paper map that must be exercised by at least one experiment.
inline const std::vector<std::string>& in_scope_items() {
    static const std::vector<std::string> items{
        "norms", "sampling_vector", "LDI", "RDI", "WLDI", "WRDI", "NI",
        "RIL1", "RIP1", "RIC1", "RemLosi", "RIP2", "RIP3", "f_a", "WRDI_comment",
        "weight_budget", "AP4", "AP6", "ldi_2_2",
        "iid_sampling", "design_matrix", "matrix_LDI", "matrix_RDI", "Lunin", "Lunin_even_q", "opnorm_rp",
        "ineq_for_matrix_norms",
        "d_fX", "A1", "A2", "alg_lpw", "alg_linf", "BT1", "BT1a", "BT2", "BT3", "BT4", "KW", "TrD", "TrDi",
        "BP1", "BP1a", "BP1b", "LDI_infty",
        "Sigma_v", "sigma_v", "alg_lp", "alg_lp_s", "alg_lp_inf", "ID1a", "UDD1", "ubT3a", "ubT5a", "ubT3", "ubT5",
        "ubT6"};
    return items;
}

inline const std::vector<Experiment>& registry() {
    using namespace harness;
    static const std::vector<Experiment> r{
        {"dft_exact", "equispaced trig points: D_L = D_R = 1 from the eigen oracle",
         {"norms", "sampling_vector", "LDI", "RDI"}, Json{{"degrees", {1, 4, 8}}}, dft_exact},
        {"oracle_agreement", "optimizer vs generalized eigenvalues at p = q = 2, and D_L D_R >= 1",
         {"LDI", "RDI", "norms"}, Json{{"instances", 200}, {"max_N", 6}, {"max_m", 12}}, oracle_agreement},
        {"ril1", "weighted RDI pointwise bound lambda_j christoffel^{q/2} <= (D M)^q", {"RIL1", "WRDI", "NI"},
         Json{{"instances", 100}, {"p", {3, 4}}, {"q", {1, 2, 3}}}, ril1},
        {"khinchin", "Rademacher-average chain with exact sign enumeration", {"RIP2", "WLDI", "WRDI"},
         Json{{"max_N", 10}, {"p", {2, 4, 6}}}, khinchin},
        {"ric1_scaling", "lacunary frequencies 2^i: N^{q/2} <= m (D_R M)^q", {"RIP1", "RIC1", "NI"},
         Json{{"N", {2, 3, 4, 5, 6}}, {"p", 4}, {"q", 4}, {"m_over_N", {1, 2, 4}}}, ric1_scaling},
        {"rip3_fa", "span{f_a, f_{a/2}}: m >= D^{-q} (2a)^{-q/p} on injective sets", {"RIP3", "f_a"},
         Json{{"k", {3, 4, 5, 6, 7, 8}}, {"p", 2}, {"q", 2}, {"sets", 6}, {"grid", 256}}, rip3_fa},
        {"remlosi", "LDI(p,q) at m = O(N) through LDI(2,2) and NI(2,p)", {"RemLosi", "NI", "ldi_2_2"},
         Json{{"N", 4}, {"p", 4}, {"q", 4}, {"m_over_N", {2, 4, 8}}}, remlosi},
        {"wrdi_transfer", "NI(2,p) and WRDI(p) give WRDI(r), 2 <= r < p", {"WRDI_comment", "WRDI"},
         Json{{"instances", 20}, {"p", 4}, {"r", {2, 3}}}, wrdi_comment},
        {"ap4_equalize", "replication of weighted points into an unweighted LDI", {"AP4", "WLDI"},
         Json{{"instances", 100}, {"q", {1, 2, 3}}}, ap4_equalize},
        {"weight_budget", "discretizing X + span{1} bounds the weight sum by D2^q", {"weight_budget"},
         Json{{"instances", 10}}, weight_budget},
        {"ldi_search", "LDI point sets found by verified search, and the KW-weights + equalizer route",
         {"AP6", "ldi_2_2", "AP4"}, Json{{"N", {2, 3, 4}}, {"p", {2}}, {"m_over_N", 2.0}, {"restarts", 3}}, ldi_search},
        {"iid_sampling", "i.i.d. points doubling until a two-sided bound is certified", {"iid_sampling"},
         Json{{"degrees", {1, 2, 3}}, {"p", {2}}, {"eps", 0.5}}, iid_sampling},
        {"matrix_suite", "design matrices, pointwise estimates and the (r,p)-norm corollary",
         {"design_matrix", "matrix_LDI", "matrix_RDI", "opnorm_rp", "ineq_for_matrix_norms"},
         Json{{"instances", 10}, {"m0", 10}, {"norm_pairs", {{2, 2}, {1, 3}, {1.5, 2.5}, {2, 1}}}}, matrix_suite},
        {"lunin_bench", "greedy vs exhaustive N-row selection, and the even-p product corollary",
         {"Lunin", "Lunin_even_q"}, Json{{"instances", 100}, {"max_m0", 12}, {"max_N", 4}, {"even_q_max_N", 3}},
         lunin_bench},
        {"kw_chain", "Kiefer-Wolfowitz measure, m <= 2N points and the L_inf chain",
         {"KW", "BP1", "BP1a", "BP1b", "LDI_infty"},
         Json{{"N", 6}, {"grid", 1024}, {"eps", 1e-3}, {"restarts", 2}}, kw_chain},
        {"trd_chain", "trig spaces: ||f||_inf <= |Q|^{1/2} D22 max |f(xi^j)|", {"TrD", "TrDi", "NI"},
         Json{{"degrees", {1, 2, 3}}, {"m_over_Q", 2}}, trd_chain},
        {"recovery_suite", "Lebesgue-type inequality audits on random instances",
         {"d_fX", "A1", "A2", "alg_lpw", "alg_linf", "BT1", "BT1a", "BT2", "BT3", "BT4", "Sigma_v", "sigma_v",
          "alg_lp", "alg_lp_s", "alg_lp_inf", "ID1a", "UDD1", "ubT3", "ubT5", "ubT6"},
         Json{{"instances", 50},
              {"existence_instances", 5},
              {"p", {1, 1.5, 2, 3}},
              {"theorems", {"BT1", "BT1a", "BT2", "BT3", "BT4", "ubT3", "ubT5", "ubT6"}}},
         recovery_suite},
        {"sparse_reproduction", "exact recovery of v-sparse targets and the LDI(p,p) sample-only bounds",
         {"Sigma_v", "sigma_v", "alg_lp", "alg_lp_s", "ID1a", "UDD1", "ubT3a", "ubT5a"},
         Json{{"instances", 50}, {"max_N", 12}, {"max_v", 2}, {"p", 2}}, sparse_reproduction},
    };
    return r;
}

inline const Experiment& find_experiment(const std::string& name) {
    for (const Experiment& e : registry())
        if (e.name == name) return e;
    fail(ErrorKind::invalid_parameters, "unknown experiment \"" + name + "\"");
}

/// defaults overlaid with the given params; unknown keys are rejected.
inline Json resolve_config(const Experiment& e, const ExperimentConfig& cfg) {
    Json params = e.defaults;
    require(cfg.params.is_object() || cfg.params.is_null(), ErrorKind::invalid_parameters, "params must be an object");
    if (cfg.params.is_object())
        for (const auto& [k, v] : cfg.params.items()) {
            require(params.contains(k), ErrorKind::invalid_parameters, "unknown parameter \"" + k + "\" for " + e.name);
            params[k] = v;
        }
    Json out;
    out["experiment"] = e.name;
    out["params"] = params;
    out["seed"] = cfg.seed;
    out["seed_scheme"] = seed_scheme;
    out["schema"] = schema_version;
    return out;
}

inline ExperimentReport run_experiment(const std::string& name, const ExperimentConfig& cfg = {}) {
    const Experiment& e = find_experiment(name);
    ExperimentReport rep;
    rep.experiment = name;
    rep.config = resolve_config(e, cfg);
    const auto t0 = std::chrono::steady_clock::now();
    try {
        e.body(rep.config["params"], cfg.seed, rep);
    } catch (const Json::exception& ex) {
        fail(ErrorKind::invalid_parameters, std::string("bad parameter: ") + ex.what());
    }
    rep.wall_clock = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

}  // namespace sdisc
