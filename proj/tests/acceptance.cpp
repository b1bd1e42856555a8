// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include "sdisc/sdisc.hpp"

using namespace sdisc;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

// Default-size runs are shared between criteria and reused for the determinism rerun.
std::map<std::string, std::string> first_runs;

ExperimentReport run_default(const std::string& name, std::uint64_t seed = 0) {
    ExperimentReport r = run_experiment(name, ExperimentConfig{name, Json::object(), seed});
    if (seed == 0) first_runs.emplace(name, r.to_json().dump());
    return r;
}

const Table& table(const ExperimentReport& r, const std::string& name) {
    for (const Table& t : r.tables)
        if (t.name == name) return t;
    throw Error(ErrorKind::invalid_parameters, "no table " + name);
}

std::vector<double> column(const Table& t, const std::string& col) {
    std::size_t k = 0;
    while (k < t.columns.size() && t.columns[k] != col) ++k;
    require(k < t.columns.size(), ErrorKind::invalid_parameters, "no column " + col);
    std::vector<double> out;
    for (const auto& row : t.rows) out.push_back(row[k].is_null() ? std::nan("") : as_number(row[k]));
    return out;
}

std::size_t violated(const ExperimentReport& r) { return r.violations(); }

std::size_t holds(const ExperimentReport& r, const std::string& key) {
    const auto it = r.verdicts.find(key);
    return it == r.verdicts.end() ? 0 : it->second.holds;
}

std::string fmt(double x) {
    std::ostringstream s;
    s.precision(6);
    s << x;
    return s.str();
}

double rel_diff(double a, double b) {
    if (std::isinf(a) || std::isinf(b)) return a == b ? 0.0 : std::numeric_limits<double>::infinity();
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

// 1
Outcome dft_exact() {
    const auto t0 = Clock::now();
    const DiscReport r = disc_constants(FunctionSystem::trig_degree(8), DomainSpec::torus(1, 256),
                                        PointSet(harness::equispaced_torus(17)), 2.0, 2.0);
    const double secs = seconds_since(t0);
    const double dl = r.D_L.as_double(), dr = r.D_R.as_double();
    const double err = std::max(std::abs(dl - 1), std::abs(dr - 1));
    return {err <= 1e-9 && secs < 1.0,
            "N=17 m=17 |D-1| max " + fmt(err) + " (tol 1e-9), " + fmt(secs) + " s (limit 1 s)"};
}

// 2 and 3 share the instances
ExperimentReport& oracle_run() {
    static ExperimentReport r = run_default("oracle_agreement");
    return r;
}

Outcome oracle_agreement() {
    const ExperimentReport& r = oracle_run();
    const Table& t = table(r, "instances");
    const auto le = column(t, "D_L_exact"), lo = column(t, "D_L_opt"), re = column(t, "D_R_exact"),
               ro = column(t, "D_R_opt");
    double worst = 0.0;
    for (std::size_t i = 0; i < t.rows.size(); ++i) worst = std::max({worst, rel_diff(le[i], lo[i]), rel_diff(re[i], ro[i])});
    return {t.rows.size() == 200 && worst <= 1e-6,
            std::to_string(t.rows.size()) + " instances, max relative gap " + fmt(worst) + " (tol 1e-6)"};
}

Outcome chaining() {
    const Table& t = table(oracle_run(), "instances");
    const auto le = column(t, "D_L_exact"), re = column(t, "D_R_exact");
    std::size_t finite = 0;
    double lowest = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        if (std::isinf(le[i]) || std::isinf(re[i])) continue;
        ++finite;
        lowest = std::min(lowest, le[i] * re[i]);
    }
    return {finite > 0 && lowest >= 1 - 1e-9,
            std::to_string(finite) + " finite instances, min D_L D_R = " + fmt(lowest) + " (>= 1-1e-9)"};
}

// 4
Outcome ril1() {
    const ExperimentReport r = run_default("ril1");
    const auto slack = column(table(r, "ril1"), "worst_slack");
    const double worst = *std::min_element(slack.begin(), slack.end());
    return {slack.size() == 100 && violated(r) == 0 && worst >= -1e-9,
            std::to_string(slack.size()) + " instances, worst relative slack " + fmt(worst) + " (>= -1e-9)"};
}

// 5
Outcome khinchin() {
    const ExperimentReport r = run_default("khinchin");
    const auto ns = column(table(r, "chain"), "N");
    const double max_n = *std::max_element(ns.begin(), ns.end());
    // independent p=4 check with unit coefficient vectors, absolute tolerance
    Rng rng = make_rng(0, 99);
    double worst = 0.0;
    for (int n = 1; n <= 10; ++n) {
        CVec a(n);
        for (int i = 0; i < n; ++i) a(i) = normal(rng);
        a /= a.norm();
        const double s4 = a.cwiseAbs2().cwiseAbs2().sum();
        worst = std::max(worst, std::abs(rademacher_moment(a, 4.0) - (3.0 - 2.0 * s4)));
    }
    return {violated(r) == 0 && max_n == 10 && worst <= 1e-12,
            std::to_string(r.checked()) + " chain checks up to N=" + fmt(max_n) + ", 0 allowed violations, p=4 gap " +
                fmt(worst) + " (tol 1e-12)"};
}

// 6
Outcome ric1() {
    const ExperimentReport r = run_default("ric1_scaling");
    const Table& t = table(r, "scaling");
    return {violated(r) == 0 && holds(r, "N^{q/2} <= m (D_R M)^q") == t.rows.size() && t.rows.size() == 15 &&
                holds(r, "christoffel = N") == t.rows.size(),
            std::to_string(t.rows.size()) + " point sets (N=2..6), min slack " + fmt(r.min_slack()) + ", table emitted"};
}

// 7
Outcome rip3() {
    const ExperimentReport r = run_default("rip3_fa");
    const std::size_t h = holds(r, "m >= D^{-q} (2a)^{-q/p}");
    return {violated(r) == 0 && h > 0,
            std::to_string(h) + " injective sets checked, " + std::to_string(violated(r)) + " violations"};
}

// 8
Outcome ap4() {
    const ExperimentReport r = run_default("ap4_equalize");
    const Table& t = table(r, "equalize");
    const auto m0 = column(t, "m0"), cap = column(t, "(C^2+1) m"), de = column(t, "D_equal"), b = column(t, "bound");
    std::size_t bad = 0, measured = 0;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        if (m0[i] > cap[i]) ++bad;
        if (std::isnan(de[i]) || std::isinf(b[i])) continue;
        ++measured;
        if (de[i] > b[i] + 1e-9) ++bad;
    }
    return {t.rows.size() == 100 && bad == 0 && violated(r) == 0,
            std::to_string(t.rows.size()) + " instances (" + std::to_string(measured) +
                " with finite weighted D), size and D bounds violated " + std::to_string(bad) + " times (slack 1e-9)"};
}

// 9
Outcome kiefer_wolfowitz() {
    Rng rng = make_rng(0, 9);
    const Subspace x = FunctionSystem::discrete(harness::gaussian(1024, 6, rng));
    const DomainSpec dom = DomainSpec::finite_set(1024);
    const auto t0 = Clock::now();
    const KwChainResult k = kw_chain_audit(x, dom, sup_grid(dom, &x.system()), 0, 1e-3, 2, 9);
    const double secs = seconds_since(t0);
    const double cert = k.report.constants.count("M") ? k.report.constants.at("M") : std::numeric_limits<double>::infinity();
    const bool ok = k.design.converged && k.design.iterations <= 50000 && k.design.max_christoffel <= 6 * (1 + 1e-3) &&
                    cert <= std::sqrt(6.0) * (1 + 1e-3) && secs < 30;
    return {ok, std::to_string(k.design.iterations) + " iterations, max christoffel " + fmt(k.design.max_christoffel) +
                    " (<= 6.006), certificate " + fmt(cert) + " (<= " + fmt(std::sqrt(6.0) * 1.001) + "), " +
                    fmt(secs) + " s (limit 30 s)"};
}

// 10
Outcome recovery() {
    const ExperimentReport r = run_default("recovery_suite");
    std::string counts;
    bool ok = violated(r) == 0 && r.min_slack() >= -1e-8;
    for (const char* th : {"BT1", "BT1a", "BT2", "ubT3", "ubT5", "ubT6"}) {
        const std::size_t h = holds(r, th);
        ok = ok && h >= 50;
        counts += std::string(counts.empty() ? "" : " ") + th + "=" + std::to_string(h);
    }
    return {ok, "audited " + counts + ", min slack " + fmt(r.min_slack()) + " (>= -1e-8)"};
}

// 11
Outcome sparse() {
    const ExperimentReport r = run_default("sparse_reproduction");
    const Table& t = table(r, "cases");
    const auto err = column(t, "exact error"), ns = column(t, "N"), vs = column(t, "v");
    const double worst = *std::max_element(err.begin(), err.end());
    const bool sizes = *std::max_element(ns.begin(), ns.end()) <= 12 && *std::max_element(vs.begin(), vs.end()) <= 2;
    return {t.rows.size() == 50 && sizes && worst <= 1e-8 && violated(r) == 0,
            std::to_string(t.rows.size()) + " supports, max lp^s error " + fmt(worst) + " (tol 1e-8)"};
}

// 12
Outcome lunin() {
    const ExperimentReport r = run_default("lunin_bench");
    const double frac = r.summary.at("greedy_within_2_fraction").get<double>();
    const Table& d = table(r, "ratio_distribution");
    std::string dist;
    for (const auto& row : d.rows) dist += " <=" + row[0].dump() + ":" + row[1].dump();
    return {table(r, "instances").rows.size() == 100 && frac >= 0.95,
            "greedy within factor 2 on " + fmt(100 * frac) + "% (>= 95%); ratio histogram" + dist};
}

// 13
Outcome determinism() {
    std::size_t same = 0, total = 0;
    std::string differ;
    for (const Experiment& e : registry()) {
        if (!first_runs.count(e.name)) run_default(e.name);
        const std::string again = run_experiment(e.name, ExperimentConfig{e.name, Json::object(), 0}).to_json().dump();
        ++total;
        if (again == first_runs.at(e.name)) ++same;
        else differ += " " + e.name;
    }
    return {same == total, std::to_string(same) + "/" + std::to_string(total) + " experiments bit-identical on rerun" +
                               (differ.empty() ? "" : ", differ:" + differ)};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"exact DFT discretization", dft_exact},
        {"optimizer vs eigen oracle", oracle_agreement},
        {"chaining D_L D_R >= 1", chaining},
        {"weighted RDI christoffel lemma", ril1},
        {"Khinchin chain", khinchin},
        {"lacunary scaling", ric1},
        {"hat family bound", rip3},
        {"weight equalizer", ap4},
        {"Kiefer-Wolfowitz", kiefer_wolfowitz},
        {"recovery Lebesgue audits", recovery},
        {"exact sparse reproduction", sparse},
        {"Lunin selection", lunin},
        {"determinism", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        const auto t0 = Clock::now();
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::printf("%s %2zu %-32s %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    o.detail.c_str(), seconds_since(t0));
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
