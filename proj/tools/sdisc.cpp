// sdisc: command line front end for the discretization workbench.
//
// Exit status: 0 all audits hold, 1 an audit was violated, 2 invalid config or guard.

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "sdisc/sdisc.hpp"

using namespace sdisc;

namespace {

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string experiment;
};

std::uint64_t resolve_seed(const Options& o, const Json& cfg) {
    if (o.seed) return *o.seed;
    if (const char* env = std::getenv("SDISC_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            fail(ErrorKind::invalid_parameters, std::string("SDISC_SEED is not an integer: ") + env);
        }
    }
    return get_or<std::uint64_t>(cfg, "seed", 0);
}

Json load_config(const Options& o, bool required) {
    if (o.config.empty()) {
        require(!required, ErrorKind::invalid_parameters, "--config is required");
        return Json::object();
    }
    Json cfg = read_json_file(o.config);
    require(cfg.is_object(), ErrorKind::invalid_parameters, "config must be a JSON object");
    return cfg;
}

Json envelope(const std::string& command, const Json& cfg, std::uint64_t seed) {
    Json out;
    out["schema"] = schema_version;
    out["command"] = command;
    out["config"] = cfg;
    out["seed"] = seed;
    out["seed_scheme"] = seed_scheme;
    return out;
}

Function target_function(const Json& t, const Subspace& x) {
    CVec c = CVec::Zero(x.dim());
    if (t.contains("coef")) {
        const auto v = t.at("coef").get<std::vector<double>>();
        require(static_cast<Eigen::Index>(v.size()) == x.dim(), ErrorKind::invalid_parameters, "coef length != dim X");
        for (std::size_t i = 0; i < v.size(); ++i) c(static_cast<Eigen::Index>(i)) = v[i];
    }
    const double amp = get_or<double>(t, "amplitude", 0.0);
    const double freq = get_or<double>(t, "frequency", 1.0);
    const Function u = span_function(x, c);
    return [u, amp, freq](const Point& p) { return u(p) + amp * std::cos(freq * p[0]); };
}

int finish(const Options& o, Json report, bool violated, double seconds) {
    report["violated"] = violated;
    const std::string text = report.dump(2) + "\n";
    if (o.out.empty()) {
        std::cout << text;
    } else {
        write_text(o.out, text);
        write_text(o.out + ".timing.json", Json{{"wall_clock_seconds", seconds}}.dump(2) + "\n");
    }
    return violated ? 1 : 0;
}

int cmd_space(const Options& o) {
    const Json cfg = load_config(o, true);
    const std::uint64_t seed = resolve_seed(o, cfg);
    const Problem pr = parse_problem(cfg, seed);
    Json r = envelope("space", cfg, seed);
    r["N"] = pr.space.dim();
    r["field"] = to_string(pr.space.field());
    r["system"] = to_string(pr.space.system().kind());
    r["domain"] = to_string(pr.domain.kind);
    const NikolskiiReport ni = nikolskii_constant(pr.space, pr.domain, 2.0, std::numeric_limits<double>::infinity());
    r["NI_2_inf"] = num(ni.value);
    r["christoffel_max"] = num(ni.value * ni.value);
    if (!is_inf_exponent(pr.p) && pr.p != 2.0) {
        RatioOptions ro;
        ro.seed = seed;
        r["NI_2_p"] = num(nikolskii_constant(pr.space, pr.domain, 2.0, pr.p, ro).value);
    }
    return finish(o, r, false, 0.0);
}

int cmd_points(const Options& o) {
    const Json cfg = load_config(o, true);
    const std::uint64_t seed = resolve_seed(o, cfg);
    const Problem pr = parse_problem(cfg, seed);
    const Json c = cfg.contains("construct") ? cfg.at("construct") : Json{{"method", "search"}};
    const std::string method = get_or<std::string>(c, "method", "search");
    Json r = envelope("points", cfg, seed);
    bool violated = false;
    if (method == "search") {
        const std::size_t m = get_or<std::size_t>(c, "m", static_cast<std::size_t>(2 * pr.space.dim()));
        const LdiSearchResult s = search_ldi_points(pr.space, pr.domain, m, pr.p, pr.q, get_or<int>(c, "restarts", 4), seed);
        r["points"] = to_json(s.points);
        r["D_L"] = num(s.D_L);
        r["evaluations"] = s.evaluations;
    } else if (method == "iid") {
        const IidResult s = iid_points_verified(pr.space, pr.domain, pr.p, get_or<double>(c, "eps", 0.5), seed);
        r["points"] = to_json(s.points);
        r["certified"] = s.certified;
        r["rounds"] = s.rounds;
        r["lower"] = num(s.lower);
        r["upper"] = num(s.upper);
    } else if (method == "kw") {
        const DesignMeasure d = kw_design(pr.space, sup_grid(pr.domain, &pr.space.system()), get_or<double>(c, "eps", 1e-3));
        std::vector<Point> pts;
        std::vector<double> w;
        for (std::size_t k = 0; k < d.points.size(); ++k)
            if (d.masses[k] > 1e-12) {
                pts.push_back(d.points[k]);
                w.push_back(d.masses[k]);
            }
        r["points"] = to_json(PointSet(pts, w));
        r["iterations"] = d.iterations;
        r["converged"] = d.converged;
        r["max_christoffel"] = num(d.max_christoffel);
    } else if (method == "equalize") {
        require(pr.points && pr.points->weights, ErrorKind::invalid_parameters, "equalize needs weighted points");
        const EqualizeAudit a = equalize_audit(pr.space, pr.domain, *pr.points, pr.p, pr.q,
                                               get_or<double>(c, "C", pr.points->weight_sum()), seed);
        r["points"] = to_json(a.result.points);
        r["m0"] = a.result.m0;
        r["D_weighted"] = num(a.D_weighted);
        r["D_equal"] = num(a.D_equal);
        r["bound"] = num(a.bound);
        r["status"] = to_string(a.status);
        violated = a.status == AuditStatus::violated;
    } else {
        fail(ErrorKind::invalid_parameters, "unknown construct method \"" + method + "\"");
    }
    return finish(o, r, violated, 0.0);
}

int cmd_disc(const Options& o) {
    const Json cfg = load_config(o, true);
    const std::uint64_t seed = resolve_seed(o, cfg);
    const Problem pr = parse_problem(cfg, seed);
    require(pr.points.has_value(), ErrorKind::invalid_parameters, "disc needs \"points\"");
    DiscOptions d;
    d.seed = seed;
    d.weighted = get_or<bool>(cfg, "weighted", false);
    const DiscReport rep = disc_constants(pr.space, pr.domain, *pr.points, pr.p, pr.q, d);
    Json r = envelope("disc", cfg, seed);
    r["report"] = to_json(rep);
    r["injective"] = is_injective(pr.space, *pr.points, pr.domain);
    bool violated = false;
    if (rep.D_L.is_finite()) {
        const double prod = rep.D_L.value() * rep.D_R.value();
        r["D_L_D_R"] = prod;
        violated = prod < 1 - 1e-9;
    }
    return finish(o, r, violated, 0.0);
}

int cmd_matrix(const Options& o) {
    const Json cfg = load_config(o, true);
    const std::uint64_t seed = resolve_seed(o, cfg);
    const Problem pr = parse_problem(cfg, seed);
    require(pr.points.has_value(), ErrorKind::invalid_parameters, "matrix needs \"points\"");
    const DesignMatrix dm = build_design(pr.space, *pr.points, BasisKind::orthonormal, pr.domain);
    Json r = envelope("matrix", cfg, seed);
    r["rows"] = dm.A.rows();
    r["cols"] = dm.A.cols();
    r["columns_orthonormal"] = columns_orthonormal(dm.A);
    RatioOptions ro;
    ro.seed = seed;
    r["opnorm"] = num(opnorm_rp(dm.A, pr.p, pr.q, std::nullopt, ro).value);
    bool violated = false;
    if (cfg.contains("select")) {
        const std::size_t m = cfg.at("select").get<std::size_t>();
        const std::string how = get_or<std::string>(cfg, "method", "greedy");
        const RowSelection s =
            select_rdi_rows(dm.A, m, how == "exhaustive" ? SelectMethod::exhaustive : SelectMethod::greedy);
        r["selected_rows"] = s.rows;
        r["achieved_norm"] = s.achieved_norm;
        r["rdi_constant"] = s.rdi_constant;
        const MatrixNormCorollary c = matrix_norms_corollary(dm.A, s.rows, pr.p, pr.q == 2.0 ? 2.0 : pr.q, seed);
        r["norm_corollary"] = Json{{"lhs", num(c.lhs)}, {"rhs", num(c.rhs)}, {"status", to_string(c.status)}};
        violated = c.status == AuditStatus::violated;
    }
    return finish(o, r, violated, 0.0);
}

int cmd_recover(const Options& o) {
    const Json cfg = load_config(o, true);
    const std::uint64_t seed = resolve_seed(o, cfg);
    const Problem pr = parse_problem(cfg, seed);
    require(pr.points.has_value(), ErrorKind::invalid_parameters, "recover needs \"points\"");
    const Json t = cfg.contains("target") ? cfg.at("target") : Json::object();
    const std::size_t v = get_or<std::size_t>(cfg, "v", static_cast<std::size_t>(pr.space.dim()));
    const std::string var = get_or<std::string>(cfg, "variant", "lp_s");
    Variant variant = Variant::lp_s;
    if (var == "lp")
        variant = Variant::lp;
    else if (var == "lp_inf")
        variant = Variant::lp_inf;
    else
        require(var == "lp_s", ErrorKind::invalid_parameters, "variant must be lp, lp_s or lp_inf");
    const RecoveryInput in = t.contains("samples")
                                 ? RecoveryInput::from_samples([&] {
                                       const auto s = t.at("samples").get<std::vector<double>>();
                                       CVec y(static_cast<Eigen::Index>(s.size()));
                                       for (std::size_t k = 0; k < s.size(); ++k) y(static_cast<Eigen::Index>(k)) = s[k];
                                       return y;
                                   }())
                                 : RecoveryInput(target_function(t, pr.space), "target");
    Json r = envelope("recover", cfg, seed);
    r["report"] = to_json(recover_universal(in, pr.space, v, *pr.points, pr.p, variant, pr.domain));
    return finish(o, r, false, 0.0);
}

int cmd_verify(const Options& o) {
    const Json cfg = load_config(o, true);
    const std::uint64_t seed = resolve_seed(o, cfg);
    const Problem pr = parse_problem(cfg, seed);
    require(pr.points.has_value(), ErrorKind::invalid_parameters, "verify needs \"points\"");
    const Json t = cfg.contains("target") ? cfg.at("target") : Json::object();
    AuditInstance inst{pr.space, pr.domain, *pr.points, {target_function(t, pr.space)}, pr.p};
    inst.v = get_or<std::size_t>(cfg, "v", 1);
    inst.search_m = get_or<std::size_t>(cfg, "search_m", 0);
    inst.seed = seed;
    Json r = envelope("verify", cfg, seed);
    Json audits = Json::array();
    bool violated = false;
    const auto names = get_or<std::vector<std::string>>(cfg, "theorems", {"BT2"});
    for (const std::string& name : names) {
        std::optional<Theorem> th;
        for (Theorem c : {Theorem::BT1, Theorem::BT1a, Theorem::BT2, Theorem::BT3, Theorem::BT4, Theorem::ubT3,
                          Theorem::ubT5, Theorem::ubT6})
            if (name == to_string(c)) th = c;
        require(th.has_value(), ErrorKind::invalid_parameters, "unknown theorem \"" + name + "\"");
        const RecoveryReport rep = lebesgue_audit(*th, inst);
        audits.push_back(to_json(rep));
        violated = violated || rep.status == AuditStatus::violated;
    }
    r["audits"] = audits;
    return finish(o, r, violated, 0.0);
}

int cmd_experiment(const Options& o) {
    Json cfg = load_config(o, false);
    const std::uint64_t seed = resolve_seed(o, cfg);
    std::string name = o.experiment;
    if (name.empty()) name = get_or<std::string>(cfg, "experiment", "");
    require(!name.empty(), ErrorKind::invalid_parameters, "experiment name missing");
    const Json params = cfg.contains("params") ? cfg.at("params") : Json::object();
    const ExperimentReport rep = run_experiment(name, ExperimentConfig{name, params, seed});
    const Json j = rep.to_json();
    const std::string text = j.dump(2) + "\n";
    if (o.out.empty()) {
        std::cout << text;
    } else {
        write_text(o.out, text);
        const std::filesystem::path base(o.out);
        for (const Table& t : rep.tables) {
            std::filesystem::path csv = base;
            csv.replace_extension("");
            write_text(csv.string() + "." + t.name + ".csv", t.csv());
        }
        write_text(o.out + ".timing.json", Json{{"wall_clock_seconds", rep.wall_clock}}.dump(2) + "\n");
    }
    std::cerr << name << ": " << rep.checked() << " checks, " << rep.violations() << " violations, min slack "
              << num(rep.min_slack()).dump() << "\n";
    return rep.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sdisc: one-sided sampling discretization workbench"};
    app.require_subcommand(1);
    Options o;
    const auto common = [&o](CLI::App* sub) {
        sub->add_option("--config", o.config, "JSON config file");
        sub->add_option("--seed", o.seed, "master seed (default: SDISC_SEED, then config \"seed\", then 0)");
        sub->add_option("--out", o.out, "write the JSON report here (stdout otherwise)");
    };
    std::map<std::string, std::function<int(const Options&)>> handlers{
        {"space", cmd_space},   {"points", cmd_points},   {"disc", cmd_disc},
        {"matrix", cmd_matrix}, {"recover", cmd_recover}, {"verify", cmd_verify},
        {"experiment", cmd_experiment}};
    std::map<std::string, const char*> help{
        {"space", "subspace summary and Nikol'skii constants"},
        {"points", "construct a point set (search, iid, kw, equalize)"},
        {"disc", "discretization constants D_L, D_R"},
        {"matrix", "design matrix, row selection and norm corollary"},
        {"recover", "ell_p / ell_p^s / ell_(p,inf) recovery"},
        {"verify", "Lebesgue-type inequality audits"},
        {"experiment", "run a registered experiment"}};
    for (const auto& [name, h] : handlers) {
        CLI::App* sub = app.add_subcommand(name, help.at(name));
        common(sub);
        if (name == "experiment") {
            sub->add_option("name", o.experiment, "experiment name");
            sub->add_flag_callback("--list", [] {
                for (const Experiment& e : registry()) std::cout << e.name << "  " << e.description << "\n";
                std::exit(0);
            }, "list registered experiments");
        }
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    try {
        for (const auto& [name, h] : handlers)
            if (app.got_subcommand(name)) return h(o);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Json::exception& e) {
        std::cerr << "error: bad config: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
