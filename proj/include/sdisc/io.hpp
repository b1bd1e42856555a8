#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "sdisc/design.hpp"
#include "sdisc/recovery.hpp"

namespace sdisc {

// nlohmann::json keeps object keys sorted, so dumps are stable across runs.
using Json = nlohmann::json;

inline constexpr int schema_version = 1;

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

/// Non-finite doubles become the strings "inf", "-inf", "nan".
inline Json num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

inline Json num(const Constant& c) { return num(c.as_double()); }

inline double as_number(const Json& j) {
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
        fail(ErrorKind::invalid_parameters, "expected a number, got \"" + s + "\"");
    }
    require(j.is_number(), ErrorKind::invalid_parameters, "expected a number");
    return j.get<double>();
}

/// Real vectors as numbers, complex ones as [re, im] pairs.
inline Json to_json(const CVec& v) {
    Json out = Json::array();
    const bool real = v.size() == 0 || v.imag().cwiseAbs().maxCoeff() == 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (real)
            out.push_back(num(v(i).real()));
        else
            out.push_back(Json::array({num(v(i).real()), num(v(i).imag())}));
    }
    return out;
}

inline Json to_json(const PointSet& p) {
    Json out;
    out["m"] = p.m();
    out["points"] = p.points;
    if (p.weights) out["weights"] = *p.weights;
    return out;
}

inline Json to_json(const DiscReport& r) {
    Json out;
    out["p"] = num(r.p);
    out["q"] = num(r.q);
    out["D_L"] = num(r.D_L);
    out["D_R"] = num(r.D_R);
    out["method"] = r.method;
    out["weighted"] = r.weighted;
    out["lower_bound_only"] = r.lower_bound_only;
    out["witness_L"] = to_json(r.witness_L);
    out["witness_R"] = to_json(r.witness_R);
    Json mg = Json::object();
    for (const auto& [k, v] : r.margins) mg[k] = num(v);
    out["margins"] = mg;
    out["grid_size"] = r.grid_size;
    out["seed"] = r.seed;
    return out;
}

inline Json to_json(const AuditLine& a) {
    return Json{{"name", a.name},  {"kind", a.kind},         {"left", num(a.left)},
                {"right", num(a.right)}, {"slack", num(a.slack)}, {"status", to_string(a.status)}};
}

inline Json to_json(const RecoveryReport& r) {
    Json out;
    out["algorithm"] = r.algorithm;
    out["input"] = r.input_id;
    out["support"] = r.support;
    out["coef"] = to_json(r.coef);
    Json e = Json::object(), c = Json::object(), a = Json::array();
    for (const auto& [k, v] : r.errors) e[k] = num(v);
    for (const auto& [k, v] : r.constants) c[k] = num(v);
    for (const AuditLine& l : r.audits) a.push_back(to_json(l));
    out["errors"] = e;
    out["constants"] = c;
    out["audits"] = a;
    out["status"] = to_string(r.status);
    if (!r.note.empty()) out["note"] = r.note;
    return out;
}

/// CSV cell: strings verbatim (quoted when needed), numbers in round-trip form.
inline std::string csv_cell(const Json& j) {
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
        return q + "\"";
    }
    if (j.is_null()) return "";
    return j.dump();
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    require(static_cast<bool>(f), ErrorKind::invalid_parameters, "cannot write " + path);
    f << text;
}

inline Json read_json_file(const std::string& path) {
    std::ifstream f(path);
    require(static_cast<bool>(f), ErrorKind::invalid_parameters, "cannot read " + path);
    try {
        return Json::parse(f);
    } catch (const Json::parse_error& e) {
        fail(ErrorKind::invalid_parameters, path + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

template <class T>
T get_or(const Json& j, const char* key, T def) {
    if (!j.is_object() || !j.contains(key)) return def;
    try {
        return j.at(key).get<T>();
    } catch (const Json::exception& e) {
        fail(ErrorKind::invalid_parameters, std::string("bad value for \"") + key + "\": " + e.what());
    }
}

inline double get_exponent(const Json& j, const char* key, double def) {
    if (!j.is_object() || !j.contains(key)) return def;
    const double v = as_number(j.at(key));
    check_exponent(v, key);
    return v;
}

inline CMat random_table(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    Rng rng = make_rng(seed, 0);
    CMat t(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < t.rows(); ++i)
        for (Eigen::Index k = 0; k < t.cols(); ++k) t(i, k) = normal(rng);
    return t;
}

/// {"kind": "trig", "degree": n} | {"kind": "trig", "freqs": [[k..], ..]}
/// | {"kind": "lacunary", "freqs": [..], "b": b} | {"kind": "lacunary", "N": n} (freqs 2^i)
/// | {"kind": "hat", "a": [..]} | {"kind": "discrete", "table": [[..], ..]}
/// | {"kind": "discrete", "random": {"rows": k, "cols": n, "seed": s}}
/// Optional "with_constant": true appends the constant function.
inline FunctionSystem parse_system(const Json& j) {
    require(j.is_object() && j.contains("kind"), ErrorKind::invalid_parameters, "system needs a \"kind\"");
    const std::string kind = j.at("kind").get<std::string>();
    FunctionSystem sys = [&]() -> FunctionSystem {
        if (kind == "trig") {
            if (j.contains("freqs")) return FunctionSystem::trig(j.at("freqs").get<std::vector<std::vector<int>>>());
            return FunctionSystem::trig_degree(get_or<int>(j, "degree", 1));
        }
        if (kind == "lacunary") {
            if (j.contains("freqs"))
                return FunctionSystem::lacunary(j.at("freqs").get<std::vector<int>>(), get_or<double>(j, "b", 2.0));
            const int n = get_or<int>(j, "N", 4);
            require(n >= 1 && n <= 20, ErrorKind::invalid_parameters, "lacunary N must lie in [1, 20]");
            std::vector<int> k;
            for (int i = 0; i < n; ++i) k.push_back(1 << i);
            return FunctionSystem::lacunary(k, 2.0);
        }
        if (kind == "hat") return FunctionSystem::hat_family(j.at("a").get<std::vector<double>>());
        if (kind == "discrete") {
            if (j.contains("random")) {
                const Json& r = j.at("random");
                return FunctionSystem::discrete(random_table(get_or<std::size_t>(r, "rows", 16),
                                                             get_or<std::size_t>(r, "cols", 3),
                                                             get_or<std::uint64_t>(r, "seed", 0)));
            }
            const auto rows = j.at("table").get<std::vector<std::vector<double>>>();
            require(!rows.empty() && !rows.front().empty(), ErrorKind::invalid_parameters, "empty table");
            CMat t(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
            for (std::size_t i = 0; i < rows.size(); ++i) {
                require(rows[i].size() == rows.front().size(), ErrorKind::invalid_parameters, "ragged table");
                for (std::size_t k = 0; k < rows[i].size(); ++k)
                    t(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
            }
            return FunctionSystem::discrete(t);
        }
        fail(ErrorKind::invalid_parameters, "unknown system kind \"" + kind + "\"");
    }();
    if (get_or<bool>(j, "with_constant", false)) sys = sys.augmented_with_constant();
    return sys;
}

/// {"kind": "torus", "dim": d, "grid": g} | {"kind": "interval", "grid": g}
/// | {"kind": "finite_set", "size": k}. Missing -> the natural domain of the system.
inline DomainSpec parse_domain(const Json& j, const FunctionSystem& sys) {
    DomainSpec dom = natural_domain(sys);
    if (j.is_null()) return dom;
    const std::string kind = get_or<std::string>(j, "kind", to_string(dom.kind));
    if (kind == "torus")
        dom = DomainSpec::torus(get_or<int>(j, "dim", sys.torus_dim()), get_or<int>(j, "grid", dom.grid_size));
    else if (kind == "interval")
        dom = DomainSpec::interval(get_or<int>(j, "grid", dom.grid_size));
    else if (kind == "finite_set")
        dom = DomainSpec::finite_set(get_or<std::size_t>(j, "size", dom.finite_size));
    else
        fail(ErrorKind::invalid_parameters, "unknown domain kind \"" + kind + "\"");
    check_compatible(sys, dom);
    return dom;
}

/// {"kind": "equispaced", "m": m} (torus d = 1: 2 pi j/m; interval: (j + 1/2)/m; finite set: atoms
/// spread evenly) | {"kind": "explicit", "points": [[..]], "weights": [..]}
/// | {"kind": "random", "m": m, "seed": s} | {"kind": "atoms", "indices": [..]}
inline PointSet parse_points(const Json& j, const DomainSpec& dom, std::uint64_t seed) {
    require(j.is_object(), ErrorKind::invalid_parameters, "points must be an object");
    const std::string kind = get_or<std::string>(j, "kind", "explicit");
    PointSet out;
    if (kind == "equispaced") {
        const int m = get_or<int>(j, "m", 0);
        require(m >= 1, ErrorKind::invalid_parameters, "equispaced needs m >= 1");
        std::vector<Point> pts;
        for (int i = 0; i < m; ++i) {
            switch (dom.kind) {
            case DomainKind::torus:
                require(dom.dim == 1, ErrorKind::invalid_parameters, "equispaced points need a 1-d torus");
                pts.push_back({two_pi * i / m});
                break;
            case DomainKind::interval: pts.push_back({(i + 0.5) / m}); break;
            case DomainKind::finite_set:
                pts.push_back({std::floor(static_cast<double>(i) * static_cast<double>(dom.finite_size) / m)});
                break;
            }
        }
        out = PointSet(pts);
    } else if (kind == "explicit") {
        auto pts = j.at("points").get<std::vector<Point>>();
        if (j.contains("weights"))
            out = PointSet(pts, j.at("weights").get<std::vector<double>>());
        else
            out = PointSet(pts);
    } else if (kind == "random") {
        Rng rng = make_rng(get_or<std::uint64_t>(j, "seed", seed), 1);
        out = PointSet(draw_points(dom, get_or<std::size_t>(j, "m", 0), rng));
    } else if (kind == "atoms") {
        std::vector<Point> pts;
        for (std::size_t i : j.at("indices").get<std::vector<std::size_t>>()) pts.push_back({static_cast<double>(i)});
        out = PointSet(pts);
    } else {
        fail(ErrorKind::invalid_parameters, "unknown point set kind \"" + kind + "\"");
    }
    for (const Point& x : out.points) require(dom.contains(x), ErrorKind::domain_mismatch, "point outside the domain");
    return out;
}

/// The pieces most subcommands need, resolved from one config object.
struct Problem {
    Subspace space;
    DomainSpec domain;
    std::optional<PointSet> points;
    double p = 2.0, q = 2.0;
    std::uint64_t seed = 0;
};

inline Problem parse_problem(const Json& cfg, std::uint64_t seed) {
    require(cfg.contains("system"), ErrorKind::invalid_parameters, "config needs a \"system\"");
    FunctionSystem sys = parse_system(cfg.at("system"));
    DomainSpec dom = parse_domain(cfg.contains("domain") ? cfg.at("domain") : Json(), sys);
    Problem pr{Subspace(sys), dom, std::nullopt};
    if (cfg.contains("points")) pr.points = parse_points(cfg.at("points"), dom, seed);
    pr.p = get_exponent(cfg, "p", 2.0);
    pr.q = get_exponent(cfg, "q", 2.0);
    pr.seed = seed;
    return pr;
}

}  // namespace sdisc
