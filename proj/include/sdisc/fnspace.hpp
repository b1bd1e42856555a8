#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "sdisc/core.hpp"
#include "sdisc/fit.hpp"
#include "sdisc/linalg.hpp"
#include "sdisc/sphere_opt.hpp"

namespace sdisc {

// ---------------------------------------------------------------------------
// Domains
// ---------------------------------------------------------------------------

enum class DomainKind { torus, interval, finite_set };

inline const char* to_string(DomainKind k) {
    switch (k) {
    case DomainKind::torus: return "torus";
    case DomainKind::interval: return "unit-interval";
    case DomainKind::finite_set: return "finite-set";
    }
    return "unknown";
}

/// Probability space (Omega, mu) with its evaluation/quadrature resolution.
struct DomainSpec {
    DomainKind kind = DomainKind::torus;
    int dim = 1;                  ///< torus dimension d
    std::size_t finite_size = 0;  ///< number of atoms of a finite set
    int grid_size = 256;          ///< per-dimension grid for continuous domains
    bool atomic = false;          ///< measure = sum of point masses
    std::vector<Point> atoms;
    std::vector<double> masses;

    static DomainSpec torus(int d, int grid) {
        DomainSpec s;
        s.kind = DomainKind::torus;
        s.dim = d;
        s.grid_size = grid;
        s.validate();
        return s;
    }
    static DomainSpec interval(int grid) {
        DomainSpec s;
        s.kind = DomainKind::interval;
        s.grid_size = grid;
        s.validate();
        return s;
    }
    static DomainSpec finite_set(std::size_t k) {
        DomainSpec s;
        s.kind = DomainKind::finite_set;
        s.finite_size = k;
        s.grid_size = static_cast<int>(k);
        s.validate();
        return s;
    }
    /// Same Omega, measure replaced by sum_k masses_k delta_{points_k}.
    DomainSpec with_atomic_measure(std::vector<Point> pts, std::vector<double> m) const {
        DomainSpec s = *this;
        s.atomic = true;
        s.atoms = std::move(pts);
        s.masses = std::move(m);
        s.validate();
        return s;
    }

    bool contains(const Point& x) const {
        switch (kind) {
        case DomainKind::torus:
            return static_cast<int>(x.size()) == dim &&
                   std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
        case DomainKind::interval: return x.size() == 1 && x[0] >= 0.0 && x[0] <= 1.0;
        case DomainKind::finite_set:
            return x.size() == 1 && x[0] >= 0.0 && x[0] < static_cast<double>(finite_size) &&
                   x[0] == std::floor(x[0]);
        }
        return false;
    }

    void validate() const {
        if (kind != DomainKind::finite_set)
            require(grid_size >= 2, ErrorKind::invalid_parameters, "grid_size must be >= 2 on continuous domains");
        if (kind == DomainKind::torus) require(dim >= 1, ErrorKind::invalid_parameters, "torus dimension >= 1");
        if (kind == DomainKind::finite_set)
            require(finite_size >= 1, ErrorKind::invalid_parameters, "finite set must be nonempty");
        if (atomic) {
            require(!atoms.empty() && atoms.size() == masses.size(), ErrorKind::invalid_parameters,
                    "atomic measure needs matching points and masses");
            double s = 0.0;
            for (double m : masses) {
                require(m >= 0.0, ErrorKind::invalid_parameters, "negative mass");
                s += m;
            }
            require(std::abs(s - 1.0) <= 1e-12, ErrorKind::invalid_parameters, "masses must sum to 1");
            for (const Point& a : atoms)
                require(contains(a), ErrorKind::domain_mismatch, "atom outside the domain");
        }
    }
};

// ---------------------------------------------------------------------------
// Function systems
// ---------------------------------------------------------------------------

enum class SystemKind { trig, lacunary, hat, discrete_matrix };

inline const char* to_string(SystemKind k) {
    switch (k) {
    case SystemKind::trig: return "trig";
    case SystemKind::lacunary: return "lacunary";
    case SystemKind::hat: return "hat-family";
    case SystemKind::discrete_matrix: return "discrete-matrix";
    }
    return "unknown";
}

/// f_a(x) = 1 on [0,a], 2 - x/a on [a,2a], 0 on [2a,1].
inline double fa(double a, double x) {
    if (x <= a) return 1.0;
    if (x <= 2 * a) return 2.0 - x / a;
    return 0.0;
}

/// A finite generating system {phi_i} with closed-form evaluation.
class FunctionSystem {
public:
    static FunctionSystem trig(std::vector<std::vector<int>> q) {
        require(!q.empty(), ErrorKind::invalid_parameters, "trig system needs a nonempty Q");
        const std::size_t d = q.front().size();
        for (const auto& k : q) require(k.size() == d && d >= 1, ErrorKind::invalid_parameters, "Q: ragged frequencies");
        FunctionSystem s(SystemKind::trig, q.size());
        s.freqs_ = std::move(q);
        return s;
    }
    /// Univariate trig polynomials of degree n: Q = {-n, ..., n}.
    static FunctionSystem trig_degree(int n) {
        std::vector<std::vector<int>> q;
        for (int k = -n; k <= n; ++k) q.push_back({k});
        return trig(std::move(q));
    }
    static FunctionSystem lacunary(std::vector<int> k, double b) {
        require(b > 1.0, ErrorKind::invalid_parameters, "lacunary ratio b must exceed 1");
        require(!k.empty() && k.front() >= 1, ErrorKind::invalid_parameters, "lacunary frequencies must be positive");
        for (std::size_t i = 0; i + 1 < k.size(); ++i)
            require(k[i + 1] > k[i] && static_cast<double>(k[i + 1]) >= b * k[i], ErrorKind::invalid_parameters,
                    "lacunary condition k_{i+1} >= b k_i violated");
        FunctionSystem s(SystemKind::lacunary, k.size());
        for (int v : k) s.freqs_.push_back({v});
        s.ratio_ = b;
        return s;
    }
    static FunctionSystem hat_family(std::vector<double> a) {
        require(!a.empty(), ErrorKind::invalid_parameters, "hat family needs a-values");
        for (double v : a) require(v > 0.0 && v <= 0.5, ErrorKind::invalid_parameters, "hat parameter a must lie in (0, 1/2]");
        FunctionSystem s(SystemKind::hat, a.size());
        s.hat_a_ = std::move(a);
        return s;
    }
    /// Value table: rows = atoms of a finite set, columns = generators.
    static FunctionSystem discrete(CMat table) {
        require(table.rows() >= 1 && table.cols() >= 1, ErrorKind::invalid_parameters, "empty value table");
        FunctionSystem s(SystemKind::discrete_matrix, static_cast<std::size_t>(table.cols()));
        s.table_ = std::move(table);
        return s;
    }

    SystemKind kind() const { return kind_; }
    std::size_t size() const { return n_ + (with_constant_ ? 1 : 0); }
    std::size_t base_size() const { return n_; }
    bool has_constant() const { return with_constant_; }
    const std::vector<std::vector<int>>& frequencies() const { return freqs_; }
    double lacunary_ratio() const { return ratio_; }
    const std::vector<double>& hat_parameters() const { return hat_a_; }
    const CMat& table() const { return table_; }
    const std::vector<double>& scales() const { return scale_; }
    int torus_dim() const { return freqs_.empty() ? 1 : static_cast<int>(freqs_.front().size()); }

    Field field() const {
        if (kind_ == SystemKind::hat) return Field::real;
        if (kind_ == SystemKind::discrete_matrix && table_.imag().cwiseAbs().maxCoeff() == 0.0) return Field::real;
        return Field::complex;
    }

    /// Multiply generator i by scale[i].
    FunctionSystem scaled(std::vector<double> s) const {
        require(s.size() == size(), ErrorKind::invalid_parameters, "scale vector length");
        FunctionSystem out = *this;
        out.scale_ = std::move(s);
        return out;
    }
    /// X' = X + span{1}.
    FunctionSystem augmented_with_constant() const {
        FunctionSystem out = *this;
        out.with_constant_ = true;
        out.scale_.push_back(1.0);
        return out;
    }

    bool compatible(const DomainSpec& d) const {
        switch (kind_) {
        case SystemKind::trig:
        case SystemKind::lacunary: return d.kind == DomainKind::torus && d.dim == torus_dim();
        case SystemKind::hat: return d.kind == DomainKind::interval;
        case SystemKind::discrete_matrix:
            return d.kind == DomainKind::finite_set && d.finite_size == static_cast<std::size_t>(table_.rows());
        }
        return false;
    }

    bool in_domain(const Point& x) const {
        switch (kind_) {
        case SystemKind::trig:
        case SystemKind::lacunary:
            return static_cast<int>(x.size()) == torus_dim() &&
                   std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
        case SystemKind::hat: return x.size() == 1 && x[0] >= 0.0 && x[0] <= 1.0;
        case SystemKind::discrete_matrix:
            return x.size() == 1 && x[0] >= 0.0 && x[0] < static_cast<double>(table_.rows()) && x[0] == std::floor(x[0]);
        }
        return false;
    }

    /// phi_i(x); throws domain-mismatch for points outside the domain.
    Scalar eval(std::size_t i, const Point& x) const {
        require(in_domain(x), ErrorKind::domain_mismatch, "point outside the system's domain");
        require(i < size(), ErrorKind::invalid_parameters, "generator index out of range");
        return scale_[i] * raw(i, x);
    }

    /// Row j = (phi_1(x_j), ..., phi_N(x_j)).
    CMat eval_rows(const std::vector<Point>& pts) const {
        CMat out(pts.size(), size());
        for (std::size_t j = 0; j < pts.size(); ++j) {
            require(in_domain(pts[j]), ErrorKind::domain_mismatch, "point outside the system's domain");
            for (std::size_t i = 0; i < size(); ++i) out(j, i) = scale_[i] * raw(i, pts[j]);
        }
        return out;
    }

    /// Breakpoints of piecewise-linear generators (hat family), including 0 and 1.
    std::vector<double> breakpoints() const {
        std::vector<double> b{0.0, 1.0};
        for (double a : hat_a_) {
            b.push_back(a);
            b.push_back(2 * a);
        }
        std::sort(b.begin(), b.end());
        b.erase(std::unique(b.begin(), b.end()), b.end());
        return b;
    }

    /// Closed-form Gram against the uniform torus measure (trig-like systems only).
    std::optional<CMat> exact_torus_gram() const {
        if (kind_ != SystemKind::trig && kind_ != SystemKind::lacunary) return std::nullopt;
        const std::size_t n = size();
        CMat g = CMat::Zero(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (freq(i) == freq(j)) g(i, j) = scale_[i] * scale_[j];
        return g;
    }

    std::vector<int> freq(std::size_t i) const {
        if (i < n_) return freqs_[i];
        return std::vector<int>(torus_dim(), 0);
    }

private:
    FunctionSystem(SystemKind k, std::size_t n) : kind_(k), n_(n), scale_(n, 1.0) {}

    Scalar raw(std::size_t i, const Point& x) const {
        if (i >= n_) return 1.0;  // appended constant
        switch (kind_) {
        case SystemKind::trig:
        case SystemKind::lacunary: {
            double phase = 0.0;
            for (std::size_t d = 0; d < x.size(); ++d) phase += freqs_[i][d] * x[d];
            return std::polar(1.0, phase);
        }
        case SystemKind::hat: return fa(hat_a_[i], x[0]);
        case SystemKind::discrete_matrix: return table_(static_cast<Eigen::Index>(x[0]), static_cast<Eigen::Index>(i));
        }
        return 0.0;
    }

    SystemKind kind_;
    std::size_t n_;
    std::vector<double> scale_;
    bool with_constant_ = false;
    std::vector<std::vector<int>> freqs_;
    double ratio_ = 0.0;
    std::vector<double> hat_a_;
    CMat table_;
};

/// Hat system with the single generator f_a.
inline FunctionSystem make_fa(double a) {
    require(a > 0.0 && a <= 0.5, ErrorKind::invalid_parameters, "f_a needs 0 < a <= 1/2");
    return FunctionSystem::hat_family({a});
}

/// N x #points value table, entry (i, j) = phi_i(x_j).
inline CMat eval_system(const FunctionSystem& sys, const std::vector<Point>& pts) {
    return sys.eval_rows(pts).transpose();
}

/// span{psi_1..psi_n} with psi_k = sum_i mix(i,k) phi_i. Identity mix = the system itself.
class Subspace {
public:
    Subspace(FunctionSystem sys)  // NOLINT: implicit on purpose, a system spans a subspace
        : sys_(std::move(sys)), mix_(CMat::Identity(sys_.size(), sys_.size())) {}
    Subspace(FunctionSystem sys, CMat mix) : sys_(std::move(sys)), mix_(std::move(mix)) {
        require(mix_.rows() == static_cast<Eigen::Index>(sys_.size()) && mix_.cols() >= 1,
                ErrorKind::invalid_parameters, "mixing matrix shape");
    }

    const FunctionSystem& system() const { return sys_; }
    const CMat& mix() const { return mix_; }
    Eigen::Index dim() const { return mix_.cols(); }
    Field field() const {
        if (sys_.field() == Field::real && mix_.imag().cwiseAbs().maxCoeff() == 0.0) return Field::real;
        return Field::complex;
    }
    bool is_identity_mix() const {
        return mix_.rows() == mix_.cols() && mix_.isApprox(CMat::Identity(mix_.rows(), mix_.cols()), 0.0);
    }

    CMat eval_rows(const std::vector<Point>& pts) const { return sys_.eval_rows(pts) * mix_; }
    Scalar eval(const CVec& coef, const Point& x) const {
        const CMat row = sys_.eval_rows({x}) * mix_;
        return (row * coef)(0, 0);
    }
    /// Sub-span of selected basis columns.
    Subspace columns(const std::vector<std::size_t>& idx) const {
        CMat m(mix_.rows(), idx.size());
        for (std::size_t k = 0; k < idx.size(); ++k) m.col(k) = mix_.col(static_cast<Eigen::Index>(idx[k]));
        return Subspace(sys_, m);
    }

private:
    FunctionSystem sys_;
    CMat mix_;
};

using Function = std::function<Scalar(const Point&)>;

inline Function span_function(const Subspace& s, const CVec& coef) {
    return [s, coef](const Point& x) { return s.eval(coef, x); };
}

// ---------------------------------------------------------------------------
// Quadrature and sup grids
// ---------------------------------------------------------------------------

struct NodeSet {
    std::vector<Point> nodes;
    RVec weights;
    std::string rule;
};

namespace detail {

inline std::vector<Point> torus_grid(int dim, int g) {
    std::vector<Point> out;
    std::size_t total = 1;
    for (int d = 0; d < dim; ++d) total *= static_cast<std::size_t>(g);
    out.reserve(total);
    std::vector<int> idx(dim, 0);
    for (std::size_t t = 0; t < total; ++t) {
        Point x(dim);
        for (int d = 0; d < dim; ++d) x[d] = two_pi * idx[d] / g;
        out.push_back(std::move(x));
        for (int d = 0; d < dim && ++idx[d] == g; ++d) idx[d] = 0;
    }
    return out;
}

inline std::vector<double> interval_cells(const DomainSpec& dom, const FunctionSystem* sys) {
    std::vector<double> b;
    for (int k = 0; k <= dom.grid_size; ++k) b.push_back(static_cast<double>(k) / dom.grid_size);
    if (sys && sys->kind() == SystemKind::hat)
        for (double v : sys->breakpoints()) b.push_back(v);
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end(), [](double x, double y) { return std::abs(x - y) < 1e-15; }), b.end());
    return b;
}

}  // namespace detail

/// Quadrature for integrals against mu. Torus: equispaced product grid (exact for trig
/// polynomials of degree < grid_size); interval: 5-point Gauss-Legendre on the uniform cells
/// refined at the system's breakpoints (exact for piecewise polynomials of degree <= 9); atoms: exact.
inline NodeSet quadrature(const DomainSpec& dom, const FunctionSystem* sys = nullptr) {
    NodeSet q;
    if (dom.atomic) {
        q.nodes = dom.atoms;
        q.weights = Eigen::Map<const RVec>(dom.masses.data(), dom.masses.size());
        q.rule = "atomic";
        return q;
    }
    switch (dom.kind) {
    case DomainKind::torus: {
        q.nodes = detail::torus_grid(dom.dim, dom.grid_size);
        q.weights = RVec::Constant(q.nodes.size(), 1.0 / static_cast<double>(q.nodes.size()));
        q.rule = "torus-equispaced-" + std::to_string(dom.grid_size);
        break;
    }
    case DomainKind::interval: {
        const std::vector<double> b = detail::interval_cells(dom, sys);
        const double r1 = std::sqrt(5.0 - 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
        const double r2 = std::sqrt(5.0 + 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
        const double w1 = (322.0 + 13.0 * std::sqrt(70.0)) / 900.0, w2 = (322.0 - 13.0 * std::sqrt(70.0)) / 900.0;
        const double gl[5] = {-r2, -r1, 0.0, r1, r2};
        const double gw[5] = {w2, w1, 128.0 / 225.0, w1, w2};
        std::vector<double> w;
        for (std::size_t k = 0; k + 1 < b.size(); ++k) {
            const double mid = 0.5 * (b[k] + b[k + 1]), half = 0.5 * (b[k + 1] - b[k]);
            for (int r = 0; r < 5; ++r) {
                q.nodes.push_back({mid + half * gl[r]});
                w.push_back(half * gw[r]);
            }
        }
        q.weights = Eigen::Map<RVec>(w.data(), w.size());
        q.rule = "gauss-legendre-5-composite-" + std::to_string(dom.grid_size);
        break;
    }
    case DomainKind::finite_set: {
        for (std::size_t k = 0; k < dom.finite_size; ++k) q.nodes.push_back({static_cast<double>(k)});
        q.weights = RVec::Constant(dom.finite_size, 1.0 / static_cast<double>(dom.finite_size));
        q.rule = "finite-uniform";
        break;
    }
    }
    return q;
}

/// Points over which sup norms are taken: the support of an atomic measure, the torus grid,
/// the interval grid plus breakpoints, or all atoms of a finite set.
inline std::vector<Point> sup_grid(const DomainSpec& dom, const FunctionSystem* sys = nullptr) {
    if (dom.atomic) {
        std::vector<Point> out;
        for (std::size_t k = 0; k < dom.atoms.size(); ++k)
            if (dom.masses[k] > 0.0) out.push_back(dom.atoms[k]);
        return out;
    }
    switch (dom.kind) {
    case DomainKind::torus: return detail::torus_grid(dom.dim, dom.grid_size);
    case DomainKind::interval: {
        std::vector<Point> out;
        for (double v : detail::interval_cells(dom, sys)) out.push_back({v});
        return out;
    }
    case DomainKind::finite_set: {
        std::vector<Point> out;
        for (std::size_t k = 0; k < dom.finite_size; ++k) out.push_back({static_cast<double>(k)});
        return out;
    }
    }
    return {};
}

inline void check_compatible(const FunctionSystem& sys, const DomainSpec& dom) {
    require(sys.compatible(dom), ErrorKind::domain_mismatch,
            std::string("system ") + to_string(sys.kind()) + " does not live on domain " + to_string(dom.kind));
}

// ---------------------------------------------------------------------------
// Gram, orthonormal bases, norms
// ---------------------------------------------------------------------------

/// G(k,l) = <psi_l, psi_k> = int conj(psi_k) psi_l dmu, so ||sum c_k psi_k||_2^2 = c^H G c.
inline CMat gram_unchecked(const Subspace& s, const DomainSpec& dom) {
    check_compatible(s.system(), dom);
    if (!dom.atomic && dom.kind == DomainKind::torus)
        if (auto g = s.system().exact_torus_gram()) return s.mix().adjoint() * (*g) * s.mix();
    const NodeSet q = quadrature(dom, &s.system());
    const CMat b = s.eval_rows(q.nodes);
    return b.adjoint() * q.weights.asDiagonal() * b;
}

/// Gram matrix; raises DegenerateError when min eig < 1e-10 max eig.
inline CMat gram(const Subspace& s, const DomainSpec& dom) {
    CMat g = gram_unchecked(s, dom);
    linalg::check_nondegenerate(g);
    return g;
}

/// u = T phi (row i of T = coefficients of u_i in the subspace basis), orthonormal in L2(mu).
struct OrthoBasis {
    CMat T;
    Subspace source;

    /// The orthonormal basis as a subspace of the same system.
    Subspace as_subspace() const { return Subspace(source.system(), source.mix() * T.transpose()); }
    Eigen::Index dim() const { return T.rows(); }
};

inline OrthoBasis orthonormalize(const Subspace& s, const DomainSpec& dom) {
    const CMat g = gram(s, dom);
    const CMat r = linalg::cholesky_upper(g);
    const CMat rinv = r.triangularView<Eigen::Upper>().solve(CMat::Identity(r.rows(), r.cols()));
    return OrthoBasis{rinv.transpose(), s};
}

/// sum_i |u_i(x)|^2.
inline double christoffel(const OrthoBasis& basis, const Point& x) {
    const CMat row = basis.source.eval_rows({x}) * basis.T.transpose();
    return row.squaredNorm();
}

/// Coefficients (in the subspace basis) of the unit-L2 function maximizing |f(x)|.
inline CVec christoffel_witness(const OrthoBasis& basis, const Point& x) {
    const CMat row = basis.source.eval_rows({x}) * basis.T.transpose();
    CVec a = row.row(0).adjoint();  // coefficients in the u-basis
    const double nrm = a.norm();
    if (nrm > 0.0) a /= nrm;
    return basis.T.transpose() * a;
}

/// Coefficient-space norm f -> ||f||_{L_p(mu)} as a LinearNorm (p = 2 through the Gram factor).
inline LinearNorm domain_norm(const Subspace& s, const DomainSpec& dom, double p) {
    check_exponent(p, "p");
    LinearNorm out;
    out.p = p;
    if (p == 2.0) {
        out.matrix = linalg::cholesky_upper(gram_unchecked(s, dom));
        out.weights = RVec::Ones(out.matrix.rows());
        return out;
    }
    if (is_inf_exponent(p)) {
        out.matrix = s.eval_rows(sup_grid(dom, &s.system()));
        out.weights = RVec::Ones(out.matrix.rows());
        return out;
    }
    const NodeSet q = quadrature(dom, &s.system());
    out.matrix = s.eval_rows(q.nodes);
    out.weights = q.weights;
    return out;
}

namespace detail {

// Golden-section maximization of g on [lo, hi].
template <class G>
inline std::pair<double, double> golden_max(G&& g, double lo, double hi, int iters = 80) {
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double x1 = b - r * (b - a), x2 = a + r * (b - a);
    double f1 = g(x1), f2 = g(x2);
    for (int k = 0; k < iters; ++k) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = g(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = g(x1);
        }
    }
    return f1 > f2 ? std::pair{x1, f1} : std::pair{x2, f2};
}

// Newton polish of |f|^2 at x for f(x) = sum_i a_i e^{i k_i x}; only accepts increases.
inline double trig_newton_polish(const FunctionSystem& sys, const CVec& a, Point& x, double val) {
    const int d = static_cast<int>(x.size());
    const std::size_t n = sys.size();
    auto eval = [&](const Point& y, Scalar& f, CVec& df, CMat& d2f) {
        f = 0.0;
        df = CVec::Zero(d);
        d2f = CMat::Zero(d, d);
        for (std::size_t i = 0; i < n; ++i) {
            const std::vector<int> k = sys.freq(i);
            double ph = 0.0;
            for (int t = 0; t < d; ++t) ph += k[t] * y[t];
            const Scalar term = a(i) * std::polar(1.0, ph);
            f += term;
            for (int t = 0; t < d; ++t) {
                df(t) += Scalar(0, k[t]) * term;
                for (int u = 0; u < d; ++u) d2f(t, u) -= double(k[t]) * k[u] * term;
            }
        }
    };
    for (int it = 0; it < 30; ++it) {
        Scalar f;
        CVec df;
        CMat d2f;
        eval(x, f, df, d2f);
        RVec g(d);
        RMat h(d, d);
        for (int t = 0; t < d; ++t) {
            g(t) = 2 * (std::conj(f) * df(t)).real();
            for (int u = 0; u < d; ++u) h(t, u) = 2 * (std::conj(df(t)) * df(u) + std::conj(f) * d2f(t, u)).real();
        }
        const RVec step = h.ldlt().solve(-g);
        if (!step.allFinite() || step.norm() < 1e-15) break;
        bool moved = false;
        for (double lam = 1.0; lam > 1e-6; lam *= 0.5) {
            Point y = x;
            for (int t = 0; t < d; ++t) y[t] += lam * step(t);
            Scalar fy;
            CVec dy;
            CMat d2y;
            eval(y, fy, dy, d2y);
            if (std::abs(fy) > val) {
                val = std::abs(fy);
                x = y;
                moved = true;
                break;
            }
        }
        if (!moved) break;
    }
    return val;
}

// Sup of |f| on the torus: grid maxima refined by coordinate-wise golden-section (ternary)
// search, then polished by Newton steps on |f|^2.
inline double torus_refined_sup(const Subspace& s, const CVec& coef, const DomainSpec& dom, const std::vector<Point>& grid,
                                const CVec& grid_vals, int top = 8) {
    std::vector<std::size_t> order(grid.size());
    std::iota(order.begin(), order.end(), 0);
    const std::size_t k = std::min<std::size_t>(top, order.size());
    std::partial_sort(order.begin(), order.begin() + k, order.end(),
                      [&](std::size_t a, std::size_t b) { return std::abs(grid_vals(a)) > std::abs(grid_vals(b)); });
    double best = k ? std::abs(grid_vals(order[0])) : 0.0;
    const double h = two_pi / dom.grid_size;
    const CVec sys_coef = s.mix() * coef;
    for (std::size_t t = 0; t < k; ++t) {
        Point x = grid[order[t]];
        double val = std::abs(grid_vals(order[t]));
        for (int sweep = 0; sweep < 3; ++sweep) {
            for (int d = 0; d < dom.dim; ++d) {
                const double c0 = x[d];
                auto g = [&](double v) {
                    Point y = x;
                    y[d] = v;
                    return std::abs(s.eval(coef, y));
                };
                const auto [arg, f] = golden_max(g, c0 - h, c0 + h);
                if (f > val) {
                    val = f;
                    x[d] = arg;
                }
            }
        }
        CVec scaled = sys_coef;
        for (std::size_t i = 0; i < s.system().size(); ++i) scaled(i) *= s.system().scales()[i];
        val = trig_newton_polish(s.system(), scaled, x, val);
        best = std::max(best, val);
    }
    return best;
}

}  // namespace detail

struct NormOptions {
    /// Refine torus sup norms around grid maxima (span elements only).
    bool refine_sup = true;
};

/// ||f||_{L_p(mu)} for f = sum c_k psi_k. p = 2 is exact through the Gram; other finite p use
/// the quadrature; p = inf is the sup-grid maximum (torus: refined by local search).
inline double lp_norm(const Subspace& s, const CVec& coef, const DomainSpec& dom, double p, const NormOptions& opt = {}) {
    check_exponent(p, "p");
    require(coef.size() == s.dim(), ErrorKind::invalid_parameters, "coefficient vector length != dim");
    check_compatible(s.system(), dom);
    if (p == 2.0) return std::sqrt(std::max(0.0, (coef.adjoint() * gram_unchecked(s, dom) * coef)(0, 0).real()));
    if (is_inf_exponent(p)) {
        const std::vector<Point> grid = sup_grid(dom, &s.system());
        const CVec vals = s.eval_rows(grid) * coef;
        const double mx = vals.size() ? vals.cwiseAbs().maxCoeff() : 0.0;
        if (opt.refine_sup && !dom.atomic && dom.kind == DomainKind::torus)
            return std::max(mx, detail::torus_refined_sup(s, coef, dom, grid, vals));
        return mx;
    }
    const NodeSet q = quadrature(dom, &s.system());
    return fit::weighted_norm(s.eval_rows(q.nodes) * coef, q.weights, p);
}

/// ||f||_{L_p(mu)} for an arbitrary evaluable f: quadrature for finite p, sup grid for p = inf.
/// `sys` supplies breakpoints for interval quadrature.
inline double lp_norm(const Function& f, const DomainSpec& dom, double p, const FunctionSystem* sys = nullptr) {
    check_exponent(p, "p");
    if (is_inf_exponent(p)) {
        double mx = 0.0;
        for (const Point& x : sup_grid(dom, sys)) mx = std::max(mx, std::abs(f(x)));
        return mx;
    }
    const NodeSet q = quadrature(dom, sys);
    CVec v(q.nodes.size());
    for (std::size_t k = 0; k < q.nodes.size(); ++k) v(k) = f(q.nodes[k]);
    return fit::weighted_norm(v, q.weights, p);
}

// ---------------------------------------------------------------------------
// Best approximation
// ---------------------------------------------------------------------------

struct BestApprox {
    CVec coef;
    double distance = 0.0;
    std::string method;
};

/// d(f, X)_p = inf_{u in X} ||f - u||_p with the minimizer. p = 2 is the orthogonal projection
/// (normal equations against the Gram); p = inf a discrete min-max on the sup grid; other p an
/// iteratively reweighted fit on the quadrature nodes.
inline BestApprox best_approx(const Function& f, const Subspace& s, const DomainSpec& dom, double p) {
    check_exponent(p, "p");
    check_compatible(s.system(), dom);
    BestApprox out;
    const Field field = s.field();
    if (is_inf_exponent(p)) {
        const std::vector<Point> grid = sup_grid(dom, &s.system());
        CVec y(grid.size());
        for (std::size_t k = 0; k < grid.size(); ++k) y(k) = f(grid[k]);
        const fit::FitResult r = fit::weighted_lp_fit(s.eval_rows(grid), y, RVec::Ones(grid.size()), p, field);
        out.coef = r.coef;
        out.distance = r.residual_norm;
        out.method = "chebyshev-grid";
        return out;
    }
    const NodeSet q = quadrature(dom, &s.system());
    const CMat b = s.eval_rows(q.nodes);
    CVec y(q.nodes.size());
    for (std::size_t k = 0; k < q.nodes.size(); ++k) y(k) = f(q.nodes[k]);
    if (p == 2.0) {
        const CMat g = gram(s, dom);
        const CVec rhs = b.adjoint() * (q.weights.asDiagonal() * y);
        out.coef = g.ldlt().solve(rhs);
        if (field == Field::real && y.imag().cwiseAbs().maxCoeff() == 0.0) out.coef = out.coef.real().cast<Scalar>();
        out.method = "projection";
    } else {
        const fit::FitResult r = fit::weighted_lp_fit(b, y, q.weights, p, field);
        out.coef = r.coef;
        out.method = r.method;
    }
    out.distance = fit::weighted_norm(b * out.coef - y, q.weights, p);
    return out;
}

// ---------------------------------------------------------------------------
// Nikol'skii constants
// ---------------------------------------------------------------------------

struct NikolskiiReport {
    double value = 1.0;
    CVec witness;
    std::string method;
    int grid_size = 0;
};

/// M = sup ||f||_q / ||f||_p over X. (2, inf): max over the sup grid of christoffel^{1/2}
/// (refined on the torus); (p, p): 1; otherwise multi-restart ascent seeded with the
/// christoffel witnesses, cross-checked by a sphere sweep in small dimension.
inline NikolskiiReport nikolskii_constant(const Subspace& s, const DomainSpec& dom, double p, double q,
                                          RatioOptions opt = {}) {
    check_exponent(p, "p");
    check_exponent(q, "q");
    require(p <= q, ErrorKind::invalid_parameters, "Nikol'skii constant needs p <= q");
    NikolskiiReport out;
    out.grid_size = dom.grid_size;
    if (p == q) {
        out.value = 1.0;
        out.witness = CVec::Unit(s.dim(), 0);
        out.method = "identity";
        return out;
    }
    const OrthoBasis ob = orthonormalize(s, dom);
    const std::vector<Point> grid = sup_grid(dom, &s.system());
    if (p == 2.0 && is_inf_exponent(q)) {
        const CMat u = s.eval_rows(grid) * ob.T.transpose();
        Eigen::Index best = 0;
        const RVec ch = u.rowwise().squaredNorm();
        ch.maxCoeff(&best);
        out.witness = christoffel_witness(ob, grid[best]);
        out.value = std::sqrt(ch(best));
        if (!dom.atomic && dom.kind == DomainKind::torus)
            out.value = std::max(out.value, lp_norm(s, out.witness, dom, q) / lp_norm(s, out.witness, dom, 2.0));
        out.method = "christoffel-exact";
        return out;
    }
    // Structured starts: kernel witnesses at the largest christoffel values.
    {
        const CMat u = s.eval_rows(grid) * ob.T.transpose();
        const RVec ch = u.rowwise().squaredNorm();
        std::vector<Eigen::Index> idx(ch.size());
        std::iota(idx.begin(), idx.end(), 0);
        const std::size_t k = std::min<std::size_t>(4, idx.size());
        std::partial_sort(idx.begin(), idx.begin() + k, idx.end(), [&](auto a, auto b) { return ch(a) > ch(b); });
        for (std::size_t t = 0; t < k; ++t) opt.starts.push_back(christoffel_witness(ob, grid[idx[t]]));
    }
    const RatioResult r = maximize_ratio(domain_norm(s, dom, q), domain_norm(s, dom, p), s.dim(), s.field(), opt);
    out.value = r.value;
    out.witness = r.witness;
    out.method = "optimized";
    return out;
}

}  // namespace sdisc
