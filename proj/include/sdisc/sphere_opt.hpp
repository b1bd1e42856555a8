#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "sdisc/core.hpp"
#include "sdisc/fit.hpp"
#include "sdisc/linalg.hpp"
#include "sdisc/rng.hpp"

namespace sdisc {

/// c -> (sum_k w_k |(M c)_k|^p)^{1/p}, or max_k |(M c)_k| for p = inf (rows with w_k > 0).
/// Every norm in the library that is optimized over coefficient space has this shape.
struct LinearNorm {
    CMat matrix;
    RVec weights;
    double p = 2.0;

    double value(const CVec& c) const { return fit::weighted_norm(matrix * c, weights, p); }

    /// Value and complex gradient g with d(value) = Re(g^H dc).
    double value_grad(const CVec& c, CVec& grad) const {
        const CVec y = matrix * c;
        grad = CVec::Zero(c.size());
        if (is_inf_exponent(p)) {
            Eigen::Index k = -1;
            double mx = 0.0;
            for (Eigen::Index j = 0; j < y.size(); ++j)
                if (weights(j) > 0.0 && std::abs(y(j)) > mx) {
                    mx = std::abs(y(j));
                    k = j;
                }
            if (k >= 0) grad = matrix.row(k).adjoint() * (y(k) / mx);
            return mx;
        }
        const double v = fit::weighted_norm(y, weights, p);
        if (v <= 0.0) return 0.0;
        CVec t(y.size());
        for (Eigen::Index j = 0; j < y.size(); ++j) {
            const double a = std::abs(y(j));
            t(j) = (a > 0.0 && weights(j) > 0.0) ? weights(j) * std::pow(a, p - 1) * (y(j) / a) : Scalar(0.0);
        }
        grad = std::pow(v, 1 - p) * (matrix.adjoint() * t);
        return v;
    }
};

struct RatioOptions {
    int restarts = 32;
    std::uint64_t seed = 0;
    double tol = 1e-8;
    int max_iter = 3000;
    /// Brute-force sphere sweep when the (phase-reduced) real dimension is at most this.
    int sweep_max_dim = 3;
    int sweep_resolution = 48;
    /// Structured starting points evaluated before the random restarts.
    std::vector<CVec> starts;
    /// Points whose ratio is evaluated (no ascent); the result is never below any of them.
    std::vector<CVec> probes;
};

struct RatioResult {
    double value = 0.0;
    CVec witness;
    int best_start = -1;  ///< index into [starts..., random restarts..., sweep, probes...]
    bool converged = true;
    std::optional<double> sweep_value;
};

namespace detail {

inline double ratio_at(const LinearNorm& num, const LinearNorm& den, const CVec& c) {
    const double d = den.value(c);
    const double n = num.value(c);
    if (d <= 0.0) return n > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    return n / d;
}

inline CVec project_field(CVec c, Field f) {
    if (f == Field::real) c = c.real().cast<Scalar>();
    return c;
}

// Conjugate-gradient ascent of log(num/den) on the unit sphere; never returns a point worse
// than the start.
inline double ascend(const LinearNorm& num, const LinearNorm& den, Field field, CVec& c, const RatioOptions& opt,
                     bool& converged) {
    c = project_field(c, field);
    if (c.norm() == 0.0) return 0.0;
    c.normalize();
    double best = ratio_at(num, den, c);
    if (!std::isfinite(best)) return best;
    CVec dir_prev, grad_prev;
    double step = 0.1;
    int stall = 0;
    converged = false;
    for (int it = 0; it < opt.max_iter; ++it) {
        CVec gn, gd;
        const double nv = num.value_grad(c, gn);
        const double dv = den.value_grad(c, gd);
        if (nv <= 0.0 || dv <= 0.0) {
            converged = true;
            break;
        }
        CVec g = project_field(gn / nv - gd / dv, field);
        g -= c * Scalar(c.dot(g).real());  // tangent component (c.dot(g) = c^H g)
        const double gnorm = g.norm();
        if (gnorm < 1e-13) {
            converged = true;
            break;
        }
        CVec dir = g;
        if (grad_prev.size() == g.size() && it % static_cast<int>(2 * c.size() + 1) != 0) {
            const double beta = std::max(0.0, g.dot(g - grad_prev).real() / std::max(grad_prev.squaredNorm(), 1e-300));
            dir = g + beta * dir_prev;
            if (dir.dot(g).real() <= 0.0) dir = g;
        }
        // Backtracking with expansion on the ratio.
        double t = step / std::max(dir.norm(), 1e-300);
        CVec trial = (c + t * dir).normalized();
        double val = ratio_at(num, den, trial);
        int shrink = 0;
        while (!(val > best) && shrink < 50) {
            t *= 0.5;
            trial = (c + t * dir).normalized();
            val = ratio_at(num, den, trial);
            ++shrink;
        }
        if (!(val > best)) {
            if (dir_prev.size() != 0 && dir.cwiseNotEqual(g).any()) {
                dir_prev.resize(0);
                grad_prev.resize(0);
                continue;
            }
            converged = true;
            break;
        }
        const double gain = (val - best) / best;
        step = std::min(1.0, 2.0 * t * dir.norm());
        c = trial;
        best = val;
        grad_prev = g;
        dir_prev = dir;
        if (gain < opt.tol * 1e-4) {
            if (++stall >= 8) {
                converged = true;
                break;
            }
        } else {
            stall = 0;
        }
    }
    return best;
}

// Uniform grid (endpoints included) on the surface of the cube [-1,1]^dim; radial projection
// to the sphere is left to the ratio's homogeneity.
template <class Visit>
inline void cube_sphere_grid(int dim, int res, Visit&& visit) {
    std::vector<double> x(dim);
    std::vector<int> idx(std::max(dim - 1, 0));
    for (int face = 0; face < dim; ++face) {
        for (double sgn : {-1.0, 1.0}) {
            std::fill(idx.begin(), idx.end(), 0);
            while (true) {
                int k = 0;
                for (int d = 0; d < dim; ++d) {
                    if (d == face) {
                        x[d] = sgn;
                    } else {
                        x[d] = -1.0 + 2.0 * idx[k] / res;
                        ++k;
                    }
                }
                visit(x);
                int d = 0;
                while (d < dim - 1 && ++idx[d] > res) idx[d++] = 0;
                if (d == dim - 1) break;
            }
        }
    }
}

}  // namespace detail

/// Brute-force sweep of num/den over the unit sphere of coefficient space. For complex fields
/// the global phase is fixed (first coordinate real), so the swept real dimension is 2n - 1.
inline RatioResult sphere_sweep(const LinearNorm& num, const LinearNorm& den, Eigen::Index n, Field field,
                                int resolution) {
    const int dim = static_cast<int>(field == Field::real ? n : 2 * n - 1);
    RatioResult out;
    out.value = -1.0;
    CVec c(n);
    detail::cube_sphere_grid(dim, resolution, [&](const std::vector<double>& x) {
        if (field == Field::real) {
            for (Eigen::Index i = 0; i < n; ++i) c(i) = x[i];
        } else {
            c(0) = x[0];
            for (Eigen::Index i = 1; i < n; ++i) c(i) = Scalar(x[2 * i - 1], x[2 * i]);
        }
        const double r = detail::ratio_at(num, den, c);
        if (r > out.value) {
            out.value = r;
            out.witness = c.normalized();
        }
    });
    return out;
}

inline int sweep_dimension(Eigen::Index n, Field field) {
    return static_cast<int>(field == Field::real ? n : 2 * n - 1);
}

/// sup_{c != 0} num(c)/den(c) by multi-start ascent. Structured starts go first, then
/// `restarts` random Gaussian starts with per-restart seeds task_seed(seed, r), then (for small
/// dimensions) the polished best point of a brute-force sweep. Ties keep the earliest start.
inline RatioResult maximize_ratio(const LinearNorm& num, const LinearNorm& den, Eigen::Index n, Field field,
                                  const RatioOptions& opt = {}) {
    RatioResult out;
    out.value = -1.0;
    int index = 0;
    auto consider = [&](CVec c) {
        bool conv = true;
        const double v = detail::ascend(num, den, field, c, opt, conv);
        if (v > out.value * (1 + 1e-12) || out.value < 0.0) {
            out.value = v;
            out.witness = c;
            out.best_start = index;
            out.converged = conv;
        }
        ++index;
    };
    for (const CVec& s : opt.starts)
        if (s.size() == n && s.norm() > 0.0) consider(s);
        else ++index;
    for (int r = 0; r < opt.restarts; ++r) {
        Rng rng = make_rng(opt.seed, static_cast<std::uint64_t>(r));
        CVec c(n);
        for (Eigen::Index i = 0; i < n; ++i)
            c(i) = field == Field::real ? Scalar(normal(rng), 0.0) : Scalar(normal(rng), normal(rng));
        consider(c);
    }
    if (sweep_dimension(n, field) <= opt.sweep_max_dim) {
        const RatioResult sw = sphere_sweep(num, den, n, field, opt.sweep_resolution);
        out.sweep_value = sw.value;
        consider(sw.witness);
    }
    for (const CVec& pr : opt.probes) {
        if (pr.size() == n && pr.norm() > 0.0) {
            const double v = detail::ratio_at(num, den, pr);
            if (v > out.value) {
                out.value = v;
                out.witness = pr.normalized();
                out.best_start = index;
            }
        }
        ++index;
    }
    if (out.value < 0.0) out.value = 0.0;
    return out;
}

}  // namespace sdisc
