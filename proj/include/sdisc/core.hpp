#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sdisc {

using Scalar = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

/// A point of a domain. Torus points carry d angles in [0, 2pi),
/// interval points one coordinate in [0, 1], finite-set points one atom index.
using Point = std::vector<double>;

enum class Field { real, complex };

inline const char* to_string(Field f) { return f == Field::real ? "real" : "complex"; }

enum class ErrorKind {
    domain_mismatch,
    degenerate_system,
    invalid_parameters,
    convergence,
    guard_exceeded,
    premise_failed,
    size_limit,
    not_applicable,
};

inline const char* to_string(ErrorKind k) {
    switch (k) {
    case ErrorKind::domain_mismatch: return "domain-mismatch";
    case ErrorKind::degenerate_system: return "degenerate-system";
    case ErrorKind::invalid_parameters: return "invalid-parameters";
    case ErrorKind::convergence: return "convergence";
    case ErrorKind::guard_exceeded: return "guard-exceeded";
    case ErrorKind::premise_failed: return "premise-failed";
    case ErrorKind::size_limit: return "size-limit";
    case ErrorKind::not_applicable: return "audit-not-applicable";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Raised when the Gram matrix of a system is numerically singular.
class DegenerateError : public Error {
public:
    DegenerateError(double smallest, double largest)
        : Error(ErrorKind::degenerate_system,
                "Gram smallest eigenvalue " + std::to_string(smallest) + " vs largest " +
                    std::to_string(largest)),
          smallest_eigenvalue(smallest) {}
    double smallest_eigenvalue;
};

/// Raised by iterative solvers; carries the last iterate.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, CVec last)
        : Error(ErrorKind::convergence, what), last_iterate(std::move(last)) {}
    CVec last_iterate;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what) {
    if (!cond) fail(kind, what);
}

/// A nonnegative constant that may be +infinity (e.g. an LDI constant when
/// the sampling operator has a kernel). Infinity is a state, not a number.
class Constant {
public:
    Constant() = default;
    static Constant finite(double v) { return Constant(v, false); }
    static Constant infinite() { return Constant(0.0, true); }

    bool is_infinite() const noexcept { return infinite_; }
    bool is_finite() const noexcept { return !infinite_; }
    double value() const {
        if (infinite_) fail(ErrorKind::invalid_parameters, "value() of an infinite constant");
        return value_;
    }
    /// For arithmetic in bounds: maps infinity to +inf double.
    double as_double() const noexcept {
        return infinite_ ? std::numeric_limits<double>::infinity() : value_;
    }

    friend bool operator==(const Constant&, const Constant&) = default;

private:
    Constant(double v, bool inf) : value_(v), infinite_(inf) {}
    double value_ = 0.0;
    bool infinite_ = false;
};

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;

inline bool is_inf_exponent(double p) { return std::isinf(p) && p > 0; }

inline void check_exponent(double p, const char* name) {
    require(p >= 1.0 || is_inf_exponent(p), ErrorKind::invalid_parameters,
            std::string(name) + " must lie in [1, inf]");
}

}  // namespace sdisc
