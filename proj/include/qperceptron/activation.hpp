#pragma once

// Sigmoid responses of the perceptron qubit and the quantities derived from
// them: the Heisenberg coefficients C, S and the excitation angle chi.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qperceptron {

struct ActivationKind {
    enum class Family { Algebraic, Logistic, Step, CaoArctan };

    Family family = Family::Algebraic;
    int order = 0;  // k of the repeat-until-success response, CaoArctan only

    static constexpr ActivationKind algebraic() { return {Family::Algebraic, 0}; }
    static constexpr ActivationKind logistic() { return {Family::Logistic, 0}; }
    static constexpr ActivationKind step() { return {Family::Step, 0}; }
    static ActivationKind cao_arctan(int k)
    {
        if (k < 1) {
            throw std::invalid_argument("cao_arctan order must be a positive integer");
        }
        return {Family::CaoArctan, k};
    }

    bool operator==(const ActivationKind&) const = default;
};

/// Heisenberg coefficients: U^dag sz U = C sz + S sx.
struct RotationCoefficients {
    double c;
    double s;
};

std::string to_string(ActivationKind kind);
ActivationKind activation_from_string(const std::string& name);

namespace detail {

inline void require_finite(double x)
{
    if (!std::isfinite(x)) {
        throw std::invalid_argument("activation input must be finite");
    }
}

inline void require_cao_domain(double x)
{
    if (std::abs(x) > std::numbers::pi / 4) {
        throw std::domain_error("cao_arctan response is only defined on [-pi/4, pi/4]; input wraps phase");
    }
}

// tan(x)^(2^k); nonnegative for k >= 1 and bounded by 1 on the native domain.
inline double cao_tangent_power(double x, int k) { return std::pow(std::tan(x), std::ldexp(1.0, k)); }

}  // namespace detail

/// Excitation probability f(x) in [0, 1].
inline double eval_f(ActivationKind kind, double x)
{
    detail::require_finite(x);
    switch (kind.family) {
    case ActivationKind::Family::Algebraic: {
        // 1/2 (1 + x / sqrt(1 + x^2)); the negative branch is rewritten to avoid cancellation.
        const double r = std::hypot(1.0, x);
        if (x >= 0) {
            return 0.5 * (1.0 + x / r);
        }
        return 0.5 / (r * (r - x));
    }
    case ActivationKind::Family::Logistic:
        if (x >= 0) {
            return 1.0 / (1.0 + std::exp(-x));
        } else {
            const double e = std::exp(x);
            return e / (1.0 + e);
        }
    case ActivationKind::Family::Step:
        if (x > 0) {
            return 1.0;
        }
        return x < 0 ? 0.0 : 0.5;
    case ActivationKind::Family::CaoArctan: {
        detail::require_cao_domain(x);
        const double t = detail::cao_tangent_power(x, kind.order);
        return t * t / (1.0 + t * t);
    }
    }
    throw std::logic_error("unknown activation family");
}

/// C = 1 - 2f and S = 2 sqrt(f (1 - f)), written in forms that keep C^2 + S^2 = 1.
inline RotationCoefficients eval_cs(ActivationKind kind, double x)
{
    detail::require_finite(x);
    switch (kind.family) {
    case ActivationKind::Family::Algebraic: {
        const double r = std::hypot(1.0, x);
        return {-x / r, 1.0 / r};
    }
    case ActivationKind::Family::Logistic:
        return {-std::tanh(0.5 * x), 1.0 / std::cosh(0.5 * x)};
    case ActivationKind::Family::Step:
        if (x == 0) {
            return {0.0, 1.0};
        }
        return {x > 0 ? -1.0 : 1.0, 0.0};
    case ActivationKind::Family::CaoArctan: {
        detail::require_cao_domain(x);
        const double t = detail::cao_tangent_power(x, kind.order);
        const double d = 1.0 + t * t;
        return {(1.0 - t * t) / d, 2.0 * t / d};
    }
    }
    throw std::logic_error("unknown activation family");
}

/// Excitation angle chi(x) = arcsin(sqrt(f(x))) in [0, pi/2].
inline double chi(ActivationKind kind, double x)
{
    detail::require_finite(x);
    switch (kind.family) {
    case ActivationKind::Family::Algebraic:
        return std::numbers::pi / 4 + 0.5 * std::atan(x);
    case ActivationKind::Family::Logistic:
        // tan(chi) = sqrt(f / (1 - f)) = exp(x / 2)
        return std::atan(std::exp(0.5 * x));
    case ActivationKind::Family::Step:
        if (x == 0) {
            return std::numbers::pi / 4;
        }
        return x > 0 ? std::numbers::pi / 2 : 0.0;
    case ActivationKind::Family::CaoArctan:
        detail::require_cao_domain(x);
        return std::atan(detail::cao_tangent_power(x, kind.order));
    }
    throw std::logic_error("unknown activation family");
}

/// d chi / dx. The f in {0, 1} singularity of f' / (2 sqrt(f(1-f))) is removable and
/// every branch returns its analytic limit there.
inline double dchi_dx(ActivationKind kind, double x)
{
    detail::require_finite(x);
    switch (kind.family) {
    case ActivationKind::Family::Algebraic:
        return 0.5 / (1.0 + x * x);
    case ActivationKind::Family::Logistic:
        return 0.25 / std::cosh(0.5 * x);
    case ActivationKind::Family::Step:
        if (x == 0) {
            throw std::domain_error("step activation is not differentiable at 0");
        }
        return 0.0;
    case ActivationKind::Family::CaoArctan: {
        detail::require_cao_domain(x);
        const double tn = std::tan(x);
        const double p = std::ldexp(1.0, kind.order);
        const double t = std::pow(tn, p);
        const double dt = p * std::pow(tn, p - 1.0) * (1.0 + tn * tn);
        return dt / (1.0 + t * t);
    }
    }
    throw std::logic_error("unknown activation family");
}

/// df/dx = S(x) chi'(x).
inline double df_dx(ActivationKind kind, double x) { return eval_cs(kind, x).s * dchi_dx(kind, x); }

inline std::string to_string(ActivationKind kind)
{
    switch (kind.family) {
    case ActivationKind::Family::Algebraic:
        return "algebraic";
    case ActivationKind::Family::Logistic:
        return "logistic";
    case ActivationKind::Family::Step:
        return "step";
    case ActivationKind::Family::CaoArctan:
        return "cao_arctan:" + std::to_string(kind.order);
    }
    throw std::logic_error("unknown activation family");
}

inline ActivationKind activation_from_string(const std::string& name)
{
    if (name == "algebraic") {
        return ActivationKind::algebraic();
    }
    if (name == "logistic") {
        return ActivationKind::logistic();
    }
    if (name == "step") {
        return ActivationKind::step();
    }
    const std::string prefix = "cao_arctan:";
    if (name.rfind(prefix, 0) == 0) {
        std::size_t used = 0;
        const std::string digits = name.substr(prefix.size());
        int k = 0;
        try {
            k = std::stoi(digits, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != digits.size()) {
            throw std::invalid_argument("bad cao_arctan order in '" + name + "'");
        }
        return ActivationKind::cao_arctan(k);
    }
    throw std::invalid_argument("unknown activation '" + name + "'");
}

}  // namespace qperceptron
