#pragma once

// Time-dependent Schroedinger integration of the perceptron qubit
//
//     i d/dt psi = -1/2 [ Omega(t) sx + x sz ] psi,      sz|1> = +|1>,
//
// response curves, the Hadamard + passage gate protocol and the averaged
// fidelity benchmark of the linear and FAQUAD ramps.

#include "qperceptron/activation.hpp"
#include "qperceptron/control.hpp"
#include "qperceptron/parallel.hpp"

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

namespace qperceptron {

using Complex = std::complex<double>;

struct TwoLevelState {
    Complex amp0;  // resting |0>
    Complex amp1;  // active |1>

    double norm_squared() const { return std::norm(amp0) + std::norm(amp1); }
    double excitation() const { return std::norm(amp1); }

    static TwoLevelState resting() { return {1.0, 0.0}; }
    static TwoLevelState plus() { return {std::numbers::sqrt2 / 2, std::numbers::sqrt2 / 2}; }
};

/// 2x2 unitary acting on (amp0, amp1); m[row][col].
struct Propagator {
    std::array<std::array<Complex, 2>, 2> m{{{1.0, 0.0}, {0.0, 1.0}}};

    TwoLevelState apply(const TwoLevelState& s) const
    {
        return {m[0][0] * s.amp0 + m[0][1] * s.amp1, m[1][0] * s.amp0 + m[1][1] * s.amp1};
    }
};

struct IntegratorOptions {
    double phase_per_step = 0.01;    // initial dt <= phase_per_step / sqrt(Omega^2 + x^2)
    std::size_t min_steps = 1000;     // initial dt <= tf / min_steps
    double tolerance = 1e-9;          // halve dt until the result moves by less than this
    int max_halvings = 14;
};

namespace detail {

// exp(-i H dt) for H = 1/2 [[x, -Omega], [-Omega, -x]] in the (|0>, |1>) basis.
struct StepMatrix {
    Complex a, b, c, d;
};

inline StepMatrix step_matrix(double omega, double x, double dt)
{
    const double h = std::hypot(omega, x);
    if (h == 0) {
        return {1.0, 0.0, 0.0, 1.0};
    }
    const double phi = 0.5 * h * dt;
    const double cs = std::cos(phi);
    const double sn = std::sin(phi) / h;
    return {Complex(cs, -sn * x), Complex(0, sn * omega), Complex(0, sn * omega), Complex(cs, sn * x)};
}

template <std::size_t N>
using Columns = std::array<TwoLevelState, N>;

inline constexpr double kGaussLo = 0.5 - 0.28867513459481288225;  // 1/2 - sqrt(3)/6
inline constexpr double kGaussHi = 0.5 + 0.28867513459481288225;
inline constexpr double kMagnusLo = (3.0 - 2.0 * 1.7320508075688772935) / 12.0;
inline constexpr double kMagnusHi = (3.0 + 2.0 * 1.7320508075688772935) / 12.0;

template <std::size_t N>
void apply_step(Columns<N>& cols, const StepMatrix& u)
{
    for (auto& s : cols) {
        const Complex a0 = u.a * s.amp0 + u.b * s.amp1;
        const Complex a1 = u.c * s.amp0 + u.d * s.amp1;
        s.amp0 = a0;
        s.amp1 = a1;
    }
}

// Integrate N independent columns through the whole schedule at refinement `level`.
template <std::size_t N>
Columns<N> integrate_columns(const ControlSchedule& schedule, double x, Columns<N> cols, int level,
                             const IntegratorOptions& opt)
{
    const double tf = schedule.tf();
    const double max_dt = tf / static_cast<double>(opt.min_steps);
    const double scale = std::ldexp(1.0, -level);
    double t = 0;
    while (t < tf) {
        const double r = std::hypot(schedule.omega(t), x);
        double dt = (r > 0 ? std::min(opt.phase_per_step / r, max_dt) : max_dt) * scale;
        if (t + dt >= tf || tf - (t + dt) < 1e-12 * tf) {
            dt = tf - t;
        }
        // Fourth-order commutator-free Magnus step: two exact exponentials built from the
        // field at the Gauss nodes, the earlier-weighted one applied first.
        const double om1 = schedule.omega(t + kGaussLo * dt);
        const double om2 = schedule.omega(t + kGaussHi * dt);
        apply_step(cols, step_matrix(kMagnusHi * om1 + kMagnusLo * om2, 0.5 * x, dt));
        apply_step(cols, step_matrix(kMagnusLo * om1 + kMagnusHi * om2, 0.5 * x, dt));
        t = (dt == tf - t) ? tf : t + dt;
    }
    return cols;
}

template <std::size_t N>
double max_difference(const Columns<N>& a, const Columns<N>& b)
{
    double worst = 0;
    for (std::size_t i = 0; i < N; ++i) {
        worst = std::max({worst, std::abs(a[i].amp0 - b[i].amp0), std::abs(a[i].amp1 - b[i].amp1)});
    }
    return worst;
}

template <std::size_t N>
Columns<N> integrate_converged(const ControlSchedule& schedule, double x, const Columns<N>& initial,
                               const IntegratorOptions& opt)
{
    if (!std::isfinite(x)) {
        throw std::invalid_argument("longitudinal field must be finite");
    }
    Columns<N> coarse = integrate_columns(schedule, x, initial, 0, opt);
    for (int level = 1; level <= opt.max_halvings; ++level) {
        Columns<N> fine = integrate_columns(schedule, x, initial, level, opt);
        if (max_difference(coarse, fine) < opt.tolerance) {
            return fine;
        }
        coarse = fine;
    }
    throw std::runtime_error("two-level integration did not converge within the halving budget");
}

}  // namespace detail

/// Integrate psi0 from t = 0 to tf. Norm is preserved step by step since each step is an
/// exact 2x2 exponential.
inline TwoLevelState evolve_two_level(const ControlSchedule& schedule, double x, const TwoLevelState& psi0,
                                      const IntegratorOptions& opt = {})
{
    if (std::abs(psi0.norm_squared() - 1.0) > 1e-10) {
        throw std::invalid_argument("initial two-level state must be normalized");
    }
    return detail::integrate_converged<1>(schedule, x, {psi0}, opt)[0];
}

/// Full 2x2 evolution operator of the passage for field x.
inline Propagator two_level_propagator(const ControlSchedule& schedule, double x, const IntegratorOptions& opt = {})
{
    const auto cols = detail::integrate_converged<2>(
        schedule, x, {TwoLevelState{1.0, 0.0}, TwoLevelState{0.0, 1.0}}, opt);
    Propagator p;
    p.m[0][0] = cols[0].amp0;
    p.m[1][0] = cols[0].amp1;
    p.m[0][1] = cols[1].amp0;
    p.m[1][1] = cols[1].amp1;
    return p;
}

/// Hadamard on |0>, then the passage: approximates the ideal perceptron state Phi(x / Omega_f).
inline TwoLevelState perceptron_protocol(const ControlSchedule& schedule, double x, const IntegratorOptions& opt = {})
{
    return evolve_two_level(schedule, x, TwoLevelState::plus(), opt);
}

/// Ground state of H at (Omega, x): sqrt(1 - g) |0> + sqrt(g) |1> with g(x / Omega).
inline TwoLevelState ideal_state(double x, double omega)
{
    const auto e = eigensystem(omega, x);
    return {e.phi0.resting, e.phi0.active};
}

struct ResponsePoint {
    double x;
    double p_excite;
};

inline std::vector<ResponsePoint> response_curve(const ControlSchedule& schedule, std::span<const double> x_grid,
                                                 unsigned threads = 1, const IntegratorOptions& opt = {})
{
    for (double x : x_grid) {
        if (!std::isfinite(x)) {
            throw std::invalid_argument("response grid must be finite");
        }
    }
    return parallel_map<ResponsePoint>(x_grid.size(), threads, [&](std::size_t i) {
        return ResponsePoint{x_grid[i], perceptron_protocol(schedule, x_grid[i], opt).excitation()};
    });
}

/// Uniform grid of n points on [-x_max, x_max] with exact mirror symmetry.
inline std::vector<double> symmetric_grid(double x_max, std::size_t n_points)
{
    if (!(x_max > 0) || n_points < 2) {
        throw std::invalid_argument("symmetric grid needs x_max > 0 and at least two points");
    }
    std::vector<double> g(n_points);
    const double h = 2 * x_max / static_cast<double>(n_points - 1);
    for (std::size_t i = 0; i < n_points; ++i) {
        const std::size_t mirror = n_points - 1 - i;
        if (mirror < i) {
            g[i] = -g[mirror];
        } else if (mirror == i) {
            g[i] = 0.0;
        } else {
            g[i] = -x_max + h * static_cast<double>(i);
        }
    }
    g.front() = -x_max;
    g.back() = x_max;
    return g;
}

/// Mean fidelity (1 / 2 x_max) * integral of |<Phi(x / Omega_f) | psi(tf, x)>|^2 over
/// [-x_max, x_max], trapezoid rule on n_points uniform nodes.
///
/// sx H(x) sx = H(-x) and sx|+> = |+>, so F(-x) = F(x): only the nonnegative half of the
/// grid is integrated and mirrored.
inline double average_fidelity(const ControlSchedule& schedule, double x_max, std::size_t n_points,
                               unsigned threads = 1, const IntegratorOptions& opt = {})
{
    const auto grid = symmetric_grid(x_max, n_points);
    const double omegaf = schedule.omegaf();
    const std::size_t half = n_points / 2;  // indices >= half have x >= 0
    const auto upper = parallel_map<double>(n_points - half, threads, [&](std::size_t k) {
        const double x = grid[half + k];
        const TwoLevelState psi = perceptron_protocol(schedule, x, opt);
        const TwoLevelState target = ideal_state(x, omegaf);
        return std::norm(target.amp0 * psi.amp0 + target.amp1 * psi.amp1);
    });
    std::vector<double> fidelity(n_points);
    for (std::size_t k = 0; k < upper.size(); ++k) {
        fidelity[half + k] = upper[k];
        fidelity[n_points - 1 - (half + k)] = upper[k];
    }
    const double h = 2 * x_max / static_cast<double>(n_points - 1);
    double sum = 0;
    for (std::size_t i = 0; i + 1 < n_points; ++i) {
        sum += 0.5 * h * (fidelity[i] + fidelity[i + 1]);
    }
    return sum / (2 * x_max);
}

/// c0 * exp(-c1 * t^c2) fitted to an infidelity curve.
struct StretchedExponentialFit {
    double c0;
    double c1;
    double c2;
    double rms_log_residual;
    std::size_t points_used;

    double operator()(double t) const { return c0 * std::exp(-c1 * std::pow(t, c2)); }
};

struct FidelityReport {
    std::vector<double> tf_grid;
    std::vector<double> infidelity_linear;
    std::vector<double> infidelity_faquad;
    std::optional<StretchedExponentialFit> fit;
};

struct BenchmarkParams {
    double omega0 = 100.0;
    double omegaf = 1.0;
    double x_ref = 0.0;  // 0 selects optimal_design_field(omegaf)
    double x_max = 10.0;
    std::size_t n_points = 201;
    unsigned threads = 1;
    IntegratorOptions integrator{};
};

class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Least squares on log(infidelity): for each c2 the model log c0 - c1 t^c2 is linear, so
/// the fit reduces to a one-dimensional search over c2. Points with infidelity below
/// `floor` are excluded.
inline StretchedExponentialFit fit_stretched_exponential(std::span<const double> t, std::span<const double> infid,
                                                         double floor = 1e-12)
{
    if (t.size() != infid.size()) {
        throw std::invalid_argument("fit inputs differ in length");
    }
    std::vector<double> ts;
    std::vector<double> ys;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (infid[i] > floor && t[i] > 0 && std::isfinite(infid[i])) {
            ts.push_back(t[i]);
            ys.push_back(std::log(infid[i]));
        }
    }
    if (ts.size() < 4) {
        throw FitError("stretched-exponential fit needs at least 4 usable points");
    }
    const double n = static_cast<double>(ts.size());
    struct Linear {
        double log_c0, c1, sse;
    };
    auto solve = [&](double c2) {
        double su = 0, sy = 0, suu = 0, suy = 0;
        for (std::size_t i = 0; i < ts.size(); ++i) {
            const double u = std::pow(ts[i], c2);
            su += u;
            sy += ys[i];
            suu += u * u;
            suy += u * ys[i];
        }
        const double det = n * suu - su * su;
        if (det <= 0) {
            return Linear{0, 0, std::numeric_limits<double>::infinity()};
        }
        // y = a + b u with b = -c1
        const double b = (n * suy - su * sy) / det;
        const double a = (sy - b * su) / n;
        double sse = 0;
        for (std::size_t i = 0; i < ts.size(); ++i) {
            const double e = ys[i] - a - b * std::pow(ts[i], c2);
            sse += e * e;
        }
        return Linear{a, -b, sse};
    };
    // Coarse scan over log c2, then golden-section refinement around the best bracket.
    const double lo = std::log(1e-3);
    const double hi = std::log(5.0);
    const int scan = 400;
    int best = 0;
    double best_sse = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= scan; ++i) {
        const double sse = solve(std::exp(lo + (hi - lo) * i / scan)).sse;
        if (sse < best_sse) {
            best_sse = sse;
            best = i;
        }
    }
    double a = lo + (hi - lo) * std::max(0, best - 1) / scan;
    double b = lo + (hi - lo) * std::min(scan, best + 1) / scan;
    const double inv_phi = (std::sqrt(5.0) - 1) / 2;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = solve(std::exp(c)).sse;
    double fd = solve(std::exp(d)).sse;
    for (int it = 0; it < 200 && b - a > 1e-12; ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = solve(std::exp(c)).sse;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = solve(std::exp(d)).sse;
        }
    }
    const double c2 = std::exp(0.5 * (a + b));
    const Linear lin = solve(c2);
    if (!std::isfinite(lin.sse)) {
        throw FitError("stretched-exponential fit is degenerate");
    }
    return {std::exp(lin.log_c0), lin.c1, c2, std::sqrt(lin.sse / n), ts.size()};
}

/// Infidelity sweep of the linear and FAQUAD ramps over the durations in tf_grid.
inline FidelityReport benchmark_ramps(std::span<const double> tf_grid, const BenchmarkParams& params)
{
    if (tf_grid.empty()) {
        throw std::invalid_argument("benchmark needs a nonempty duration grid");
    }
    for (std::size_t i = 0; i < tf_grid.size(); ++i) {
        if (!(tf_grid[i] > 0) || (i > 0 && !(tf_grid[i] > tf_grid[i - 1]))) {
            throw std::invalid_argument("duration grid must be positive and strictly increasing");
        }
    }
    const double x_ref = params.x_ref != 0 ? params.x_ref : optimal_design_field(params.omegaf);
    FidelityReport report;
    report.tf_grid.assign(tf_grid.begin(), tf_grid.end());
    for (double tf : tf_grid) {
        const auto lin = ControlSchedule::linear(params.omega0, params.omegaf, tf);
        const auto faq = ControlSchedule::faquad(params.omega0, params.omegaf, tf, x_ref);
        const double f_lin = average_fidelity(lin, params.x_max, params.n_points, params.threads, params.integrator);
        const double f_faq = average_fidelity(faq, params.x_max, params.n_points, params.threads, params.integrator);
        report.infidelity_linear.push_back(std::clamp(1.0 - f_lin, 0.0, 1.0));
        report.infidelity_faquad.push_back(std::clamp(1.0 - f_faq, 0.0, 1.0));
    }
    try {
        std::vector<double> scaled(report.tf_grid);
        for (auto& v : scaled) {
            v *= params.omegaf;
        }
        report.fit = fit_stretched_exponential(scaled, report.infidelity_faquad);
    } catch (const FitError&) {
        report.fit.reset();
    }
    return report;
}

/// Shortest duration after which the sampled infidelity stays below `level`, located by
/// log-log interpolation between the bracketing grid points. Empty if the curve never
/// settles below the level on the grid, or starts below it.
inline std::optional<double> duration_at_infidelity(std::span<const double> tf_grid, std::span<const double> infid,
                                                    double level)
{
    if (tf_grid.size() != infid.size() || tf_grid.empty()) {
        throw std::invalid_argument("duration_at_infidelity: mismatched inputs");
    }
    std::size_t last_above = tf_grid.size();
    for (std::size_t i = 0; i < infid.size(); ++i) {
        if (infid[i] >= level) {
            last_above = i;
        }
    }
    if (last_above == tf_grid.size() || last_above + 1 >= tf_grid.size()) {
        return std::nullopt;
    }
    const double t0 = std::log(tf_grid[last_above]);
    const double t1 = std::log(tf_grid[last_above + 1]);
    const double y0 = std::log(infid[last_above]);
    const double y1 = std::log(std::max(infid[last_above + 1], 1e-300));
    const double w = (std::log(level) - y0) / (y1 - y0);
    return std::exp(t0 + w * (t1 - t0));
}

/// `tf,infid_linear,infid_faquad`
inline void write_benchmark_csv(std::ostream& out, const FidelityReport& report)
{
    const auto old_precision = out.precision(17);
    out << "tf,infid_linear,infid_faquad\n";
    for (std::size_t i = 0; i < report.tf_grid.size(); ++i) {
        out << report.tf_grid[i] << ',' << report.infidelity_linear[i] << ',' << report.infidelity_faquad[i] << '\n';
    }
    out.precision(old_precision);
}

/// `x,p_excite`
inline void write_response_csv(std::ostream& out, std::span<const ResponsePoint> curve)
{
    const auto old_precision = out.precision(17);
    out << "x,p_excite\n";
    for (const auto& p : curve) {
        out << p.x << ',' << p.p_excite << '\n';
    }
    out.precision(old_precision);
}

}  // namespace qperceptron
