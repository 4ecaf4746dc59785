#pragma once

// Multiqubit conditional rotations built from repeated perceptron passages.
// Each cycle n contributes orientation_n * chi(w_n x - theta_n) to a common
// y-rotation angle; x is the weighted count of excited control qubits.

#include "qperceptron/activation.hpp"
#include "qperceptron/parallel.hpp"
#include "qperceptron/register.hpp"
#include "qperceptron/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

namespace qperceptron {

struct RectangleShape {
    double m1;
    double m2;
};

struct PeakShape {
    double center;
    double width;
};

struct SampledShape {
    std::vector<std::pair<double, double>> points;  // (x, angle), sorted by x
};

/// Target rotation angle profile, values in [0, pi/2].
struct TargetResponse {
    std::variant<RectangleShape, PeakShape, SampledShape> shape;

    static TargetResponse rectangle(double m1, double m2)
    {
        if (!(m1 < m2)) {
            throw std::invalid_argument("rectangle needs m1 < m2");
        }
        return {RectangleShape{m1, m2}};
    }

    static TargetResponse peak(double center, double width)
    {
        if (!(width > 0)) {
            throw std::invalid_argument("peak width must be positive");
        }
        return {PeakShape{center, width}};
    }

    static TargetResponse sampled(std::vector<std::pair<double, double>> points)
    {
        if (points.empty()) {
            throw std::invalid_argument("sampled target needs at least one point");
        }
        std::sort(points.begin(), points.end());
        return {SampledShape{std::move(points)}};
    }

    /// pi/2 strictly inside (m1, m2) and 0 elsewhere; triangular peak of half-width `width`;
    /// linear interpolation of samples.
    double angle(double x) const
    {
        constexpr double half_pi = std::numbers::pi / 2;
        if (const auto* r = std::get_if<RectangleShape>(&shape)) {
            return (x > r->m1 && x < r->m2) ? half_pi : 0.0;
        }
        if (const auto* p = std::get_if<PeakShape>(&shape)) {
            return half_pi * std::max(0.0, 1.0 - std::abs(x - p->center) / p->width);
        }
        const auto& pts = std::get<SampledShape>(shape).points;
        if (x <= pts.front().first) {
            return pts.front().second;
        }
        if (x >= pts.back().first) {
            return pts.back().second;
        }
        const auto it = std::lower_bound(pts.begin(), pts.end(), std::make_pair(x, -std::numeric_limits<double>::infinity()));
        const auto& hi = *it;
        const auto& lo = *(it - 1);
        const double s = (x - lo.first) / (hi.first - lo.first);
        return lo.second + s * (hi.second - lo.second);
    }
};

struct CompositionCycle {
    double w;
    double theta;
    int orientation;  // +1 forward passage, -1 passage with reversed fields
};

struct CompositionSpec {
    std::vector<CompositionCycle> cycles;
    ActivationKind activation = ActivationKind::algebraic();
};

/// Total y-rotation angle sum_n o_n chi(w_n x - theta_n).
inline double composition_angle(const CompositionSpec& spec, double x)
{
    double a = 0;
    for (const auto& c : spec.cycles) {
        a += c.orientation * chi(spec.activation, c.w * x - c.theta);
    }
    return a;
}

inline double composition_excitation(const CompositionSpec& spec, double x)
{
    const double s = std::sin(composition_angle(spec, x));
    return s * s;
}

/// Two opposite passages switching on at x = lo and off at x = hi with steepness w.
inline CompositionSpec rectangle_composition(double lo, double hi, double w,
                                             ActivationKind activation = ActivationKind::algebraic())
{
    return {{{w, w * lo, +1}, {w, w * hi, -1}}, activation};
}

/// Root-mean-square angle error over the grid.
inline double composition_residual(const CompositionSpec& spec, const TargetResponse& target,
                                   std::span<const double> x_grid)
{
    double s = 0;
    for (double x : x_grid) {
        const double e = composition_angle(spec, x) - target.angle(x);
        s += e * e;
    }
    return std::sqrt(s / static_cast<double>(x_grid.size()));
}

/// Integer control sums floor(m1) - 2 ... ceil(m2) + 2.
inline std::vector<double> rectangle_grid(double m1, double m2)
{
    std::vector<double> g;
    for (double x = std::floor(m1) - 2; x <= std::ceil(m2) + 2; x += 1) {
        g.push_back(x);
    }
    return g;
}

inline std::vector<double> linear_grid(double lo, double hi, std::size_t n)
{
    if (n < 2 || !(lo < hi)) {
        throw std::invalid_argument("grid needs lo < hi and at least two points");
    }
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) {
        g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return g;
}

struct SynthesisOptions {
    std::size_t restarts = 8;
    std::size_t max_iters = 4000;
    std::uint64_t seed = 7;
    double residual_threshold = 0.1;  // rms angle error (rad) accepted as converged
    ActivationKind activation = ActivationKind::algebraic();
    unsigned threads = 1;
};

struct SynthesisResult {
    CompositionSpec spec;
    double residual = 0;
    bool converged = false;
};

/// Least-squares fit of composition_angle to the target over x_grid. Every orientation
/// pattern is tried (random patterns above 6 cycles) with several seeded starts each.
/// Cycles are parameterized by (w, c) with theta = w c.
inline SynthesisResult synthesize(const TargetResponse& target, std::size_t cycles, std::span<const double> x_grid,
                                  const SynthesisOptions& opt = {})
{
    if (cycles == 0) {
        throw std::invalid_argument("need at least one cycle");
    }
    if (x_grid.empty()) {
        throw std::invalid_argument("fit grid is empty");
    }
    for (double x : x_grid) {
        if (!std::isfinite(x)) {
            throw std::invalid_argument("fit grid must be finite");
        }
    }
    if (opt.restarts == 0) {
        throw std::invalid_argument("need at least one restart");
    }
    const auto [gmin_it, gmax_it] = std::minmax_element(x_grid.begin(), x_grid.end());
    const double gmin = *gmin_it;
    const double gmax = *gmax_it;
    const double span = std::max(gmax - gmin, 1.0);
    std::vector<double> targets(x_grid.size());
    for (std::size_t i = 0; i < x_grid.size(); ++i) {
        targets[i] = target.angle(x_grid[i]);
    }

    const bool enumerate = cycles <= 6;
    const std::size_t patterns = enumerate ? (std::size_t{1} << cycles) : 1;
    const std::size_t jobs = patterns * opt.restarts;

    auto run_job = [&](std::size_t job) {
        const std::size_t pattern = job / opt.restarts;
        std::mt19937_64 rng(restart_seed(opt.seed, job));
        std::vector<int> orient(cycles);
        for (std::size_t n = 0; n < cycles; ++n) {
            orient[n] = enumerate ? (((pattern >> n) & 1U) ? -1 : 1) : (rng() & 1U ? -1 : 1);
        }
        std::uniform_real_distribution<double> uw(0.5, 8.0 / span);
        std::uniform_real_distribution<double> uc(gmin, gmax);
        std::vector<double> x0(2 * cycles);
        for (std::size_t n = 0; n < cycles; ++n) {
            x0[2 * n] = uw(rng) * span;
            x0[2 * n + 1] = uc(rng);
        }
        auto build = [&](const std::vector<double>& p) {
            CompositionSpec s;
            s.activation = opt.activation;
            for (std::size_t n = 0; n < cycles; ++n) {
                s.cycles.push_back({p[2 * n], p[2 * n] * p[2 * n + 1], orient[n]});
            }
            return s;
        };
        auto value = [&](const std::vector<double>& p) {
            const auto s = build(p);
            double c = 0;
            for (std::size_t i = 0; i < x_grid.size(); ++i) {
                const double e = composition_angle(s, x_grid[i]) - targets[i];
                c += e * e;
            }
            return c / static_cast<double>(x_grid.size());
        };
        auto value_grad = [&](const std::vector<double>& p, std::vector<double>& g) {
            g.assign(p.size(), 0.0);
            double c = 0;
            const auto s = build(p);
            for (std::size_t i = 0; i < x_grid.size(); ++i) {
                const double x = x_grid[i];
                const double e = composition_angle(s, x) - targets[i];
                c += e * e;
                for (std::size_t n = 0; n < cycles; ++n) {
                    const double w = p[2 * n];
                    const double cn = p[2 * n + 1];
                    const double d = orient[n] * dchi_dx(opt.activation, w * (x - cn));
                    g[2 * n] += 2 * e * d * (x - cn);
                    g[2 * n + 1] -= 2 * e * d * w;
                }
            }
            const double inv = 1.0 / static_cast<double>(x_grid.size());
            for (auto& v : g) {
                v *= inv;
            }
            return c * inv;
        };
        DescentOptions dopt;
        dopt.learning_rate = 10.0;
        dopt.max_iters = opt.max_iters;
        dopt.gradient_tolerance = 1e-12;
        const auto run = gradient_descent(value_grad, value, x0, dopt);
        SynthesisResult r;
        r.spec = build(run.x);
        r.residual = run.cost_trace.empty() ? std::numeric_limits<double>::infinity()
                                            : std::sqrt(run.cost_trace.back());
        return r;
    };

    const auto results = parallel_map<SynthesisResult>(jobs, opt.threads, run_job);
    SynthesisResult best;
    best.residual = std::numeric_limits<double>::infinity();
    for (const auto& r : results) {
        if (r.residual < best.residual) {
            best = r;
        }
    }
    best.converged = best.residual <= opt.residual_threshold;
    return best;
}

/// Conditional rotation of `target` by composition_angle(x) with x = sum_k w_k n_k,
/// n_k in {0, 1} the state of control qubit k.
inline void apply_composition(QuantumRegister& reg, const CompositionSpec& spec, std::size_t target,
                              std::span<const SourceWeight> source_weights)
{
    PerceptronGateSpec check;
    check.target = target;
    check.weights.assign(source_weights.begin(), source_weights.end());
    check.validate(reg.n_qubits());
    std::vector<std::size_t> sources;
    for (const auto& s : source_weights) {
        sources.push_back(s.qubit);
    }
    std::vector<double> angles(std::size_t{1} << sources.size());
    for (std::size_t k = 0; k < angles.size(); ++k) {
        double x = 0;
        for (std::size_t b = 0; b < sources.size(); ++b) {
            if ((k >> b) & 1U) {
                x += source_weights[b].weight;
            }
        }
        angles[k] = composition_angle(spec, x);
    }
    apply_sector_rotation(reg, target, sources, angles);
}

}  // namespace qperceptron
