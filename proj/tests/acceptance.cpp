// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "qperceptron/qperceptron.hpp"

#include "oracles.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace qperceptron;
using namespace qperceptron::oracle;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::vector<std::string> all_inputs(std::size_t n)
{
    std::vector<std::string> out;
    for (unsigned v = 0; v < (1U << n); ++v) {
        out.push_back(to_bits(v, n));
    }
    return out;
}

const double kXRef = optimal_design_field(1.0);

Outcome optimal_field()
{
    const double y = optimal_design_field(1.0);
    // independent maximization of the FAQUAD adiabatic parameter over the design field
    const auto [x_brent, neg_mu] = boost::math::tools::brent_find_minima(
        [](double x) { return -faquad_mu_profile(x, std::numeric_limits<double>::infinity(), 1.0); }, 0.5, 3.0, 50);
    const double golden_root = std::sqrt(std::numbers::phi);
    const bool ok = std::abs(y - 1.272) <= 1e-3 && std::abs(y - golden_root) <= 1e-6 &&
                    std::abs(x_brent - golden_root) <= 1e-6;
    return {ok, fmt("x*=%.9f, brent %.9f, sqrt(phi)=%.9f, max mu*tf=%.6f", y, x_brent, golden_root, -neg_mu)};
}

Outcome faquad_constancy()
{
    const auto s = faquad_schedule(100, 1, 10, kXRef);
    double lo = 1e300;
    double hi = 0;
    double sum = 0;
    const int n = 2001;
    for (int i = 0; i < n; ++i) {
        const double mu = adiabatic_mu(s, kXRef, 10.0 * i / (n - 1));
        lo = std::min(lo, mu);
        hi = std::max(hi, mu);
        sum += mu;
    }
    const double spread = (hi - lo) / (sum / n);
    const double dev = faquad_ode_deviation(100, 1, 10, kXRef);
    return {spread <= 1e-8 && dev <= 1e-6, fmt("mu spread %.2e, closed form vs ODE %.2e", spread, dev)};
}

Outcome adiabatic_response()
{
    const auto s = faquad_schedule(100, 1, 10, kXRef);
    const auto grid = symmetric_grid(10, 201);
    const auto curve = response_curve(s, grid, default_thread_count());
    double worst = 0;
    for (const auto& p : curve) {
        worst = std::max(worst, std::abs(p.p_excite - eval_f(ActivationKind::algebraic(), p.x)));
    }
    return {worst <= 0.01, fmt("max |p - g| = %.4g over 201 points", worst)};
}

FidelityReport sweep_report()
{
    std::vector<double> grid;
    const std::size_t n = 25;
    for (std::size_t i = 0; i < n; ++i) {
        grid.push_back(0.1 * std::pow(1000.0, static_cast<double>(i) / (n - 1)));
    }
    BenchmarkParams params;
    params.threads = default_thread_count();
    return benchmark_ramps(grid, params);
}

Outcome speedup(const FidelityReport& r)
{
    const auto t_lin = duration_at_infidelity(r.tf_grid, r.infidelity_linear, 1e-2);
    const auto t_faq = duration_at_infidelity(r.tf_grid, r.infidelity_faquad, 1e-2);
    if (!t_lin || !t_faq) {
        return {false, "infidelity 1e-2 not crossed on the duration grid"};
    }
    const double ratio = *t_lin / *t_faq;
    return {ratio >= 100, fmt("Omega0=100: tf(linear)=%.3f, tf(faquad)=%.3f, ratio %.2f (needs >= 100)", *t_lin, *t_faq,
                              ratio)};
}

Outcome fit_shape(const FidelityReport& r)
{
    if (!r.fit) {
        return {false, "stretched-exponential fit failed"};
    }
    const auto& f = *r.fit;
    return {f.c2 >= 0.08 && f.c2 <= 0.30,
            fmt("c0=%.4g c1=%.4g c2=%.4f (rms log residual %.3g, %zu points)", f.c0, f.c1, f.c2, f.rms_log_residual,
                f.points_used)};
}

Outcome heisenberg()
{
    std::mt19937_64 rng(2024);
    double worst = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const auto psi = random_state(3, rng);
        const std::size_t t = trial % 3;
        std::vector<std::size_t> sources;
        for (std::size_t q = 0; q < 3; ++q) {
            if (q != t) {
                sources.push_back(q);
            }
        }
        const auto g = random_gate(t, sources, rng);
        auto out = psi;
        apply_ideal_perceptron(out, g);
        worst = std::max(worst, std::abs(pauli_expectation(out, t, 'z') - sector_expectation(psi, g, 1, 0, 0, 1)));
        worst = std::max(worst, std::abs(pauli_expectation(out, t, 'x') - sector_expectation(psi, g, 0, -1, 1, 0)));
    }
    return {worst <= 1e-10, fmt("max deviation %.2e on 200 states", worst)};
}

Outcome oracle_equivalences()
{
    std::mt19937_64 rng(4);
    // (a) sector-decomposed hardware gate vs dense integration
    const auto s = faquad_schedule(100, 1, 2, kXRef);
    double err_a = 0;
    for (std::size_t target : {0u, 3u}) {
        const auto psi = random_state(4, rng);
        std::vector<std::size_t> sources;
        for (std::size_t q = 0; q < 4; ++q) {
            if (q != target) {
                sources.push_back(q);
            }
        }
        auto g = random_gate(target, sources, rng);
        g.mode = HardwareMode{s};
        auto sector = psi;
        apply_hardware_perceptron(sector, g);
        auto dense = psi;
        apply_hadamard(dense, target);
        dense = dense_evolve(dense, g, s, 200000);
        for (std::size_t i = 0; i < 16; ++i) {
            err_a = std::max(err_a, std::abs(sector.amplitude(i) - dense.amplitude(i)));
        }
    }
    // (b) ideal forward pass vs classical mixture on random 2-2-1 nets
    double err_b = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const auto net = random_initialization(NetworkSpec::layered(2, {2, 1}), 3.0, rng());
        for (const auto& in : all_inputs(2)) {
            err_b = std::max(err_b, std::abs(forward(net, in).p_out - classical_mixture_oracle(net, in)));
        }
    }
    // (c) batch state vs separate passes
    double err_c = 0;
    const auto d = prime_dataset(3);
    for (int trial = 0; trial < 10; ++trial) {
        const auto net = random_initialization(NetworkSpec::layered(3, {2, 1}), 2.0, rng());
        const auto p = batch_state_forward(net, d);
        for (std::size_t i = 0; i < d.size(); ++i) {
            err_c = std::max(err_c, std::abs(p[i] - forward(net, d.pairs[i].x).p_out));
        }
    }
    return {err_a <= 1e-8 && err_b <= 1e-10 && err_c <= 1e-10,
            fmt("(a) %.2e  (b) %.2e  (c) %.2e", err_a, err_b, err_c)};
}

Outcome gradient_check()
{
    std::mt19937_64 rng(10);
    struct Shape {
        std::size_t n;
        std::vector<std::size_t> layers;
    };
    const std::vector<Shape> shapes{{2, {2, 1}}, {3, {2, 1}}, {2, {3, 1}}, {3, {1, 1, 1}}, {1, {1, 1, 1, 1, 1}}};
    double worst = 0;  // max |a - b| / (max(|a|, |b|) + 1e-4)
    bool ok = true;
    std::size_t checked = 0;
    const double h = 1e-5;
    for (const auto& sh : shapes) {
        for (auto act : {ActivationKind::algebraic(), ActivationKind::logistic()}) {
            Dataset d;
            d.n_bits = sh.n;
            std::bernoulli_distribution coin(0.5);
            for (const auto& x : all_inputs(sh.n)) {
                d.pairs.push_back({x, coin(rng) ? 1.0 : 0.0});
            }
            const auto net = random_initialization(NetworkSpec::layered(sh.n, sh.layers, act), 1.5, rng());
            const auto g = cost_gradient(net, d);
            auto check = [&](double analytic, const std::function<void(NetworkSpec&, double)>& shift) {
                auto plus = net;
                auto minus = net;
                shift(plus, h);
                shift(minus, -h);
                const double fd = (cross_entropy_cost(plus, d) - cross_entropy_cost(minus, d)) / (2 * h);
                const double scale = std::max(std::abs(analytic), std::abs(fd));
                ok = ok && std::abs(analytic - fd) <= 1e-5 * scale + 1e-9;
                worst = std::max(worst, std::abs(analytic - fd) / (scale + 1e-4));
                ++checked;
            };
            for (std::size_t i = 0; i < net.J.size(); ++i) {
                if (net.mask[i] != 0) {
                    check(g.dJ[i], [i](NetworkSpec& n, double e) { n.J[i] += e; });
                }
            }
            for (std::size_t p = 0; p < net.b.size(); ++p) {
                check(g.db[p], [p](NetworkSpec& n, double e) { n.b[p] += e; });
            }
        }
    }
    return {ok, fmt("%zu components, worst relative error %.2e", checked, worst)};
}

Outcome prime_toy_model()
{
    std::string detail;
    bool ok = true;
    for (std::size_t bits : {3u, 4u}) {
        const auto d = prime_dataset(bits);
        TrainConfig cfg;
        cfg.restarts = 10;
        cfg.seed = 1;
        const auto net0 = random_initialization(NetworkSpec::layered(bits, {4, 1}), cfg.init_scale,
                                                restart_seed(cfg.seed, 0));
        const auto rep = train(net0, d, cfg);
        const auto hits = static_cast<std::size_t>(std::lround(rep.accuracy * static_cast<double>(d.size())));
        const std::size_t need = bits == 3 ? 8 : 15;
        ok = ok && hits >= need;
        detail += fmt("%zu bits %zu/%zu (restart %zu, %zu iters, cost %.3g)  ", bits, hits, d.size(), rep.restart,
                      rep.iterations, rep.cost_trace.back());
    }
    return {ok, detail};
}

Outcome xor_synthesis()
{
    const auto res = synthesize(TargetResponse::rectangle(0, 2), 2, rectangle_grid(0, 2));
    double inside = 1;
    double outside = 0;
    for (double x : rectangle_grid(0, 2)) {
        const double p = composition_excitation(res.spec, x);
        if (x > 0 && x < 2) {
            inside = std::min(inside, p);
        } else {
            outside = std::max(outside, p);
        }
    }
    // CNOT: one control, flip iff the control is excited
    double cnot_hit = 1;
    double cnot_miss = 0;
    const std::vector<SourceWeight> one{{0, 1.0}};
    for (const std::string c : {"0", "1"}) {
        for (const std::string t : {"0", "1"}) {
            auto reg = init_basis(2, c + t);
            apply_composition(reg, res.spec, 1, one);
            const double flip = t == "0" ? excitation_probability(reg, 1) : 1 - excitation_probability(reg, 1);
            if (c == "1") {
                cnot_hit = std::min(cnot_hit, flip);
            } else {
                cnot_miss = std::max(cnot_miss, flip);
            }
        }
    }
    // XOR of two controls onto a third qubit
    double xor_hit = 1;
    double xor_miss = 0;
    const std::vector<SourceWeight> two{{0, 1.0}, {1, 1.0}};
    for (const auto& in : all_inputs(2)) {
        auto reg = init_basis(3, in + "0");
        apply_composition(reg, res.spec, 2, two);
        const double p = excitation_probability(reg, 2);
        if ((in[0] == '1') != (in[1] == '1')) {
            xor_hit = std::min(xor_hit, p);
        } else {
            xor_miss = std::max(xor_miss, p);
        }
    }
    const bool ok = inside >= 0.95 && outside <= 0.05 && cnot_hit >= 0.95 && cnot_miss <= 0.05 && xor_hit >= 0.95 &&
                    xor_miss <= 0.05;
    return {ok, fmt("rect in>=%.4f out<=%.4f; CNOT %.4f/%.4f; XOR %.4f/%.4f (residual %.3g)", inside, outside, cnot_hit,
                    cnot_miss, xor_hit, xor_miss, res.residual)};
}

Outcome approximator_convergence()
{
    const ClassicalSum cs{2, {0.6, -0.9, 0.4}, {1.2, -0.7, 0.3, 2.0, -1.5, -0.4}, {0.2, -0.5, 0.9}};
    auto err = [&](double lam) {
        const auto a = build_universal_approximator(cs, lam);
        double e = 0;
        for (const auto& in : all_inputs(2)) {
            e = std::max(e, std::abs(a.readout(forward(a.net, in).p_out) - cs.evaluate(ActivationKind::algebraic(), in)));
        }
        return e;
    };
    const double e4 = err(0.04);
    const double e2 = err(0.02);
    const double e1 = err(0.01);
    const double r1 = e4 / e2;
    const double r2 = e2 / e1;
    const bool ok = std::abs(r1 - 2) <= 0.5 && std::abs(r2 - 2) <= 0.5;
    return {ok, fmt("errors %.3e %.3e %.3e, halving ratios %.3f %.3f (needs 2 +- 0.5)", e4, e2, e1, r1, r2)};
}

Outcome robustness()
{
    const auto base = faquad_schedule(100, 1, 10, kXRef);
    const auto grid = symmetric_grid(10, 201);
    std::string detail;
    bool ok = true;
    for (double eps : {0.1, 0.5}) {
        const auto curve = response_curve(perturbed_schedule(base, eps), grid, default_thread_count());
        double worst_drop = 0;
        for (std::size_t i = 1; i < curve.size(); ++i) {
            worst_drop = std::max(worst_drop, curve[i - 1].p_excite - curve[i].p_excite);
        }
        ok = ok && worst_drop <= 0;
        detail += fmt("eps=%.1f largest drop %.2e, p(-10)=%.4f p(10)=%.4f  ", eps, worst_drop, curve.front().p_excite,
                      curve.back().p_excite);
    }
    return {ok, detail};
}

}  // namespace

int main()
{
    using Clock = std::chrono::steady_clock;
    int failures = 0;
    auto report = [&](int id, const char* name, const std::function<Outcome()>& run) {
        const auto t0 = Clock::now();
        const auto o = run();
        const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
        std::printf("%s %2d %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
        std::fflush(stdout);
        failures += o.pass ? 0 : 1;
    };
    report(1, "optimal design field", optimal_field);
    report(2, "FAQUAD constancy", faquad_constancy);
    report(3, "adiabatic response", adiabatic_response);
    FidelityReport sweep;
    report(4, "speedup at infidelity 1e-2", [&] {
        sweep = sweep_report();
        return speedup(sweep);
    });
    report(5, "fit shape", [&] { return fit_shape(sweep); });
    report(6, "Heisenberg identities", heisenberg);
    report(7, "oracle equivalences", oracle_equivalences);
    report(8, "gradient check", gradient_check);
    report(9, "prime toy model", prime_toy_model);
    report(10, "XOR/rectangle synthesis", xor_synthesis);
    report(11, "approximator lambda convergence", approximator_convergence);
    report(12, "perturbed FAQUAD monotone", robustness);
    std::printf("%d of 12 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
