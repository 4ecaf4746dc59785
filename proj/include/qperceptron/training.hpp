#pragma once

// Classical training of quantum perceptron networks (ideal gates).
//
// All inputs of a dataset are evaluated at once through the superposition
//     |xi> = S^{-1/2} sum_i |X_i, 0...0>,
// and the gradient of the cross entropy comes from a single adjoint sweep over
// the gate sequence on that state.

#include "qperceptron/activation.hpp"
#include "qperceptron/network.hpp"
#include "qperceptron/register.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace qperceptron {

struct Sample {
    std::string x;  // character k is input qubit k
    double y;
};

struct Dataset {
    std::size_t n_bits = 0;
    std::vector<Sample> pairs;

    std::size_t size() const { return pairs.size(); }

    void validate() const
    {
        if (pairs.empty()) {
            throw std::invalid_argument("dataset is empty");
        }
        std::set<std::string> seen;
        for (const auto& s : pairs) {
            if (s.x.size() != n_bits) {
                throw std::invalid_argument("sample '" + s.x + "' has the wrong number of bits");
            }
            if (s.x.find_first_not_of("01") != std::string::npos) {
                throw std::invalid_argument("sample '" + s.x + "' is not a bitstring");
            }
            if (!(s.y >= 0 && s.y <= 1)) {
                throw std::invalid_argument("labels must lie in [0, 1]");
            }
            if (!seen.insert(s.x).second) {
                throw std::invalid_argument("duplicate sample '" + s.x + "'");
            }
        }
    }
};

inline bool is_prime(unsigned v)
{
    if (v < 2) {
        return false;
    }
    for (unsigned d = 2; d * d <= v; ++d) {
        if (v % d == 0) {
            return false;
        }
    }
    return true;
}

/// Binary string of v, most significant bit first.
inline std::string to_bits(unsigned v, std::size_t n_bits)
{
    std::string s(n_bits, '0');
    for (std::size_t i = 0; i < n_bits; ++i) {
        if ((v >> (n_bits - 1 - i)) & 1U) {
            s[i] = '1';
        }
    }
    return s;
}

/// All 2^n integers, labelled 1 iff prime. Bitstrings are written MSB first.
inline Dataset prime_dataset(std::size_t n_bits)
{
    if (n_bits < 2 || n_bits > 8) {
        throw std::invalid_argument("prime dataset supports 2 to 8 bits");
    }
    Dataset d;
    d.n_bits = n_bits;
    for (unsigned v = 0; v < (1U << n_bits); ++v) {
        d.pairs.push_back({to_bits(v, n_bits), is_prime(v) ? 1.0 : 0.0});
    }
    return d;
}

inline constexpr double kProbabilityClamp = 1e-300;

struct BatchEvaluation {
    QuantumRegister reg;
    std::vector<double> p;  // P(output = 1 | X_i)
    std::vector<double> q;  // P(output = 0 | X_i), summed separately so 1 - p never cancels
};

inline void check_network_dataset(const NetworkSpec& net, const Dataset& data)
{
    net.validate();
    data.validate();
    if (data.n_bits != net.n_inputs) {
        throw std::invalid_argument("dataset width does not match the network inputs");
    }
}

inline std::size_t input_index(const std::string& bits)
{
    std::size_t idx = 0;
    for (std::size_t k = 0; k < bits.size(); ++k) {
        if (bits[k] == '1') {
            idx |= std::size_t{1} << k;
        }
    }
    return idx;
}

inline QuantumRegister batch_input_state(const NetworkSpec& net, const Dataset& data)
{
    QuantumRegister reg(net.n_qubits());
    auto amps = reg.amplitudes();
    amps[0] = 0.0;
    const double a = 1.0 / std::sqrt(static_cast<double>(data.size()));
    for (const auto& s : data.pairs) {
        amps[input_index(s.x)] = a;
    }
    return reg;
}

/// Conditional output statistics of every sample, read off the evolved batch state.
inline void read_batch_probabilities(const NetworkSpec& net, const Dataset& data, BatchEvaluation& ev)
{
    const std::size_t n_in = net.n_inputs;
    const std::size_t in_mask = (std::size_t{1} << n_in) - 1;
    const std::size_t out = net.output_qubit();
    std::vector<double> ones(std::size_t{1} << n_in, 0.0);
    std::vector<double> zeros(std::size_t{1} << n_in, 0.0);
    const auto amps = ev.reg.amplitudes();
    for (std::size_t i = 0; i < amps.size(); ++i) {
        const double w = std::norm(amps[i]);
        (qubit_is_set(i, out) ? ones : zeros)[i & in_mask] += w;
    }
    ev.p.resize(data.size());
    ev.q.resize(data.size());
    for (std::size_t s = 0; s < data.size(); ++s) {
        const std::size_t idx = input_index(data.pairs[s].x);
        const double total = ones[idx] + zeros[idx];
        ev.p[s] = ones[idx] / total;
        ev.q[s] = zeros[idx] / total;
    }
}

inline BatchEvaluation batch_evaluate(const NetworkSpec& net, const Dataset& data)
{
    check_network_dataset(net, data);
    BatchEvaluation ev{batch_input_state(net, data), {}, {}};
    for (const auto& g : net.gates()) {
        apply_ideal_perceptron(ev.reg, g);
    }
    read_batch_probabilities(net, data, ev);
    return ev;
}

/// p(X_i) for every sample from one application of the network to |xi>.
inline std::vector<double> batch_state_forward(const NetworkSpec& net, const Dataset& data)
{
    return batch_evaluate(net, data).p;
}

inline double cross_entropy(const Dataset& data, const std::vector<double>& p, const std::vector<double>& q)
{
    double c = 0;
    for (std::size_t s = 0; s < data.size(); ++s) {
        const double y = data.pairs[s].y;
        if (y > 0) {
            c -= y * std::log(std::max(p[s], kProbabilityClamp));
        }
        if (y < 1) {
            c -= (1 - y) * std::log(std::max(q[s], kProbabilityClamp));
        }
    }
    return c / static_cast<double>(data.size());
}

/// C = -(1/S) sum_i [Y_i log p_i + (1 - Y_i) log(1 - p_i)].
inline double cross_entropy_cost(const NetworkSpec& net, const Dataset& data, const GateMode& mode = IdealMode{})
{
    if (std::holds_alternative<IdealMode>(mode)) {
        const auto ev = batch_evaluate(net, data);
        return cross_entropy(data, ev.p, ev.q);
    }
    check_network_dataset(net, data);
    std::vector<double> p(data.size());
    std::vector<double> q(data.size());
    for (std::size_t s = 0; s < data.size(); ++s) {
        p[s] = forward(net, data.pairs[s].x, mode).p_out;
        q[s] = 1 - p[s];
    }
    return cross_entropy(data, p, q);
}

inline double accuracy(const Dataset& data, const std::vector<double>& p)
{
    std::size_t hits = 0;
    for (std::size_t s = 0; s < data.size(); ++s) {
        if ((p[s] >= 0.5) == (data.pairs[s].y >= 0.5)) {
            ++hits;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(data.size());
}

struct CostGradient {
    double cost = 0;
    std::vector<double> dJ;  // same shape as NetworkSpec::J, zero where masked out
    std::vector<double> db;
};

/// Cost and its exact gradient with respect to J and b.
inline CostGradient cost_gradient(const NetworkSpec& net, const Dataset& data)
{
    if (net.activation.family == ActivationKind::Family::Step) {
        throw std::invalid_argument("step activation has no usable gradient");
    }
    auto ev = batch_evaluate(net, data);
    const std::size_t S = data.size();
    CostGradient grad;
    grad.cost = cross_entropy(data, ev.p, ev.q);
    grad.dJ.assign(net.J.size(), 0.0);
    grad.db.assign(net.b.size(), 0.0);

    // Gates never rotate inputs, so p_i = S <Pi_1 Pi_{X_i}> and q_i = S <Pi_0 Pi_{X_i}>.
    // dC/dtheta = 2 Re <lambda| d psi>, lambda = O psi with the diagonal observable
    // O = sum_i [-(Y_i / p_i) Pi_1 + -((1 - Y_i) / q_i) Pi_0] Pi_{X_i}.
    const std::size_t n_in = net.n_inputs;
    const std::size_t in_mask = (std::size_t{1} << n_in) - 1;
    const std::size_t out = net.output_qubit();
    std::vector<double> c_one(std::size_t{1} << n_in, 0.0);
    std::vector<double> c_zero(std::size_t{1} << n_in, 0.0);
    for (std::size_t s = 0; s < S; ++s) {
        const double y = data.pairs[s].y;
        double dp = 0;
        if (ev.p[s] > kProbabilityClamp && y > 0) {
            dp -= y / ev.p[s];
        }
        double dq = 0;
        if (ev.q[s] > kProbabilityClamp && y < 1) {
            dq -= (1 - y) / ev.q[s];
        }
        const std::size_t idx = input_index(data.pairs[s].x);
        c_one[idx] = dp;
        c_zero[idx] = dq;
    }

    auto psi = std::move(ev.reg);
    QuantumRegister lambda = psi;
    {
        auto l = lambda.amplitudes();
        for (std::size_t i = 0; i < l.size(); ++i) {
            l[i] *= qubit_is_set(i, out) ? c_one[i & in_mask] : c_zero[i & in_mask];
        }
    }

    const auto gates = net.gates();
    for (std::size_t gi = gates.size(); gi-- > 0;) {
        const auto& g = gates[gi];
        const auto sources = g.source_qubits();
        const auto fields = g.field_table();
        std::vector<double> angles(fields.size());
        std::vector<double> slopes(fields.size());
        for (std::size_t k = 0; k < fields.size(); ++k) {
            angles[k] = -chi(g.activation, fields[k]);
            slopes[k] = dchi_dx(g.activation, fields[k]);
        }
        // Step back: psi <- U^dag psi, then accumulate <lambda| dU |psi> per sector.
        apply_sector_rotation(psi, g.target, sources, angles);
        std::vector<double> sector(fields.size(), 0.0);
        const auto pa = psi.amplitudes();
        const auto la = lambda.amplitudes();
        for_each_pair(psi, g.target, [&](std::size_t i0, std::size_t i1) {
            const std::size_t k = sector_key(i0, sources);
            const double c = std::cos(-angles[k]);
            const double s = std::sin(-angles[k]);
            // dR/dphi = [[-s, -c], [c, -s]]
            const Complex d0 = -s * pa[i0] - c * pa[i1];
            const Complex d1 = c * pa[i0] - s * pa[i1];
            sector[k] += 2 * std::real(std::conj(la[i0]) * d0 + std::conj(la[i1]) * d1);
        });
        apply_sector_rotation(lambda, g.target, sources, angles);

        const std::size_t p = gi;
        for (std::size_t k = 0; k < sector.size(); ++k) {
            const double dx = sector[k] * slopes[k];
            grad.db[p] += dx;
            for (std::size_t b = 0; b < sources.size(); ++b) {
                const double z = ((k >> b) & 1U) ? 1.0 : -1.0;
                grad.dJ[net.index(p, sources[b])] += dx * z;
            }
        }
    }
    return grad;
}

/// Trainable parameters: masked-in J entries in row-major order, then b.
inline std::vector<double> pack_parameters(const NetworkSpec& net)
{
    std::vector<double> v;
    for (std::size_t i = 0; i < net.J.size(); ++i) {
        if (net.mask[i] != 0) {
            v.push_back(net.J[i]);
        }
    }
    v.insert(v.end(), net.b.begin(), net.b.end());
    return v;
}

inline void unpack_parameters(NetworkSpec& net, const std::vector<double>& v)
{
    std::size_t n = 0;
    for (std::size_t i = 0; i < net.J.size(); ++i) {
        if (net.mask[i] != 0) {
            net.J.at(i) = v.at(n++);
        }
    }
    for (auto& b : net.b) {
        b = v.at(n++);
    }
    if (n != v.size()) {
        throw std::invalid_argument("parameter vector has the wrong length");
    }
}

inline std::vector<double> pack_gradient(const NetworkSpec& net, const CostGradient& g)
{
    std::vector<double> v;
    for (std::size_t i = 0; i < net.J.size(); ++i) {
        if (net.mask[i] != 0) {
            v.push_back(g.dJ[i]);
        }
    }
    v.insert(v.end(), g.db.begin(), g.db.end());
    return v;
}

/// Masked-in weights and all biases drawn uniformly from [-scale, scale].
inline NetworkSpec random_initialization(NetworkSpec net, double scale, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-scale, scale);
    auto params = pack_parameters(net);
    for (auto& v : params) {
        v = u(rng);
    }
    unpack_parameters(net, params);
    return net;
}

struct DescentOptions {
    double learning_rate = 1.0;
    std::size_t max_iters = 5000;
    std::size_t max_halvings = 30;
    double gradient_tolerance = 1e-9;
};

struct DescentResult {
    std::vector<double> x;
    std::vector<double> cost_trace;
    std::size_t iterations = 0;
    bool diverged = false;
};

/// Gradient descent with a halving line search. `value_grad` returns the cost and fills the
/// gradient; `value` returns the cost only; `stop` may end the run early.
inline DescentResult gradient_descent(const std::function<double(const std::vector<double>&, std::vector<double>&)>& value_grad,
                                      const std::function<double(const std::vector<double>&)>& value,
                                      std::vector<double> x0, const DescentOptions& opt,
                                      const std::function<bool(const std::vector<double>&)>& stop = {})
{
    if (!(opt.learning_rate > 0)) {
        throw std::invalid_argument("learning rate must be positive");
    }
    DescentResult r;
    r.x = std::move(x0);
    std::vector<double> g(r.x.size());
    double cost = value_grad(r.x, g);
    if (!std::isfinite(cost)) {
        r.diverged = true;
        return r;
    }
    r.cost_trace.push_back(cost);
    std::vector<double> trial(r.x.size());
    for (; r.iterations < opt.max_iters; ++r.iterations) {
        if (stop && stop(r.x)) {
            break;
        }
        double gnorm = 0;
        for (double v : g) {
            gnorm += v * v;
        }
        if (std::sqrt(gnorm) < opt.gradient_tolerance) {
            break;
        }
        double step = opt.learning_rate;
        bool accepted = false;
        for (std::size_t h = 0; h <= opt.max_halvings; ++h, step *= 0.5) {
            for (std::size_t i = 0; i < trial.size(); ++i) {
                trial[i] = r.x[i] - step * g[i];
            }
            const double c = value(trial);
            if (std::isfinite(c) && c < cost) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            break;
        }
        r.x = trial;
        cost = value_grad(r.x, g);
        if (!std::isfinite(cost)) {
            r.diverged = true;
            break;
        }
        r.cost_trace.push_back(cost);
    }
    return r;
}

struct TrainConfig {
    double learning_rate = 1.0;
    std::size_t max_iters = 5000;
    std::uint64_t seed = 1;
    double init_scale = 0.5;
    std::size_t restarts = 10;
    double gradient_tolerance = 1e-9;
    bool stop_on_perfect_accuracy = true;

    void validate() const
    {
        if (!(learning_rate > 0) || !std::isfinite(learning_rate)) {
            throw std::invalid_argument("learning_rate must be positive");
        }
        if (restarts == 0) {
            throw std::invalid_argument("restarts must be at least 1");
        }
        if (!(init_scale >= 0) || !std::isfinite(init_scale)) {
            throw std::invalid_argument("init_scale must be nonnegative");
        }
    }
};

struct TrainReport {
    std::vector<double> cost_trace;
    NetworkSpec final_params;
    double accuracy = 0;
    std::size_t restart = 0;  // index of the restart that produced final_params
    std::size_t iterations = 0;
};

/// Seed of restart r (r >= 1); restart 0 starts from net0.
inline std::uint64_t restart_seed(std::uint64_t seed, std::size_t r)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(r)};
    std::uint32_t out[2];
    seq.generate(out, out + 2);
    return (std::uint64_t{out[0]} << 32) | out[1];
}

inline TrainReport train(const NetworkSpec& net0, const Dataset& data, const TrainConfig& config)
{
    config.validate();
    check_network_dataset(net0, data);
    if (net0.activation.family == ActivationKind::Family::Step) {
        throw std::invalid_argument("step activation cannot be trained by gradient descent");
    }

    DescentOptions opt;
    opt.learning_rate = config.learning_rate;
    opt.max_iters = config.max_iters;
    opt.gradient_tolerance = config.gradient_tolerance;

    std::optional<TrainReport> best;
    double best_cost = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < config.restarts; ++r) {
        NetworkSpec work = r == 0 ? net0 : random_initialization(net0, config.init_scale, restart_seed(config.seed, r));
        auto value_grad = [&](const std::vector<double>& x, std::vector<double>& g) {
            unpack_parameters(work, x);
            const auto cg = cost_gradient(work, data);
            g = pack_gradient(work, cg);
            return cg.cost;
        };
        auto value = [&](const std::vector<double>& x) {
            unpack_parameters(work, x);
            return cross_entropy_cost(work, data);
        };
        auto perfect = [&](const std::vector<double>& x) {
            if (!config.stop_on_perfect_accuracy) {
                return false;
            }
            unpack_parameters(work, x);
            return accuracy(data, batch_state_forward(work, data)) == 1.0;
        };
        const auto run = gradient_descent(value_grad, value, pack_parameters(work), opt, perfect);
        if (run.diverged || run.cost_trace.empty()) {
            continue;
        }
        unpack_parameters(work, run.x);
        TrainReport rep;
        rep.cost_trace = run.cost_trace;
        rep.accuracy = accuracy(data, batch_state_forward(work, data));
        rep.final_params = work;
        rep.restart = r;
        rep.iterations = run.iterations;
        const double cost = run.cost_trace.back();
        if (!best || rep.accuracy > best->accuracy || (rep.accuracy == best->accuracy && cost < best_cost)) {
            best = std::move(rep);
            best_cost = cost;
        }
        if (best->accuracy == 1.0 && config.stop_on_perfect_accuracy) {
            break;
        }
    }
    if (!best) {
        throw std::runtime_error("every training restart diverged");
    }
    return *best;
}

/// Least-squares fit of Q(s) = sum_j alpha_j f(w_j . s - theta_j) to the dataset labels
/// (inputs as spins s_k = +-1). Restarts draw every parameter from [-init_scale, init_scale].
struct ClassicalFit {
    ClassicalSum sum;
    double max_error = 0;
    double cost = 0;
};

inline ClassicalFit fit_classical_sum(const Dataset& data, std::size_t n_hidden, const TrainConfig& config,
                                      ActivationKind activation = ActivationKind::algebraic())
{
    config.validate();
    data.validate();
    if (n_hidden == 0) {
        throw std::invalid_argument("need at least one hidden term");
    }
    const std::size_t N = data.n_bits;
    const std::size_t M = n_hidden;
    const std::size_t n_params = M * (N + 2);  // alpha, w, theta
    auto unpack = [&](const std::vector<double>& x) {
        ClassicalSum cs;
        cs.n_inputs = N;
        cs.alpha.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(M));
        cs.w.assign(x.begin() + static_cast<std::ptrdiff_t>(M), x.begin() + static_cast<std::ptrdiff_t>(M + M * N));
        cs.theta.assign(x.begin() + static_cast<std::ptrdiff_t>(M + M * N), x.end());
        return cs;
    };
    auto value = [&](const std::vector<double>& x) {
        const auto cs = unpack(x);
        double c = 0;
        for (const auto& s : data.pairs) {
            const double e = cs.evaluate(activation, s.x) - s.y;
            c += e * e;
        }
        return c / static_cast<double>(data.size());
    };
    auto value_grad = [&](const std::vector<double>& x, std::vector<double>& g) {
        const auto cs = unpack(x);
        g.assign(n_params, 0.0);
        double c = 0;
        for (const auto& s : data.pairs) {
            const double e = cs.evaluate(activation, s.x) - s.y;
            c += e * e;
            for (std::size_t j = 0; j < M; ++j) {
                const double xj = cs.hidden_field(j, s.x);
                const double fj = eval_f(activation, xj);
                const double dfj = df_dx(activation, xj);
                g[j] += 2 * e * fj;
                for (std::size_t k = 0; k < N; ++k) {
                    g[M + j * N + k] += 2 * e * cs.alpha[j] * dfj * (s.x[k] == '1' ? 1.0 : -1.0);
                }
                g[M + M * N + j] -= 2 * e * cs.alpha[j] * dfj;
            }
        }
        const double inv = 1.0 / static_cast<double>(data.size());
        for (auto& v : g) {
            v *= inv;
        }
        return c * inv;
    };

    DescentOptions opt;
    opt.learning_rate = config.learning_rate;
    opt.max_iters = config.max_iters;
    opt.gradient_tolerance = config.gradient_tolerance;

    std::optional<ClassicalFit> best;
    for (std::size_t r = 0; r < config.restarts; ++r) {
        std::mt19937_64 rng(restart_seed(config.seed, r));
        std::uniform_real_distribution<double> u(-config.init_scale, config.init_scale);
        std::vector<double> x0(n_params);
        for (auto& v : x0) {
            v = u(rng);
        }
        const auto run = gradient_descent(value_grad, value, x0, opt);
        if (run.diverged || run.cost_trace.empty()) {
            continue;
        }
        ClassicalFit fit;
        fit.sum = unpack(run.x);
        fit.cost = run.cost_trace.back();
        for (const auto& s : data.pairs) {
            fit.max_error = std::max(fit.max_error, std::abs(fit.sum.evaluate(activation, s.x) - s.y));
        }
        if (!best || fit.cost < best->cost) {
            best = std::move(fit);
        }
    }
    if (!best) {
        throw std::runtime_error("every fit restart diverged");
    }
    return *best;
}

}  // namespace qperceptron
