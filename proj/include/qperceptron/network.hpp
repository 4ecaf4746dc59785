#pragma once

// Feed-forward quantum perceptron networks.
//
// Qubit layout: inputs 0..N-1, then the perceptrons of each layer in order; the
// output perceptron is the last qubit. Perceptron p (0-based, over all layers)
// lives on qubit N + p.
//
// The field seen by perceptron p is
//     x_p = sum_k mask[p][k] J[p][k] sz_k + b[p],
// so in gate terms the threshold is theta_p = -b[p].

#include "qperceptron/activation.hpp"
#include "qperceptron/control.hpp"
#include "qperceptron/dynamics.hpp"
#include "qperceptron/register.hpp"

#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qperceptron {

struct NetworkSpec {
    std::size_t n_inputs = 0;
    std::vector<std::size_t> layer_sizes;  // hidden layers, then the single output
    std::vector<int> mask;                 // P x (N + P), row-major
    std::vector<double> J;                 // P x (N + P), row-major
    std::vector<double> b;                 // P
    ActivationKind activation = ActivationKind::algebraic();

    std::size_t n_perceptrons() const
    {
        return std::accumulate(layer_sizes.begin(), layer_sizes.end(), std::size_t{0});
    }
    std::size_t n_qubits() const { return n_inputs + n_perceptrons(); }
    std::size_t output_qubit() const { return n_qubits() - 1; }
    std::size_t index(std::size_t p, std::size_t k) const { return p * n_qubits() + k; }

    double weight(std::size_t p, std::size_t k) const { return mask[index(p, k)] != 0 ? J[index(p, k)] : 0.0; }

    /// Layer of perceptron p.
    std::size_t layer_of(std::size_t p) const
    {
        std::size_t start = 0;
        for (std::size_t l = 0; l < layer_sizes.size(); ++l) {
            start += layer_sizes[l];
            if (p < start) {
                return l;
            }
        }
        throw std::out_of_range("perceptron index out of range");
    }

    /// First qubit of layer l; layer "-1" (the inputs) starts at 0.
    std::size_t layer_begin(std::size_t l) const
    {
        std::size_t q = n_inputs;
        for (std::size_t i = 0; i < l; ++i) {
            q += layer_sizes[i];
        }
        return q;
    }

    /// Zero weights and biases, every perceptron connected to the whole previous layer.
    static NetworkSpec layered(std::size_t n_inputs, std::vector<std::size_t> layer_sizes,
                               ActivationKind activation = ActivationKind::algebraic())
    {
        NetworkSpec net;
        net.n_inputs = n_inputs;
        net.layer_sizes = std::move(layer_sizes);
        net.activation = activation;
        const std::size_t P = net.n_perceptrons();
        const std::size_t Q = net.n_qubits();
        net.mask.assign(P * Q, 0);
        net.J.assign(P * Q, 0.0);
        net.b.assign(P, 0.0);
        std::size_t prev_begin = 0;
        std::size_t prev_size = n_inputs;
        std::size_t p = 0;
        for (std::size_t l = 0; l < net.layer_sizes.size(); ++l) {
            for (std::size_t j = 0; j < net.layer_sizes[l]; ++j, ++p) {
                for (std::size_t k = prev_begin; k < prev_begin + prev_size; ++k) {
                    net.mask[net.index(p, k)] = 1;
                }
            }
            prev_begin += prev_size;
            prev_size = net.layer_sizes[l];
        }
        net.validate();
        return net;
    }

    void validate() const
    {
        if (n_inputs == 0) {
            throw std::invalid_argument("network needs at least one input");
        }
        if (layer_sizes.empty() || layer_sizes.back() != 1) {
            throw std::invalid_argument("last layer must hold exactly one output perceptron");
        }
        for (auto s : layer_sizes) {
            if (s == 0) {
                throw std::invalid_argument("layers must be nonempty");
            }
        }
        const std::size_t P = n_perceptrons();
        const std::size_t Q = n_qubits();
        if (Q > kDefaultMaxQubits) {
            throw std::invalid_argument("network exceeds the register size cap");
        }
        if (mask.size() != P * Q || J.size() != P * Q || b.size() != P) {
            throw std::invalid_argument("mask, J or b has the wrong shape");
        }
        for (std::size_t p = 0; p < P; ++p) {
            if (!std::isfinite(b[p])) {
                throw std::invalid_argument("biases must be finite");
            }
            for (std::size_t k = 0; k < Q; ++k) {
                const int m = mask[index(p, k)];
                if (m != 0 && m != 1) {
                    throw std::invalid_argument("mask entries must be 0 or 1");
                }
                if (m == 1 && k >= n_inputs + p) {
                    throw std::invalid_argument("mask is not feed-forward: perceptron " + std::to_string(p) +
                                                " reads qubit " + std::to_string(k));
                }
                if (!std::isfinite(J[index(p, k)])) {
                    throw std::invalid_argument("weights must be finite");
                }
            }
        }
    }

    /// True when every perceptron reads only the layer right before it.
    bool strictly_layered() const
    {
        std::size_t p = 0;
        for (std::size_t l = 0; l < layer_sizes.size(); ++l) {
            const std::size_t lo = l == 0 ? 0 : layer_begin(l - 1);
            const std::size_t hi = layer_begin(l);
            for (std::size_t j = 0; j < layer_sizes[l]; ++j, ++p) {
                for (std::size_t k = 0; k < n_qubits(); ++k) {
                    if (mask[index(p, k)] != 0 && (k < lo || k >= hi)) {
                        return false;
                    }
                }
            }
        }
        return true;
    }

    PerceptronGateSpec gate(std::size_t p, const GateMode& mode = IdealMode{}) const
    {
        PerceptronGateSpec g;
        g.target = n_inputs + p;
        for (std::size_t k = 0; k < n_qubits(); ++k) {
            if (mask[index(p, k)] != 0) {
                g.weights.push_back({k, J[index(p, k)]});
            }
        }
        g.bias = -b[p];
        g.activation = activation;
        g.mode = mode;
        return g;
    }

    /// Gates in application order.
    std::vector<PerceptronGateSpec> gates(const GateMode& mode = IdealMode{}) const
    {
        validate();
        std::vector<PerceptronGateSpec> out;
        for (std::size_t p = 0; p < n_perceptrons(); ++p) {
            out.push_back(gate(p, mode));
        }
        return out;
    }
};

/// |input_bits, 0...0> on the network register.
inline QuantumRegister network_input_state(const NetworkSpec& net, std::string_view input_bits)
{
    if (input_bits.size() != net.n_inputs) {
        throw std::invalid_argument("input bitstring length does not match the network");
    }
    std::string bits(input_bits);
    bits.append(net.n_perceptrons(), '0');
    return init_basis(net.n_qubits(), bits);
}

struct ForwardResult {
    QuantumRegister reg;
    double p_out;
};

inline ForwardResult forward(const NetworkSpec& net, std::string_view input_bits, const GateMode& mode = IdealMode{})
{
    net.validate();
    auto reg = network_input_state(net, input_bits);
    for (const auto& g : net.gates(mode)) {
        apply_perceptron(reg, g);
    }
    const double p = excitation_probability(reg, net.output_qubit());
    return {std::move(reg), p};
}

/// Output excitation by brute-force enumeration of classical configurations.
/// `initial_bits` is the starting basis state of the whole register; gates run in order
/// and no qubit may be targeted twice.
inline double classical_mixture_oracle(std::size_t n_qubits, std::span<const PerceptronGateSpec> gates,
                                       std::string_view initial_bits, std::size_t output_qubit)
{
    if (initial_bits.size() != n_qubits) {
        throw std::invalid_argument("initial bitstring length does not match the register");
    }
    if (output_qubit >= n_qubits) {
        throw std::out_of_range("output qubit out of range");
    }
    std::vector<int> targeted(n_qubits, 0);
    for (const auto& g : gates) {
        g.validate(n_qubits);
        if (!std::holds_alternative<IdealMode>(g.mode)) {
            throw std::invalid_argument("oracle covers ideal gates only");
        }
        if (targeted[g.target]++ != 0) {
            throw std::invalid_argument("oracle requires each qubit to be targeted at most once");
        }
    }
    std::vector<int> bits(n_qubits);
    for (std::size_t q = 0; q < n_qubits; ++q) {
        if (initial_bits[q] != '0' && initial_bits[q] != '1') {
            throw std::invalid_argument("bitstring may only contain '0' and '1'");
        }
        bits[q] = initial_bits[q] == '1';
    }

    // Depth-first walk over gate outcomes.
    auto walk = [&](auto&& self, std::size_t gi, double weight) -> double {
        if (weight == 0.0) {
            return 0.0;
        }
        if (gi == gates.size()) {
            return bits[output_qubit] ? weight : 0.0;
        }
        const auto& g = gates[gi];
        double x = -g.bias;
        for (const auto& w : g.weights) {
            x += w.weight * (bits[w.qubit] ? 1.0 : -1.0);
        }
        const double f = eval_f(g.activation, x);
        const int before = bits[g.target];
        const double p_one = before ? 1.0 - f : f;
        bits[g.target] = 1;
        double total = self(self, gi + 1, weight * p_one);
        bits[g.target] = 0;
        total += self(self, gi + 1, weight * (1.0 - p_one));
        bits[g.target] = before;
        return total;
    };
    return walk(walk, 0, 1.0);
}

inline double classical_mixture_oracle(const NetworkSpec& net, std::string_view input_bits)
{
    net.validate();
    if (input_bits.size() != net.n_inputs) {
        throw std::invalid_argument("input bitstring length does not match the network");
    }
    std::string bits(input_bits);
    bits.append(net.n_perceptrons(), '0');
    const auto gates = net.gates();
    return classical_mixture_oracle(net.n_qubits(), gates, bits, net.output_qubit());
}

/// Classical sum Q(s) = sum_j alpha_j f(sum_k w_jk s_k - theta_j), s_k = +-1.
struct ClassicalSum {
    std::size_t n_inputs = 0;
    std::vector<double> alpha;  // M
    std::vector<double> w;      // M x N, row-major
    std::vector<double> theta;  // M

    std::size_t n_hidden() const { return alpha.size(); }

    void validate() const
    {
        if (n_inputs == 0 || alpha.empty()) {
            throw std::invalid_argument("classical sum needs inputs and at least one term");
        }
        if (w.size() != alpha.size() * n_inputs || theta.size() != alpha.size()) {
            throw std::invalid_argument("classical sum has inconsistent shapes");
        }
    }

    double hidden_field(std::size_t j, std::string_view bits) const
    {
        double x = -theta[j];
        for (std::size_t k = 0; k < n_inputs; ++k) {
            x += w[j * n_inputs + k] * (bits[k] == '1' ? 1.0 : -1.0);
        }
        return x;
    }

    double evaluate(const ActivationKind& a, std::string_view bits) const
    {
        double q = 0;
        for (std::size_t j = 0; j < n_hidden(); ++j) {
            q += alpha[j] * eval_f(a, hidden_field(j, bits));
        }
        return q;
    }
};

/// Three-layer network whose output excitation is affine in the classical sum
/// as lambda -> 0: p_out ~= offset + gain * Q(s).
struct ApproximatorSpec {
    ClassicalSum classical;
    double theta_out = 0;  // 1 + theta_out + sum(alpha) = 0
    double lambda_lin = 0.01;
    double offset = 0;
    double gain = 0;
    NetworkSpec net;

    double readout(double p_out) const { return (p_out - offset) / gain; }
};

inline ApproximatorSpec build_universal_approximator(const ClassicalSum& classical, double lambda_lin = 0.01,
                                                     ActivationKind activation = ActivationKind::algebraic())
{
    if (!(lambda_lin > 0) || !std::isfinite(lambda_lin)) {
        throw std::invalid_argument("lambda_lin must be positive");
    }
    classical.validate();
    const std::size_t N = classical.n_inputs;
    const std::size_t M = classical.n_hidden();

    ApproximatorSpec a;
    a.classical = classical;
    a.lambda_lin = lambda_lin;
    a.theta_out = -1.0 - std::accumulate(classical.alpha.begin(), classical.alpha.end(), 0.0);

    auto net = NetworkSpec::layered(N, {M, 1}, activation);
    for (std::size_t j = 0; j < M; ++j) {
        for (std::size_t k = 0; k < N; ++k) {
            net.J[net.index(j, k)] = classical.w[j * N + k];
        }
        net.b[j] = -classical.theta[j];
        net.J[net.index(M, N + j)] = lambda_lin * classical.alpha[j];
    }
    net.b[M] = -lambda_lin * a.theta_out;
    a.net = std::move(net);

    // x_out = lambda (1 + 2 sum_j alpha_j s_j) with s_j in {0, 1}; linearize f about 0.
    const double slope = df_dx(activation, 0.0);
    a.offset = eval_f(activation, 0.0) + slope * lambda_lin;
    a.gain = 2 * slope * lambda_lin;
    return a;
}

struct LayerForwardResult {
    QuantumRegister reg;
    double p_out;
    double protocol_time;  // layers * tf
};

/// Hardware evaluation with every layer driven simultaneously by the shared control.
/// Terms of one layer commute, so each layer is evolved sector by sector.
inline LayerForwardResult layer_hamiltonian_forward(const NetworkSpec& net, std::string_view input_bits,
                                                    const ControlSchedule& schedule,
                                                    const IntegratorOptions& integrator = {}, unsigned threads = 1)
{
    net.validate();
    if (!net.strictly_layered()) {
        throw std::invalid_argument("layer Hamiltonian needs a strictly layered mask");
    }
    auto reg = network_input_state(net, input_bits);
    const GateMode mode = HardwareMode{schedule, integrator, threads};
    std::size_t p = 0;
    for (std::size_t l = 0; l < net.layer_sizes.size(); ++l) {
        // Same-layer gates share no qubits: their order inside the layer is irrelevant.
        for (std::size_t j = 0; j < net.layer_sizes[l]; ++j, ++p) {
            apply_hardware_perceptron(reg, net.gate(p, mode));
        }
    }
    const double p_out = excitation_probability(reg, net.output_qubit());
    const double time = static_cast<double>(net.layer_sizes.size()) * schedule.tf();
    return {std::move(reg), p_out, time};
}

}  // namespace qperceptron
