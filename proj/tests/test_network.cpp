#include "qperceptron/network.hpp"
#include "qperceptron/training.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace qperceptron;

namespace {

const ActivationKind kAlg = ActivationKind::algebraic();

NetworkSpec random_net(std::size_t n_inputs, std::vector<std::size_t> layers, std::mt19937_64& rng, double scale = 2.0)
{
    return random_initialization(NetworkSpec::layered(n_inputs, std::move(layers)), scale, rng());
}

std::vector<std::string> all_inputs(std::size_t n)
{
    std::vector<std::string> out;
    for (unsigned v = 0; v < (1U << n); ++v) {
        out.push_back(to_bits(v, n));
    }
    return out;
}

}  // namespace

TEST(Network, LayeredTopology)
{
    const auto net = NetworkSpec::layered(2, {2, 1});
    EXPECT_EQ(net.n_qubits(), 5u);
    EXPECT_EQ(net.output_qubit(), 4u);
    // hidden perceptrons read the inputs, the output reads the hidden layer
    EXPECT_EQ(net.mask[net.index(0, 0)], 1);
    EXPECT_EQ(net.mask[net.index(0, 2)], 0);
    EXPECT_EQ(net.mask[net.index(2, 0)], 0);
    EXPECT_EQ(net.mask[net.index(2, 2)], 1);
    EXPECT_EQ(net.mask[net.index(2, 3)], 1);
    EXPECT_TRUE(net.strictly_layered());
    EXPECT_EQ(net.layer_of(2), 1u);
}

TEST(Network, ValidationRejectsBadSpecs)
{
    auto net = NetworkSpec::layered(2, {2, 1});
    auto bad = net;
    bad.mask[bad.index(0, 3)] = 1;  // reads a later qubit
    EXPECT_THROW(bad.validate(), std::invalid_argument);
    bad = net;
    bad.b.pop_back();
    EXPECT_THROW(bad.validate(), std::invalid_argument);
    bad = net;
    bad.layer_sizes = {2, 2};
    EXPECT_THROW(bad.validate(), std::invalid_argument);
    bad = net;
    bad.mask[0] = 2;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
    EXPECT_THROW(forward(net, "1"), std::invalid_argument);
}

TEST(Network, TrivialForwardPasses)
{
    const auto single = NetworkSpec::layered(1, {1});
    for (const char* in : {"0", "1"}) {
        EXPECT_NEAR(forward(single, in).p_out, 0.5, 1e-15);
    }
    const auto net = NetworkSpec::layered(3, {2, 2, 1});
    const auto res = forward(net, "101");
    for (std::size_t q = 3; q < net.n_qubits(); ++q) {
        EXPECT_NEAR(excitation_probability(res.reg, q), 0.5, 1e-14);
    }
    // inputs are untouched
    EXPECT_NEAR(excitation_probability(res.reg, 0), 1.0, 1e-15);
    EXPECT_NEAR(excitation_probability(res.reg, 1), 0.0, 1e-15);
}

TEST(Network, ForwardMatchesClassicalMixture)
{
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 25; ++trial) {
        const auto net = random_net(2, {2, 1}, rng, 3.0);
        for (const auto& in : all_inputs(2)) {
            EXPECT_NEAR(forward(net, in).p_out, classical_mixture_oracle(net, in), 1e-10);
        }
    }
    // deeper net with skip connections
    auto net = NetworkSpec::layered(3, {2, 2, 1});
    for (std::size_t p = 0; p < net.n_perceptrons(); ++p) {
        for (std::size_t k = 0; k < net.n_inputs + p; ++k) {
            net.mask[net.index(p, k)] = 1;
        }
    }
    net = random_initialization(net, 2.0, 5);
    EXPECT_FALSE(net.strictly_layered());
    for (const auto& in : all_inputs(3)) {
        EXPECT_NEAR(forward(net, in).p_out, classical_mixture_oracle(net, in), 1e-10);
    }
}

TEST(Network, OracleWithoutHiddenLayer)
{
    auto net = NetworkSpec::layered(2, {1});
    net.J[net.index(0, 0)] = 0.7;
    net.J[net.index(0, 1)] = -1.9;
    net.b[0] = 0.4;
    EXPECT_EQ(classical_mixture_oracle(net, "10"), eval_f(kAlg, 0.7 + 1.9 + 0.4));
    EXPECT_EQ(classical_mixture_oracle(net, "01"), eval_f(kAlg, -0.7 - 1.9 + 0.4));
}

TEST(Network, OracleSaturation)
{
    auto net = NetworkSpec::layered(1, {2, 1}, ActivationKind::logistic());
    net.b[0] = 500;   // hidden 0 always active
    net.b[1] = -500;  // hidden 1 always resting
    net.J[net.index(2, 1)] = 1.5;
    net.J[net.index(2, 2)] = 0.5;
    net.b[2] = 0.2;
    const double expected = eval_f(ActivationKind::logistic(), 1.5 - 0.5 + 0.2);
    EXPECT_NEAR(classical_mixture_oracle(net, "0"), expected, 1e-14);
    EXPECT_NEAR(forward(net, "1").p_out, expected, 1e-12);
}

TEST(Network, OracleRejectsRetargetedQubits)
{
    PerceptronGateSpec a;
    a.target = 1;
    a.weights = {{0, 1.0}};
    auto b = a;
    const std::vector<PerceptronGateSpec> gates{a, b};
    EXPECT_THROW(classical_mixture_oracle(2, gates, "00", 1), std::invalid_argument);
}

TEST(Network, GateListOracleMatchesRegister)
{
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-2, 2);
    // Gates out of qubit order; qubit 3 starts active.
    std::vector<PerceptronGateSpec> gates(2);
    gates[0].target = 3;
    gates[0].weights = {{0, u(rng)}, {1, u(rng)}};
    gates[0].bias = u(rng);
    gates[1].target = 2;
    gates[1].weights = {{3, u(rng)}, {0, u(rng)}};
    gates[1].bias = u(rng);
    auto reg = init_basis(4, "1101");
    for (const auto& g : gates) {
        apply_ideal_perceptron(reg, g);
    }
    EXPECT_NEAR(classical_mixture_oracle(4, gates, "1101", 2), excitation_probability(reg, 2), 1e-12);
    EXPECT_NEAR(classical_mixture_oracle(4, gates, "1101", 3), excitation_probability(reg, 3), 1e-12);
}

TEST(Network, ApproximatorConstraintAndNullSignal)
{
    ClassicalSum cs{2, {0.0, 0.0}, {1, 2, -1, 0.5}, {0.3, -0.2}};
    const auto a = build_universal_approximator(cs, 0.01);
    EXPECT_NEAR(1 + a.theta_out + 0.0, 0.0, 1e-15);
    for (const auto& in : all_inputs(2)) {
        const double p = forward(a.net, in).p_out;
        EXPECT_NEAR(p, 0.5, 0.01);
        EXPECT_NEAR(a.readout(p), 0.0, 1e-3);
    }
    EXPECT_THROW(build_universal_approximator(cs, 0.0), std::invalid_argument);
    EXPECT_THROW(build_universal_approximator(cs, -1.0), std::invalid_argument);
}

TEST(Network, ApproximatorSingleNeuron)
{
    ClassicalSum cs{3, {1.0}, {0.8, -1.1, 0.4}, {0.25}};
    const auto a = build_universal_approximator(cs, 0.01);
    double sum_alpha = 0;
    for (double v : cs.alpha) sum_alpha += v;
    EXPECT_NEAR(1 + a.theta_out + sum_alpha, 0.0, 1e-15);
    for (const auto& in : all_inputs(3)) {
        const double p = forward(a.net, in).p_out;
        EXPECT_NEAR(p, classical_mixture_oracle(a.net, in), 1e-12);
        EXPECT_LE(std::abs(a.readout(p) - cs.evaluate(kAlg, in)), 0.01);
    }
}

TEST(Network, ApproximatorErrorVanishesAtLeastLinearly)
{
    ClassicalSum cs{2, {0.6, -0.9, 0.4}, {1.2, -0.7, 0.3, 2.0, -1.5, -0.4}, {0.2, -0.5, 0.9}};
    auto err = [&](double lam) {
        const auto a = build_universal_approximator(cs, lam);
        double e = 0;
        for (const auto& in : all_inputs(2)) {
            e = std::max(e, std::abs(a.readout(forward(a.net, in).p_out) - cs.evaluate(kAlg, in)));
        }
        return e;
    };
    const double e4 = err(0.04);
    const double e2 = err(0.02);
    const double e1 = err(0.01);
    EXPECT_GE(e4 / e2, 2 * 0.75);
    EXPECT_GE(e2 / e1, 2 * 0.75);
    EXPECT_LT(e1, e2);
}

TEST(Network, ParityThroughApproximator)
{
    Dataset parity{2, {{"00", 0}, {"10", 1}, {"01", 1}, {"11", 0}}};
    TrainConfig cfg;
    cfg.max_iters = 4000;
    cfg.restarts = 8;
    cfg.init_scale = 2.0;
    cfg.seed = 3;
    const auto fit = fit_classical_sum(parity, 4, cfg);
    EXPECT_LE(fit.max_error, 0.02);
    const auto a = build_universal_approximator(fit.sum, 0.01);
    EXPECT_EQ(a.net.layer_sizes, (std::vector<std::size_t>{4, 1}));
    for (const auto& s : parity.pairs) {
        EXPECT_LE(std::abs(a.readout(forward(a.net, s.x).p_out) - s.y), 0.05) << s.x;
    }
}

TEST(Network, LayerHamiltonianEqualsSequentialHardwareGates)
{
    std::mt19937_64 rng(31);
    const auto net = random_net(2, {2, 1}, rng, 2.0);
    const auto s = faquad_schedule(100, 1, 2, optimal_design_field(1.0));
    for (const auto& in : all_inputs(2)) {
        const auto layer = layer_hamiltonian_forward(net, in, s);
        const auto seq = forward(net, in, HardwareMode{s});
        for (std::size_t i = 0; i < seq.reg.dimension(); ++i) {
            EXPECT_NEAR(std::abs(layer.reg.amplitude(i) - seq.reg.amplitude(i)), 0.0, 1e-10);
        }
        EXPECT_DOUBLE_EQ(layer.protocol_time, 2 * 2.0);
    }
}

TEST(Network, LayerHamiltonianAdiabaticMatchesIdeal)
{
    std::mt19937_64 rng(41);
    const auto net = random_net(2, {2, 1}, rng, 2.0);
    const auto s = faquad_schedule(100, 1, 10, optimal_design_field(1.0));
    for (const auto& in : all_inputs(2)) {
        EXPECT_NEAR(layer_hamiltonian_forward(net, in, s).p_out, forward(net, in).p_out, 0.02) << in;
    }
    const auto deep = NetworkSpec::layered(1, {1, 1, 1});
    EXPECT_DOUBLE_EQ(layer_hamiltonian_forward(deep, "0", s).protocol_time, 30.0);
}

TEST(Network, LayerHamiltonianNeedsStrictLayers)
{
    auto net = NetworkSpec::layered(2, {2, 1});
    net.mask[net.index(2, 0)] = 1;  // output reads an input directly
    const auto s = faquad_schedule(100, 1, 1, 1.272);
    EXPECT_THROW(layer_hamiltonian_forward(net, "00", s), std::invalid_argument);
}
