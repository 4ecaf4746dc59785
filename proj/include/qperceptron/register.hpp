#pragma once

// Dense n-qubit statevector with the perceptron gates.
//
// Conventions:
//   * qubit k is bit k of the amplitude index (qubit 0 is the least significant bit);
//   * bitstrings list qubits in order, character k is qubit k;
//   * sz|1> = +|1> (active), sz|0> = -|0> (resting), so P_active = (1 + <sz>) / 2.

#include "qperceptron/activation.hpp"
#include "qperceptron/control.hpp"
#include "qperceptron/dynamics.hpp"
#include "qperceptron/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numbers>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace qperceptron {

inline constexpr std::size_t kDefaultMaxQubits = 24;

class QuantumRegister {
public:
    /// |0...0> on n qubits.
    explicit QuantumRegister(std::size_t n_qubits, std::size_t max_qubits = kDefaultMaxQubits)
        : n_qubits_(n_qubits)
    {
        if (n_qubits == 0) {
            throw std::invalid_argument("register needs at least one qubit");
        }
        if (n_qubits > max_qubits) {
            throw std::invalid_argument("register size " + std::to_string(n_qubits) + " exceeds cap of " +
                                        std::to_string(max_qubits) + " qubits");
        }
        amplitudes_.assign(std::size_t{1} << n_qubits, Complex{0.0, 0.0});
        amplitudes_[0] = 1.0;
    }

    /// Register holding the given amplitudes; the length must be a power of two.
    static QuantumRegister from_amplitudes(std::vector<Complex> amplitudes,
                                           std::size_t max_qubits = kDefaultMaxQubits)
    {
        const std::size_t dim = amplitudes.size();
        if (dim < 2 || (dim & (dim - 1)) != 0) {
            throw std::invalid_argument("amplitude count must be a power of two >= 2");
        }
        std::size_t n = 0;
        while ((std::size_t{1} << n) < dim) {
            ++n;
        }
        QuantumRegister reg(n, max_qubits);
        reg.amplitudes_ = std::move(amplitudes);
        return reg;
    }

    std::size_t n_qubits() const { return n_qubits_; }
    std::size_t dimension() const { return amplitudes_.size(); }
    std::span<const Complex> amplitudes() const { return amplitudes_; }
    std::span<Complex> amplitudes() { return amplitudes_; }
    Complex amplitude(std::size_t index) const { return amplitudes_.at(index); }

    double norm_squared() const
    {
        double s = 0;
        for (const auto& a : amplitudes_) {
            s += std::norm(a);
        }
        return s;
    }

    std::string bitstring(std::size_t index) const
    {
        std::string s(n_qubits_, '0');
        for (std::size_t q = 0; q < n_qubits_; ++q) {
            if ((index >> q) & 1U) {
                s[q] = '1';
            }
        }
        return s;
    }

    void check_qubit(std::size_t q) const
    {
        if (q >= n_qubits_) {
            throw std::out_of_range("qubit index " + std::to_string(q) + " out of range for " +
                                    std::to_string(n_qubits_) + "-qubit register");
        }
    }

private:
    std::size_t n_qubits_;
    std::vector<Complex> amplitudes_;
};

/// Computational basis state |bits>; character k of `bits` is qubit k.
inline QuantumRegister init_basis(std::size_t n, std::string_view bits)
{
    if (bits.size() != n) {
        throw std::invalid_argument("bitstring length does not match register size");
    }
    std::size_t index = 0;
    for (std::size_t q = 0; q < n; ++q) {
        if (bits[q] == '1') {
            index |= std::size_t{1} << q;
        } else if (bits[q] != '0') {
            throw std::invalid_argument("bitstring may only contain '0' and '1'");
        }
    }
    QuantumRegister reg(n);
    auto amps = reg.amplitudes();
    amps[0] = 0.0;
    amps[index] = 1.0;
    return reg;
}

inline bool qubit_is_set(std::size_t index, std::size_t q) { return ((index >> q) & 1U) != 0; }

/// sz eigenvalue of qubit q in basis state `index`: +1 for |1>, -1 for |0>.
inline double spin_z(std::size_t index, std::size_t q) { return qubit_is_set(index, q) ? 1.0 : -1.0; }

/// Calls fn(i0, i1) for every amplitude pair differing only in `target` (i0 has the bit clear).
template <typename Fn>
void for_each_pair(const QuantumRegister& reg, std::size_t target, Fn&& fn)
{
    reg.check_qubit(target);
    const std::size_t stride = std::size_t{1} << target;
    const std::size_t dim = reg.dimension();
    for (std::size_t base = 0; base < dim; base += 2 * stride) {
        for (std::size_t i0 = base; i0 < base + stride; ++i0) {
            fn(i0, i0 + stride);
        }
    }
}

/// Index of the configuration of `sources` in basis state `index` (bit b <- sources[b]).
inline std::size_t sector_key(std::size_t index, std::span<const std::size_t> sources)
{
    std::size_t key = 0;
    for (std::size_t b = 0; b < sources.size(); ++b) {
        key |= static_cast<std::size_t>(qubit_is_set(index, sources[b])) << b;
    }
    return key;
}

inline void apply_hadamard(QuantumRegister& reg, std::size_t target)
{
    auto amps = reg.amplitudes();
    const double h = std::numbers::sqrt2 / 2;
    for_each_pair(reg, target, [&](std::size_t i0, std::size_t i1) {
        const Complex a = amps[i0];
        const Complex b = amps[i1];
        amps[i0] = h * (a + b);
        amps[i1] = h * (a - b);
    });
}

/// Applies, on every configuration z of `sources`, the rotation
/// R(phi) = [[cos phi, -sin phi], [sin phi, cos phi]] with phi = angles[key(z)] to `target`.
/// R(phi)|0> = cos phi |0> + sin phi |1>.
inline void apply_sector_rotation(QuantumRegister& reg, std::size_t target, std::span<const std::size_t> sources,
                                  std::span<const double> angles)
{
    if (angles.size() != (std::size_t{1} << sources.size())) {
        throw std::invalid_argument("rotation table size does not match the number of source configurations");
    }
    std::vector<double> cosines(angles.size());
    std::vector<double> sines(angles.size());
    for (std::size_t k = 0; k < angles.size(); ++k) {
        cosines[k] = std::cos(angles[k]);
        sines[k] = std::sin(angles[k]);
    }
    auto amps = reg.amplitudes();
    for_each_pair(reg, target, [&](std::size_t i0, std::size_t i1) {
        const std::size_t k = sector_key(i0, sources);
        const Complex a = amps[i0];
        const Complex b = amps[i1];
        amps[i0] = cosines[k] * a - sines[k] * b;
        amps[i1] = sines[k] * a + cosines[k] * b;
    });
}

/// Applies the 2x2 unitary unitaries[key(z)] to `target` on each configuration z of `sources`.
inline void apply_sector_unitary(QuantumRegister& reg, std::size_t target, std::span<const std::size_t> sources,
                                 std::span<const Propagator> unitaries)
{
    if (unitaries.size() != (std::size_t{1} << sources.size())) {
        throw std::invalid_argument("unitary table size does not match the number of source configurations");
    }
    auto amps = reg.amplitudes();
    for_each_pair(reg, target, [&](std::size_t i0, std::size_t i1) {
        const auto& u = unitaries[sector_key(i0, sources)].m;
        const Complex a = amps[i0];
        const Complex b = amps[i1];
        amps[i0] = u[0][0] * a + u[0][1] * b;
        amps[i1] = u[1][0] * a + u[1][1] * b;
    });
}

struct SourceWeight {
    std::size_t qubit;
    double weight;
};

struct IdealMode {};

struct HardwareMode {
    ControlSchedule schedule;
    IntegratorOptions integrator{};
    unsigned threads = 1;
};

using GateMode = std::variant<IdealMode, HardwareMode>;

/// Perceptron gate on `target` driven by the field x = sum_k w_k sz_k - bias.
struct PerceptronGateSpec {
    std::size_t target = 0;
    std::vector<SourceWeight> weights;
    double bias = 0;
    ActivationKind activation = ActivationKind::algebraic();
    GateMode mode = IdealMode{};

    std::vector<std::size_t> source_qubits() const
    {
        std::vector<std::size_t> q;
        q.reserve(weights.size());
        for (const auto& w : weights) {
            q.push_back(w.qubit);
        }
        return q;
    }

    /// Field for the source configuration `key` (bit b of key is the state of weights[b].qubit).
    double field_for_key(std::size_t key) const
    {
        double x = 0;
        for (std::size_t b = 0; b < weights.size(); ++b) {
            x += weights[b].weight * (((key >> b) & 1U) ? 1.0 : -1.0);
        }
        return x - bias;
    }

    /// Fields for every source configuration, indexed by sector key.
    std::vector<double> field_table() const
    {
        std::vector<double> fields(std::size_t{1} << weights.size());
        for (std::size_t k = 0; k < fields.size(); ++k) {
            fields[k] = field_for_key(k);
        }
        return fields;
    }

    void validate(std::size_t n_qubits) const
    {
        if (target >= n_qubits) {
            throw std::invalid_argument("perceptron target outside register");
        }
        if (!std::isfinite(bias)) {
            throw std::invalid_argument("perceptron bias must be finite");
        }
        for (std::size_t i = 0; i < weights.size(); ++i) {
            const auto& w = weights[i];
            if (w.qubit >= n_qubits) {
                throw std::invalid_argument("perceptron source outside register");
            }
            if (w.qubit == target) {
                throw std::invalid_argument("perceptron target cannot be one of its sources");
            }
            if (!std::isfinite(w.weight)) {
                throw std::invalid_argument("perceptron weights must be finite");
            }
            for (std::size_t j = 0; j < i; ++j) {
                if (weights[j].qubit == w.qubit) {
                    throw std::invalid_argument("perceptron source listed twice");
                }
            }
        }
    }
};

/// U = exp(i chi(x) sy) conditioned on the source configuration: the target in |0> becomes
/// sqrt(1 - f(x)) |0> + sqrt(f(x)) |1>. No 2^n x 2^n matrix is formed.
inline void apply_ideal_perceptron(QuantumRegister& reg, const PerceptronGateSpec& gate)
{
    if (!std::holds_alternative<IdealMode>(gate.mode)) {
        throw std::invalid_argument("apply_ideal_perceptron needs a gate in ideal mode");
    }
    gate.validate(reg.n_qubits());
    const auto fields = gate.field_table();
    std::vector<double> angles(fields.size());
    for (std::size_t k = 0; k < fields.size(); ++k) {
        angles[k] = chi(gate.activation, fields[k]);
    }
    const auto sources = gate.source_qubits();
    apply_sector_rotation(reg, gate.target, sources, angles);
}

/// Sector propagators of the Ising passage, one integration per distinct field value.
inline std::vector<Propagator> hardware_sector_propagators(const HardwareMode& hw, std::span<const double> fields)
{
    std::vector<double> distinct(fields.begin(), fields.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    const auto props = parallel_map<Propagator>(distinct.size(), hw.threads, [&](std::size_t i) {
        return two_level_propagator(hw.schedule, distinct[i], hw.integrator);
    });
    std::vector<Propagator> table(fields.size());
    for (std::size_t k = 0; k < fields.size(); ++k) {
        const auto it = std::lower_bound(distinct.begin(), distinct.end(), fields[k]);
        table[k] = props[static_cast<std::size_t>(it - distinct.begin())];
    }
    return table;
}

/// Hadamard on the target, then the transverse-field passage with x = x(z) on each source
/// sector, dynamical phases included.
inline void apply_hardware_perceptron(QuantumRegister& reg, const PerceptronGateSpec& gate)
{
    const auto* hw = std::get_if<HardwareMode>(&gate.mode);
    if (hw == nullptr) {
        throw std::invalid_argument("apply_hardware_perceptron needs a gate in hardware mode");
    }
    gate.validate(reg.n_qubits());
    const auto table = hardware_sector_propagators(*hw, gate.field_table());
    apply_hadamard(reg, gate.target);
    const auto sources = gate.source_qubits();
    apply_sector_unitary(reg, gate.target, sources, table);
}

inline void apply_perceptron(QuantumRegister& reg, const PerceptronGateSpec& gate)
{
    if (std::holds_alternative<IdealMode>(gate.mode)) {
        apply_ideal_perceptron(reg, gate);
    } else {
        apply_hardware_perceptron(reg, gate);
    }
}

/// Probability that `qubit` is active.
inline double excitation_probability(const QuantumRegister& reg, std::size_t qubit)
{
    reg.check_qubit(qubit);
    double p = 0;
    const auto amps = reg.amplitudes();
    for (std::size_t i = 0; i < amps.size(); ++i) {
        if (qubit_is_set(i, qubit)) {
            p += std::norm(amps[i]);
        }
    }
    return p;
}

inline double z_expectation(const QuantumRegister& reg, std::size_t qubit)
{
    return 2 * excitation_probability(reg, qubit) - 1;
}

class ZeroProbabilityCondition : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// P(query = 1 | condition_qubits = condition_bits).
inline double conditional_probability(const QuantumRegister& reg, std::span<const std::size_t> condition_qubits,
                                      std::string_view condition_bits, std::size_t query_qubit)
{
    if (condition_qubits.size() != condition_bits.size()) {
        throw std::invalid_argument("condition qubits and bits differ in length");
    }
    reg.check_qubit(query_qubit);
    std::size_t mask = 0;
    std::size_t pattern = 0;
    for (std::size_t b = 0; b < condition_qubits.size(); ++b) {
        reg.check_qubit(condition_qubits[b]);
        mask |= std::size_t{1} << condition_qubits[b];
        if (condition_bits[b] == '1') {
            pattern |= std::size_t{1} << condition_qubits[b];
        } else if (condition_bits[b] != '0') {
            throw std::invalid_argument("condition bits may only contain '0' and '1'");
        }
    }
    double joint = 0;
    double marginal = 0;
    const auto amps = reg.amplitudes();
    for (std::size_t i = 0; i < amps.size(); ++i) {
        if ((i & mask) != pattern) {
            continue;
        }
        const double p = std::norm(amps[i]);
        marginal += p;
        if (qubit_is_set(i, query_qubit)) {
            joint += p;
        }
    }
    if (marginal <= 0) {
        throw ZeroProbabilityCondition("conditioning event has zero probability");
    }
    return joint / marginal;
}

/// Debug dump: `index,bitstring,re,im`, one row per basis state.
inline void write_state_csv(std::ostream& out, const QuantumRegister& reg)
{
    const auto old_precision = out.precision(17);
    out << "index,bitstring,re,im\n";
    const auto amps = reg.amplitudes();
    for (std::size_t i = 0; i < amps.size(); ++i) {
        out << i << ',' << reg.bitstring(i) << ',' << amps[i].real() << ',' << amps[i].imag() << '\n';
    }
    out.precision(old_precision);
}

}  // namespace qperceptron
