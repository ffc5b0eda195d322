#ifndef QKTSNE_SIMULATOR_HPP
#define QKTSNE_SIMULATOR_HPP

#include <atomic>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qktsne {

using complex_t = std::complex<double>;

// Counts accesses to the (simulated) quantum computer. Updates are atomic so
// totals are independent of how work is split across threads.
struct ExecCounter {
    std::atomic<std::uint64_t> state_preparations{0};
    std::atomic<std::uint64_t> fidelity_evaluations{0};
};

// Dense pure state on n qubits. Qubit 0 is the least-significant bit of the
// amplitude index: amplitude[b] corresponds to |b_{n-1} ... b_1 b_0>.
class StateVector {
public:
    explicit StateVector(int n_qubits)
        : n_qubits_(n_qubits),
          amplitudes_(std::size_t{1} << check_qubits(n_qubits), complex_t{0.0, 0.0}) {
        amplitudes_[0] = complex_t{1.0, 0.0};
    }

    StateVector(int n_qubits, std::vector<complex_t> amplitudes)
        : n_qubits_(n_qubits), amplitudes_(std::move(amplitudes)) {
        check_qubits(n_qubits);
        if (amplitudes_.size() != (std::size_t{1} << n_qubits_))
            throw std::invalid_argument("amplitude count does not match qubit count");
    }

    int n_qubits() const { return n_qubits_; }
    std::size_t dim() const { return amplitudes_.size(); }
    const std::vector<complex_t>& amplitudes() const { return amplitudes_; }
    std::vector<complex_t>& amplitudes() { return amplitudes_; }

    double norm_sq() const {
        double s = 0.0;
        for (const auto& a : amplitudes_) s += std::norm(a);
        return s;
    }

private:
    static int check_qubits(int n) {
        if (n < 1 || n > 20)
            throw std::invalid_argument("n_qubits must be in [1, 20]");
        return n;
    }

    int n_qubits_;
    std::vector<complex_t> amplitudes_;
};

enum class GateKind { RX, RY, RZ, H, CZ, CNOT };

// Rotation conventions, fixed globally:
//   RX(t) = exp(-i t X / 2),  RY(t) = exp(-i t Y / 2),  RZ(t) = exp(-i t Z / 2).
struct Gate {
    GateKind kind;
    int target;
    std::optional<int> control; // CZ / CNOT only
    double angle = 0.0;         // rotations only

    static Gate rx(int target, double angle) { return {GateKind::RX, target, std::nullopt, angle}; }
    static Gate ry(int target, double angle) { return {GateKind::RY, target, std::nullopt, angle}; }
    static Gate rz(int target, double angle) { return {GateKind::RZ, target, std::nullopt, angle}; }
    static Gate h(int target) { return {GateKind::H, target, std::nullopt, 0.0}; }
    static Gate cz(int control, int target) { return {GateKind::CZ, target, control, 0.0}; }
    static Gate cnot(int control, int target) { return {GateKind::CNOT, target, control, 0.0}; }
};

struct Circuit {
    int n_qubits;
    std::vector<Gate> gates;
};

namespace detail {

inline void check_gate(const Gate& g, int n_qubits) {
    if (g.target < 0 || g.target >= n_qubits)
        throw std::out_of_range("gate target out of range");
    if (g.control) {
        if (*g.control < 0 || *g.control >= n_qubits)
            throw std::out_of_range("gate control out of range");
        if (*g.control == g.target)
            throw std::invalid_argument("control and target must differ");
    }
    if ((g.kind == GateKind::CZ || g.kind == GateKind::CNOT) && !g.control)
        throw std::invalid_argument("two-qubit gate requires a control qubit");
}

// Applies a generic single-qubit unitary [[u00, u01], [u10, u11]] on `target`.
inline void apply_1q(std::vector<complex_t>& amps, int target,
                     complex_t u00, complex_t u01, complex_t u10, complex_t u11) {
    const std::size_t mask = std::size_t{1} << target;
    const std::size_t n = amps.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (i & mask) continue;
        const complex_t a0 = amps[i];
        const complex_t a1 = amps[i | mask];
        amps[i] = u00 * a0 + u01 * a1;
        amps[i | mask] = u10 * a0 + u11 * a1;
    }
}

} // namespace detail

inline void apply_gate_in_place(StateVector& state, const Gate& gate) {
    detail::check_gate(gate, state.n_qubits());
    auto& amps = state.amplitudes();
    const double half = gate.angle * 0.5;
    switch (gate.kind) {
    case GateKind::RX: {
        const complex_t c{std::cos(half), 0.0};
        const complex_t ms{0.0, -std::sin(half)};
        detail::apply_1q(amps, gate.target, c, ms, ms, c);
        break;
    }
    case GateKind::RY: {
        const complex_t c{std::cos(half), 0.0};
        const complex_t s{std::sin(half), 0.0};
        detail::apply_1q(amps, gate.target, c, -s, s, c);
        break;
    }
    case GateKind::RZ: {
        const complex_t em{std::cos(half), -std::sin(half)};
        const complex_t ep{std::cos(half), std::sin(half)};
        detail::apply_1q(amps, gate.target, em, {0, 0}, {0, 0}, ep);
        break;
    }
    case GateKind::H: {
        const double r = 1.0 / std::sqrt(2.0);
        detail::apply_1q(amps, gate.target, {r, 0}, {r, 0}, {r, 0}, {-r, 0});
        break;
    }
    case GateKind::CZ: {
        const std::size_t both =
            (std::size_t{1} << gate.target) | (std::size_t{1} << *gate.control);
        for (std::size_t i = 0; i < amps.size(); ++i)
            if ((i & both) == both) amps[i] = -amps[i];
        break;
    }
    case GateKind::CNOT: {
        const std::size_t cmask = std::size_t{1} << *gate.control;
        const std::size_t tmask = std::size_t{1} << gate.target;
        for (std::size_t i = 0; i < amps.size(); ++i)
            if ((i & cmask) && !(i & tmask)) std::swap(amps[i], amps[i | tmask]);
        break;
    }
    }
}

inline StateVector apply_gate(const StateVector& state, const Gate& gate) {
    StateVector out = state;
    apply_gate_in_place(out, gate);
    return out;
}

// Prepares U|0...0>. Counts as one state preparation.
inline StateVector run_circuit(const Circuit& circuit, ExecCounter& counter) {
    StateVector state(circuit.n_qubits);
    for (const auto& g : circuit.gates) apply_gate_in_place(state, g);
    counter.state_preparations.fetch_add(1, std::memory_order_relaxed);
    return state;
}

// |<a|b>|^2. Counts as one fidelity evaluation.
inline double fidelity(const StateVector& a, const StateVector& b, ExecCounter& counter) {
    if (a.n_qubits() != b.n_qubits())
        throw std::invalid_argument("fidelity requires equal qubit counts");
    complex_t overlap{0.0, 0.0};
    const auto& av = a.amplitudes();
    const auto& bv = b.amplitudes();
    for (std::size_t i = 0; i < av.size(); ++i) overlap += std::conj(av[i]) * bv[i];
    counter.fidelity_evaluations.fetch_add(1, std::memory_order_relaxed);
    return std::norm(overlap);
}

enum class Pauli { X, Y, Z };

// coefficient * tensor product of Paulis on the listed qubits (identity elsewhere).
struct PauliTerm {
    double coefficient;
    std::vector<std::pair<int, Pauli>> operators;
};

// <state| coeff * P |state>. The imaginary residue of the quadratic form is
// zero for Hermitian P up to rounding; only the real part is returned.
inline double expectation_pauli(const StateVector& state, const PauliTerm& term) {
    std::size_t x_mask = 0, y_mask = 0, z_mask = 0;
    for (const auto& [q, p] : term.operators) {
        if (q < 0 || q >= state.n_qubits())
            throw std::out_of_range("pauli operator qubit out of range");
        const std::size_t bit = std::size_t{1} << q;
        if ((x_mask | y_mask | z_mask) & bit)
            throw std::invalid_argument("repeated qubit in pauli term");
        switch (p) {
        case Pauli::X: x_mask |= bit; break;
        case Pauli::Y: y_mask |= bit; break;
        case Pauli::Z: z_mask |= bit; break;
        }
    }
    // P|z> = i^{#Y} (-1)^{popcount(z & (y_mask | z_mask))} |z ^ flip>
    const std::size_t flip = x_mask | y_mask;
    const std::size_t sign_mask = y_mask | z_mask;
    const int y_count = static_cast<int>(std::popcount(y_mask));
    static const complex_t i_pow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    const complex_t y_phase = i_pow[y_count % 4];

    const auto& amps = state.amplitudes();
    complex_t acc{0.0, 0.0};
    for (std::size_t z = 0; z < amps.size(); ++z) {
        const double sign = (std::popcount(z & sign_mask) & 1) ? -1.0 : 1.0;
        acc += std::conj(amps[z ^ flip]) * (sign * amps[z]);
    }
    acc *= y_phase;
    return term.coefficient * acc.real();
}

} // namespace qktsne

#endif
