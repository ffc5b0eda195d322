#ifndef QKTSNE_VQE_HPP
#define QKTSNE_VQE_HPP

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "simulator.hpp"
#include "state_io.hpp"

namespace qktsne {

// Transverse-field Ising chain H = J sum Z_i Z_{i+1} + h sum X_i (open
// boundary): n-1 ZZ terms plus n X terms.
inline std::vector<PauliTerm> tfim_hamiltonian(int n, double coupling_j, double field_h) {
    if (n < 2) throw std::invalid_argument("tfim_hamiltonian needs n >= 2");
    std::vector<PauliTerm> terms;
    terms.reserve(2 * n - 1);
    for (int i = 0; i + 1 < n; ++i)
        terms.push_back({coupling_j, {{i, Pauli::Z}, {i + 1, Pauli::Z}}});
    for (int i = 0; i < n; ++i)
        terms.push_back({field_h, {{i, Pauli::X}}});
    return terms;
}

// Hardware-efficient ansatz: an initial layer of RY(theta) per qubit, then
// `depth` blocks, each a linear CNOT ladder (control i, target i+1) followed
// by RY(theta) per qubit. Parameters are consumed qubit-major within each
// layer. Parameter count = n(d+1).
//
// RY-only layers keep the amplitudes real, matching the real TFIM ground
// state; an RZ sub-layer doubles the parameter count with directions that
// only move global/relative phases the energy barely sees, which starves
// BFGS of curvature information within a 100-iteration budget.
struct Ansatz {
    int n_qubits;
    int depth;

    int parameter_count() const { return n_qubits * (depth + 1); }
};

inline Circuit build_ansatz_circuit(const Ansatz& ansatz, const Eigen::VectorXd& theta) {
    if (theta.size() != ansatz.parameter_count())
        throw std::invalid_argument("theta length does not match ansatz layout");

    Circuit circuit{ansatz.n_qubits, {}};
    int k = 0;
    auto rotation_layer = [&] {
        for (int q = 0; q < ansatz.n_qubits; ++q)
            circuit.gates.push_back(Gate::ry(q, theta(k++)));
    };
    rotation_layer();
    for (int block = 0; block < ansatz.depth; ++block) {
        for (int q = 0; q + 1 < ansatz.n_qubits; ++q)
            circuit.gates.push_back(Gate::cnot(q, q + 1));
        rotation_layer();
    }
    return circuit;
}

inline StateVector prepare_ansatz_state(const Ansatz& ansatz, const Eigen::VectorXd& theta,
                                        ExecCounter& counter) {
    return run_circuit(build_ansatz_circuit(ansatz, theta), counter);
}

// <psi(theta)| H |psi(theta)>, one state preparation per call.
inline double energy(const Eigen::VectorXd& theta, const std::vector<PauliTerm>& hamiltonian,
                     const Ansatz& ansatz, ExecCounter& counter) {
    const StateVector state = prepare_ansatz_state(ansatz, theta, counter);
    double e = 0.0;
    for (const auto& term : hamiltonian) e += expectation_pauli(state, term);
    return e;
}

// Parameter-shift rule, exact for exp(-i theta P / 2) rotations:
// dE/dtheta_j = (E(theta + pi/2 e_j) - E(theta - pi/2 e_j)) / 2.
inline Eigen::VectorXd energy_gradient(const Eigen::VectorXd& theta,
                                       const std::vector<PauliTerm>& hamiltonian,
                                       const Ansatz& ansatz, ExecCounter& counter) {
    const double shift = std::numbers::pi / 2.0;
    Eigen::VectorXd grad(theta.size());
    Eigen::VectorXd shifted = theta;
    for (Eigen::Index j = 0; j < theta.size(); ++j) {
        shifted(j) = theta(j) + shift;
        const double plus = energy(shifted, hamiltonian, ansatz, counter);
        shifted(j) = theta(j) - shift;
        const double minus = energy(shifted, hamiltonian, ansatz, counter);
        shifted(j) = theta(j);
        grad(j) = 0.5 * (plus - minus);
    }
    return grad;
}

enum class BfgsStatus { Converged, MaxIterations, LineSearchFailed };

struct BfgsIterate {
    int iteration;
    Eigen::VectorXd theta;
    double value;
};

struct BfgsResult {
    Eigen::VectorXd theta;
    std::vector<BfgsIterate> iterates; // includes iteration 0
    BfgsStatus status;
};

// Dense BFGS with an inverse-Hessian update and backtracking Armijo line
// search (c = 1e-4, shrink 0.5). Stops after max_iters accepted steps or
// when the gradient norm drops below grad_tol.
inline BfgsResult minimize_bfgs(const std::function<double(const Eigen::VectorXd&)>& f,
                                const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& grad,
                                const Eigen::VectorXd& theta0, int max_iters = 100,
                                double grad_tol = 1e-8) {
    const Eigen::Index dim = theta0.size();
    constexpr double armijo_c = 1e-4;
    constexpr double shrink = 0.5;
    constexpr int max_backtracks = 60;

    BfgsResult result;
    result.theta = theta0;
    double value = f(theta0);
    Eigen::VectorXd g = grad(theta0);
    result.iterates.push_back({0, theta0, value});
    result.status = BfgsStatus::MaxIterations;

    Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(dim, dim);

    for (int iter = 1; iter <= max_iters; ++iter) {
        if (g.norm() < grad_tol) {
            result.status = BfgsStatus::Converged;
            break;
        }
        Eigen::VectorXd direction = -h_inv * g;
        double slope = g.dot(direction);
        if (slope >= 0.0) {
            // Update lost positive definiteness; restart from steepest descent.
            direction = -g;
            slope = g.dot(direction);
        }

        double step = 1.0;
        double new_value = 0.0;
        Eigen::VectorXd new_theta;
        bool accepted = false;
        for (int bt = 0; bt < max_backtracks; ++bt) {
            new_theta = result.theta + step * direction;
            new_value = f(new_theta);
            if (new_value <= value + armijo_c * step * slope) {
                accepted = true;
                break;
            }
            step *= shrink;
        }
        if (!accepted) {
            result.status = BfgsStatus::LineSearchFailed;
            break;
        }

        const Eigen::VectorXd new_g = grad(new_theta);
        const Eigen::VectorXd s = new_theta - result.theta;
        const Eigen::VectorXd y = new_g - g;
        const double sy = s.dot(y);
        if (sy > 1e-12) {
            const double rho = 1.0 / sy;
            const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(dim, dim);
            h_inv = (identity - rho * s * y.transpose()) * h_inv *
                        (identity - rho * y * s.transpose()) +
                    rho * s * s.transpose();
        }

        result.theta = new_theta;
        value = new_value;
        g = new_g;
        result.iterates.push_back({iter, result.theta, value});
        if (g.norm() < grad_tol) {
            result.status = BfgsStatus::Converged;
            break;
        }
    }
    return result;
}

// One recorded VQE run: parameters, energy, and prepared state per accepted
// iterate, starting from the initial point.
struct Trajectory {
    std::string label;
    struct Iterate {
        int iteration;
        Eigen::VectorXd theta;
        double energy;
        StateVector state;
    };
    std::vector<Iterate> iterates;
    BfgsStatus status = BfgsStatus::MaxIterations;
};

inline Trajectory run_vqe_trajectory(const std::string& label,
                                     const std::vector<PauliTerm>& hamiltonian,
                                     const Ansatz& ansatz, const Eigen::VectorXd& theta0,
                                     ExecCounter& counter, int max_iters = 100) {
    auto f = [&](const Eigen::VectorXd& t) { return energy(t, hamiltonian, ansatz, counter); };
    auto g = [&](const Eigen::VectorXd& t) {
        return energy_gradient(t, hamiltonian, ansatz, counter);
    };
    const BfgsResult bfgs = minimize_bfgs(f, g, theta0, max_iters);

    Trajectory traj;
    traj.label = label;
    traj.status = bfgs.status;
    traj.iterates.reserve(bfgs.iterates.size());
    for (const auto& it : bfgs.iterates)
        traj.iterates.push_back(
            {it.iteration, it.theta, it.value, prepare_ansatz_state(ansatz, it.theta, counter)});
    return traj;
}

// Dense matrix of a Pauli-term Hamiltonian (qubit 0 = least-significant bit,
// matching StateVector).
inline Eigen::MatrixXcd hamiltonian_matrix(const std::vector<PauliTerm>& hamiltonian, int n) {
    if (n < 1 || n > 12) throw std::invalid_argument("dense Hamiltonian limited to n <= 12");
    const Eigen::Index dim = Eigen::Index{1} << n;
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
    for (const auto& term : hamiltonian) {
        std::size_t x_mask = 0, y_mask = 0, z_mask = 0;
        for (const auto& [q, p] : term.operators) {
            if (q < 0 || q >= n) throw std::out_of_range("pauli qubit out of range");
            const std::size_t bit = std::size_t{1} << q;
            switch (p) {
            case Pauli::X: x_mask |= bit; break;
            case Pauli::Y: y_mask |= bit; break;
            case Pauli::Z: z_mask |= bit; break;
            }
        }
        const std::size_t flip = x_mask | y_mask;
        const std::size_t sign_mask = y_mask | z_mask;
        static const complex_t i_pow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
        const complex_t y_phase = i_pow[std::popcount(y_mask) % 4];
        for (Eigen::Index z = 0; z < dim; ++z) {
            const double sign =
                (std::popcount(static_cast<std::size_t>(z) & sign_mask) & 1) ? -1.0 : 1.0;
            h(static_cast<Eigen::Index>(z ^ static_cast<Eigen::Index>(flip)), z) +=
                term.coefficient * sign * y_phase;
        }
    }
    return h;
}

struct Spectrum {
    Eigen::VectorXd eigenvalues;  // ascending
    Eigen::MatrixXcd eigenvectors; // columns, normalized
};

inline Spectrum exact_diagonalize(const std::vector<PauliTerm>& hamiltonian, int n) {
    const Eigen::MatrixXcd h = hamiltonian_matrix(hamiltonian, n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("exact diagonalization failed");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

inline StateVector eigenvector_state(const Spectrum& spectrum, int index, int n) {
    std::vector<complex_t> amps(static_cast<std::size_t>(spectrum.eigenvectors.rows()));
    for (Eigen::Index i = 0; i < spectrum.eigenvectors.rows(); ++i)
        amps[static_cast<std::size_t>(i)] = spectrum.eigenvectors(i, index);
    return StateVector(n, std::move(amps));
}

// --- Trajectory persistence --------------------------------------------------
// Text file: header "qktsne-traj v1", then per-iterate CSV rows
// (label, iteration, energy, theta values). Statevectors go to a sibling
// QKSV binary file (see state_io.hpp).

inline void save_trajectory(const Trajectory& traj, const std::string& traj_path,
                            const std::string& states_path) {
    if (traj.iterates.empty()) throw std::invalid_argument("empty trajectory");
    std::ofstream out(traj_path);
    if (!out) throw std::runtime_error("cannot write trajectory file: " + traj_path);
    out << "qktsne-traj v1\n";
    char buf[32];
    for (const auto& it : traj.iterates) {
        std::snprintf(buf, sizeof(buf), "%.17g", it.energy);
        out << traj.label << ',' << it.iteration << ',' << buf;
        for (Eigen::Index j = 0; j < it.theta.size(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", it.theta(j));
            out << ',' << buf;
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("short write on trajectory file: " + traj_path);

    std::vector<StateVector> states;
    states.reserve(traj.iterates.size());
    for (const auto& it : traj.iterates) states.push_back(it.state);
    save_statevectors(states, states_path);
}

inline Trajectory load_trajectory(const std::string& traj_path, const std::string& states_path) {
    std::ifstream in(traj_path);
    if (!in) throw std::runtime_error("cannot open trajectory file: " + traj_path);
    std::string line;
    if (!std::getline(in, line) || line != "qktsne-traj v1")
        throw std::runtime_error("bad trajectory header in " + traj_path);

    std::vector<StateVector> states = load_statevectors(states_path);
    Trajectory traj;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string tok;
        std::vector<std::string> toks;
        while (std::getline(ss, tok, ',')) toks.push_back(tok);
        if (toks.size() < 3) throw std::runtime_error("short trajectory row in " + traj_path);
        if (row >= states.size())
            throw std::runtime_error("trajectory rows exceed stored states in " + traj_path);
        Trajectory::Iterate it{std::stoi(toks[1]), Eigen::VectorXd(toks.size() - 3),
                               std::strtod(toks[2].c_str(), nullptr), states[row]};
        for (std::size_t j = 3; j < toks.size(); ++j)
            it.theta(static_cast<Eigen::Index>(j - 3)) = std::strtod(toks[j].c_str(), nullptr);
        traj.label = toks[0];
        traj.iterates.push_back(std::move(it));
        ++row;
    }
    if (row != states.size())
        throw std::runtime_error("stored states exceed trajectory rows in " + traj_path);
    return traj;
}

} // namespace qktsne

#endif
