#ifndef QKTSNE_STATE_IO_HPP
#define QKTSNE_STATE_IO_HPP

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "simulator.hpp"

namespace qktsne {

// Statevector container file: magic "QKSV", u32 version, u32 n_qubits,
// u32 count, then count * 2^n little-endian complex doubles (real, imag
// interleaved).

constexpr std::uint32_t kStateFileVersion = 1;

inline void save_statevectors(const std::vector<StateVector>& states, const std::string& path) {
    if (states.empty()) throw std::invalid_argument("no states to save");
    for (const auto& s : states)
        if (s.n_qubits() != states[0].n_qubits())
            throw std::invalid_argument("mixed qubit counts in statevector file");

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write statevector file: " + path);
    out.write("QKSV", 4);
    const std::uint32_t version = kStateFileVersion;
    const std::uint32_t n_qubits = static_cast<std::uint32_t>(states[0].n_qubits());
    const std::uint32_t count = static_cast<std::uint32_t>(states.size());
    out.write(reinterpret_cast<const char*>(&version), 4);
    out.write(reinterpret_cast<const char*>(&n_qubits), 4);
    out.write(reinterpret_cast<const char*>(&count), 4);
    for (const auto& state : states)
        for (const auto& a : state.amplitudes()) {
            const double re = a.real(), im = a.imag();
            out.write(reinterpret_cast<const char*>(&re), 8);
            out.write(reinterpret_cast<const char*>(&im), 8);
        }
    if (!out) throw std::runtime_error("short write on statevector file: " + path);
}

inline std::vector<StateVector> load_statevectors(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open statevector file: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "QKSV", 4) != 0)
        throw std::runtime_error("bad statevector magic in " + path);
    std::uint32_t version = 0, n_qubits = 0, count = 0;
    in.read(reinterpret_cast<char*>(&version), 4);
    in.read(reinterpret_cast<char*>(&n_qubits), 4);
    in.read(reinterpret_cast<char*>(&count), 4);
    if (!in || version != kStateFileVersion)
        throw std::runtime_error("unsupported statevector version in " + path);

    std::vector<StateVector> states;
    states.reserve(count);
    const std::size_t dim = std::size_t{1} << n_qubits;
    for (std::uint32_t s = 0; s < count; ++s) {
        std::vector<complex_t> amps(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            double re, im;
            in.read(reinterpret_cast<char*>(&re), 8);
            in.read(reinterpret_cast<char*>(&im), 8);
            amps[i] = {re, im};
        }
        if (!in) throw std::runtime_error("truncated statevector file: " + path);
        states.emplace_back(static_cast<int>(n_qubits), std::move(amps));
    }
    return states;
}

} // namespace qktsne

#endif
