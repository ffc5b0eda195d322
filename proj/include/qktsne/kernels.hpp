#ifndef QKTSNE_KERNELS_HPP
#define QKTSNE_KERNELS_HPP

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "simulator.hpp"

namespace qktsne {

enum class KernelKind { QuantumFidelity, Gaussian };

struct KernelSpec {
    KernelKind kind = KernelKind::QuantumFidelity;
    double gaussian_bandwidth = 1.0; // sigma'; default makes the exponent -||.||^2/2

    void validate() const {
        if (kind == KernelKind::Gaussian && !(gaussian_bandwidth > 0.0))
            throw std::invalid_argument("gaussian bandwidth must be positive");
    }
};

inline std::string kernel_kind_name(KernelKind k) {
    return k == KernelKind::QuantumFidelity ? "quantum-fidelity" : "gaussian";
}

inline KernelKind kernel_kind_from_name(const std::string& name) {
    if (name == "quantum-fidelity") return KernelKind::QuantumFidelity;
    if (name == "gaussian") return KernelKind::Gaussian;
    throw std::invalid_argument("unknown kernel kind: " + name);
}

// Symmetric kernel matrix with unit diagonal.
struct GramMatrix {
    Eigen::MatrixXd entries;

    int n() const { return static_cast<int>(entries.rows()); }
};

// Pairwise fidelities |<psi_i|psi_j>|^2, filled symmetrically. The diagonal
// is set to 1 analytically: a normalized pure state always self-overlaps at
// 1, so no fidelity evaluation is spent on it. Exactly N(N-1)/2 fidelity
// evaluations are consumed. Each (i,j) pair is computed once, so the result
// does not depend on how the rows are split across threads.
inline GramMatrix gram_quantum(const std::vector<StateVector>& states, ExecCounter& counter,
                               int threads = 1) {
    if (states.empty()) throw std::invalid_argument("no states given");
    const int n = static_cast<int>(states.size());
    for (const auto& s : states)
        if (s.n_qubits() != states[0].n_qubits())
            throw std::invalid_argument("mixed qubit counts in gram_quantum");

    GramMatrix gram;
    gram.entries.setOnes(n, n);
    auto fill_rows = [&](int begin, int end) {
        for (int i = begin; i < end; ++i)
            for (int j = i + 1; j < n; ++j) {
                const double f = fidelity(states[i], states[j], counter);
                gram.entries(i, j) = f;
                gram.entries(j, i) = f;
            }
    };
    if (threads <= 1 || n < 4) {
        fill_rows(0, n);
    } else {
        const int workers = std::min(threads, n);
        std::vector<std::thread> pool;
        pool.reserve(workers);
        // Interleaved rows balance the triangular workload.
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (int i = w; i < n; i += workers)
                    for (int j = i + 1; j < n; ++j) {
                        const double f = fidelity(states[i], states[j], counter);
                        gram.entries(i, j) = f;
                        gram.entries(j, i) = f;
                    }
            });
        for (auto& t : pool) t.join();
    }
    return gram;
}

// entries[i][j] = exp(-||x_i - x_j||^2 / (2 sigma'^2))
inline GramMatrix gram_gaussian(const Eigen::MatrixXd& features, const KernelSpec& spec) {
    if (spec.kind != KernelKind::Gaussian)
        throw std::invalid_argument("gram_gaussian requires a Gaussian kernel spec");
    spec.validate();
    const int n = static_cast<int>(features.rows());
    const double inv = 1.0 / (2.0 * spec.gaussian_bandwidth * spec.gaussian_bandwidth);

    GramMatrix gram;
    gram.entries.setOnes(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double d2 = (features.row(i) - features.row(j)).squaredNorm();
            const double k = std::exp(-d2 * inv);
            gram.entries(i, j) = k;
            gram.entries(j, i) = k;
        }
    return gram;
}

// Kernel values of one unseen state against the training set; consumes
// exactly N fidelity evaluations.
inline Eigen::VectorXd kernel_row(const StateVector& new_point,
                                  const std::vector<StateVector>& training_states,
                                  ExecCounter& counter) {
    Eigen::VectorXd row(static_cast<Eigen::Index>(training_states.size()));
    for (std::size_t i = 0; i < training_states.size(); ++i)
        row(static_cast<Eigen::Index>(i)) = fidelity(training_states[i], new_point, counter);
    return row;
}

inline Eigen::VectorXd kernel_row(const Eigen::VectorXd& new_point,
                                  const Eigen::MatrixXd& training_features,
                                  const KernelSpec& spec) {
    if (spec.kind != KernelKind::Gaussian)
        throw std::invalid_argument("feature-vector kernel_row requires a Gaussian kernel");
    spec.validate();
    if (new_point.size() != training_features.cols())
        throw std::invalid_argument("kernel_row dimension mismatch");
    const double inv = 1.0 / (2.0 * spec.gaussian_bandwidth * spec.gaussian_bandwidth);
    Eigen::VectorXd row(training_features.rows());
    for (Eigen::Index i = 0; i < training_features.rows(); ++i)
        row(i) = std::exp(-(training_features.row(i).transpose() - new_point).squaredNorm() * inv);
    return row;
}

// --- Gram cache file --------------------------------------------------------
// magic "QKTS", u32 version = 1, u32 N, then N*N little-endian doubles
// row-major. Round trips are bit-exact.

constexpr std::uint32_t kGramFormatVersion = 1;

inline void save_gram(const GramMatrix& gram, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write gram cache: " + path);
    out.write("QKTS", 4);
    const std::uint32_t version = kGramFormatVersion;
    const std::uint32_t n = static_cast<std::uint32_t>(gram.n());
    out.write(reinterpret_cast<const char*>(&version), 4);
    out.write(reinterpret_cast<const char*>(&n), 4);
    for (int i = 0; i < gram.n(); ++i)
        for (int j = 0; j < gram.n(); ++j) {
            const double v = gram.entries(i, j);
            out.write(reinterpret_cast<const char*>(&v), 8);
        }
    if (!out) throw std::runtime_error("short write on gram cache: " + path);
}

inline GramMatrix load_gram(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open gram cache: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "QKTS", 4) != 0)
        throw std::runtime_error("bad gram cache magic in " + path);
    std::uint32_t version = 0, n = 0;
    in.read(reinterpret_cast<char*>(&version), 4);
    in.read(reinterpret_cast<char*>(&n), 4);
    if (!in || version != kGramFormatVersion)
        throw std::runtime_error("unsupported gram cache version in " + path);
    GramMatrix gram;
    gram.entries.resize(n, n);
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = 0; j < n; ++j) {
            double v;
            in.read(reinterpret_cast<char*>(&v), 8);
            gram.entries(i, j) = v;
        }
    if (!in) throw std::runtime_error("truncated gram cache: " + path);
    return gram;
}

} // namespace qktsne

#endif
