#ifndef QKTSNE_EMBEDDER_HPP
#define QKTSNE_EMBEDDER_HPP

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kernels.hpp"
#include "rng.hpp"
#include "tsne.hpp"

namespace qktsne {

struct AdamConfig {
    double learning_rate = 0.1;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// First/second moment state for Adam, shaped like the parameter matrix.
struct AdamState {
    explicit AdamState(Eigen::Index rows, Eigen::Index cols, AdamConfig config = {})
        : config(config),
          m(Eigen::MatrixXd::Zero(rows, cols)),
          v(Eigen::MatrixXd::Zero(rows, cols)) {}

    void update(Eigen::MatrixXd& params, const Eigen::MatrixXd& grad) {
        ++step;
        m = config.beta1 * m + (1.0 - config.beta1) * grad;
        v = config.beta2 * v + (1.0 - config.beta2) * grad.cwiseProduct(grad);
        const double bc1 = 1.0 - std::pow(config.beta1, step);
        const double bc2 = 1.0 - std::pow(config.beta2, step);
        params.array() -= config.learning_rate * (m.array() / bc1) /
                          ((v.array() / bc2).sqrt() + config.epsilon);
    }

    AdamConfig config;
    long step = 0;
    Eigen::MatrixXd m;
    Eigen::MatrixXd v;
};

struct TrainConfig {
    double perplexity = 30.0;
    int iterations = 1000;
    AdamConfig adam;
    std::uint64_t seed = 0;
    double alpha_init_lo = 0.0;
    double alpha_init_hi = 1.0;
    int embed_dim = 2;
    // Optional early exaggeration: P scaled by 4 for the first 100
    // iterations. Off by default.
    bool early_exaggeration = false;
};

struct EmbeddingModel {
    Eigen::MatrixXd alpha; // N x d
    KernelSpec kernel;
    double perplexity = 30.0;
    std::uint64_t seed = 0;
    GramMatrix train_gram;
    std::string training_refs_path; // sibling file holding the training references
    std::vector<double> cost_history;
    std::vector<int> unconverged_p_rows;

    int n_train() const { return static_cast<int>(alpha.rows()); }
    int embed_dim() const { return static_cast<int>(alpha.cols()); }
};

// y_m = sum_i alpha_i * k(x_i, x_m); rows of gram_rows hold the kernel
// values of each mapped point against the training set.
inline Eigen::MatrixXd map_points(const Eigen::MatrixXd& alpha, const Eigen::MatrixXd& gram_rows) {
    if (gram_rows.cols() != alpha.rows())
        throw std::invalid_argument("map_points shape mismatch");
    return gram_rows * alpha;
}

// Chain rule through the kernel expansion: dC/dalpha_l = sum_i dC/dy_i * k(x_l, x_i).
inline Eigen::MatrixXd grad_cost_wrt_alpha(const Eigen::MatrixXd& p, const Eigen::MatrixXd& alpha,
                                           const Eigen::MatrixXd& train_gram) {
    const Eigen::MatrixXd y = map_points(alpha, train_gram);
    const Eigen::MatrixXd grad_y = grad_cost_wrt_y(p, y);
    return train_gram.transpose() * grad_y;
}

// Minimizes the KL cost over alpha with Adam. `train_gram` supplies the
// kernel rows of the expansion; `similarity_dist_sq` supplies the squared
// distances that define P (1 - gram for the fidelity kernel, squared
// Euclidean feature distances for the classical branch).
inline EmbeddingModel train_embedding(const Eigen::MatrixXd& train_gram,
                                      const Eigen::MatrixXd& similarity_dist_sq,
                                      const KernelSpec& kernel, const TrainConfig& config) {
    const Eigen::Index n = train_gram.rows();
    if (train_gram.cols() != n || similarity_dist_sq.rows() != n ||
        similarity_dist_sq.cols() != n)
        throw std::invalid_argument("train_embedding shape mismatch");
    if (!(config.perplexity < static_cast<double>(n - 1)))
        throw std::invalid_argument("perplexity must be below N-1");

    const SimilarityP sim = build_p(similarity_dist_sq, config.perplexity);

    EmbeddingModel model;
    model.kernel = kernel;
    model.perplexity = config.perplexity;
    model.seed = config.seed;
    model.train_gram.entries = train_gram;
    model.unconverged_p_rows = sim.unconverged_rows;

    Rng rng(config.seed);
    model.alpha.resize(n, config.embed_dim);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < config.embed_dim; ++j)
            model.alpha(i, j) = rng.uniform(config.alpha_init_lo, config.alpha_init_hi);

    AdamState adam(n, config.embed_dim, config.adam);
    model.cost_history.reserve(static_cast<std::size_t>(config.iterations) + 1);

    for (int iter = 0; iter <= config.iterations; ++iter) {
        const bool exaggerate = config.early_exaggeration && iter < 100;
        const Eigen::MatrixXd y = map_points(model.alpha, train_gram);
        const SimilarityQ q = build_q(y);
        const double cost = kl_cost(sim.p, q.q);
        if (!std::isfinite(cost))
            throw std::runtime_error("non-finite cost at iteration " + std::to_string(iter));
        model.cost_history.push_back(cost);
        if (iter == config.iterations) break;

        Eigen::MatrixXd grad_y =
            exaggerate ? grad_cost_wrt_y(4.0 * sim.p, y, q) : grad_cost_wrt_y(sim.p, y, q);
        Eigen::MatrixXd grad_alpha = train_gram.transpose() * grad_y;
        adam.update(model.alpha, grad_alpha);
    }
    return model;
}

// Out-of-sample mapping: one kernel row per new point, then the linear
// expansion. Never mutates the model.
inline Eigen::MatrixXd transform_points(const EmbeddingModel& model,
                                        const Eigen::MatrixXd& gram_rows) {
    return map_points(model.alpha, gram_rows);
}

// --- Model file -------------------------------------------------------------
// Text, line-oriented:
//   qktsne-model v1
//   <kernel kind> [bandwidth]
//   N d perplexity seed
//   <training refs path>
//   N lines of d comma-separated alpha values, 17 significant digits

namespace detail {

inline std::string format_g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace detail

inline void save_model(const EmbeddingModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write model file: " + path);
    out << "qktsne-model v1\n";
    out << kernel_kind_name(model.kernel.kind);
    if (model.kernel.kind == KernelKind::Gaussian)
        out << ' ' << detail::format_g17(model.kernel.gaussian_bandwidth);
    out << '\n';
    out << model.n_train() << ' ' << model.embed_dim() << ' '
        << detail::format_g17(model.perplexity) << ' ' << model.seed << '\n';
    out << model.training_refs_path << '\n';
    for (int i = 0; i < model.n_train(); ++i) {
        for (int j = 0; j < model.embed_dim(); ++j) {
            if (j) out << ',';
            out << detail::format_g17(model.alpha(i, j));
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("short write on model file: " + path);
}

inline EmbeddingModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "qktsne-model v1")
        throw std::runtime_error("bad model header in " + path);

    EmbeddingModel model;
    if (!std::getline(in, line)) throw std::runtime_error("truncated model file: " + path);
    {
        std::istringstream ss(line);
        std::string kind;
        ss >> kind;
        model.kernel.kind = kernel_kind_from_name(kind);
        if (model.kernel.kind == KernelKind::Gaussian)
            ss >> model.kernel.gaussian_bandwidth;
    }
    int n = 0, d = 0;
    if (!std::getline(in, line)) throw std::runtime_error("truncated model file: " + path);
    {
        std::istringstream ss(line);
        ss >> n >> d >> model.perplexity >> model.seed;
        if (!ss || n < 1 || d < 1)
            throw std::runtime_error("bad model dimensions in " + path);
    }
    if (!std::getline(in, model.training_refs_path))
        throw std::runtime_error("truncated model file: " + path);

    model.alpha.resize(n, d);
    for (int i = 0; i < n; ++i) {
        if (!std::getline(in, line))
            throw std::runtime_error("truncated alpha block in " + path);
        std::istringstream ss(line);
        std::string tok;
        for (int j = 0; j < d; ++j) {
            if (!std::getline(ss, tok, ','))
                throw std::runtime_error("short alpha row in " + path);
            model.alpha(i, j) = std::strtod(tok.c_str(), nullptr);
        }
    }
    return model;
}

} // namespace qktsne

#endif
