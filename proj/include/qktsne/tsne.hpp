#ifndef QKTSNE_TSNE_HPP
#define QKTSNE_TSNE_HPP

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace qktsne {

// Floor applied inside logs and denominators so zero similarities never
// produce -inf; applied symmetrically to p and q.
constexpr double kSimilarityFloor = 1e-12;

// Symmetrized high-dimensional similarities with the per-row bandwidths that
// produced them.
struct SimilarityP {
    Eigen::MatrixXd p;              // N x N, zero diagonal, sums to 1
    Eigen::VectorXd sigmas;         // per-row Gaussian bandwidth
    double perplexity_target = 0.0;
    std::vector<int> unconverged_rows; // rows whose calibration hit the bracket
};

// Gaussian conditional distribution over the other points of one row:
// p_{j|i} = exp(-d2_j / 2 sigma^2) / sum_k exp(-d2_k / 2 sigma^2).
// `distances_sq` excludes the self term. Shifted by the row minimum before
// exponentiation for stability.
inline Eigen::VectorXd conditional_p(const Eigen::VectorXd& distances_sq, double sigma) {
    if (distances_sq.size() < 1) throw std::invalid_argument("empty distance row");
    if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
    if (!distances_sq.allFinite()) throw std::invalid_argument("degenerate distance row");

    const double scale = 1.0 / (2.0 * sigma * sigma);
    const double shift = distances_sq.minCoeff();
    Eigen::VectorXd w = (-(distances_sq.array() - shift) * scale).exp();
    const double total = w.sum();
    if (!(total > 0.0)) throw std::invalid_argument("degenerate distance row");
    return w / total;
}

// 2^entropy of a conditional row.
inline double perplexity_of(const Eigen::VectorXd& conditional) {
    double h = 0.0;
    for (Eigen::Index j = 0; j < conditional.size(); ++j) {
        const double p = conditional(j);
        if (p > 0.0) h -= p * std::log2(p);
    }
    return std::exp2(h);
}

struct SigmaResult {
    double sigma;
    bool converged;
};

// Bisection on sigma until |log2 Perp(sigma) - log2 target| < 1e-5 or 64
// iterations. The initial bracket [1e-20, 1e20] is expanded if the target
// lies outside; an unreachable target returns the boundary sigma with
// converged = false.
inline SigmaResult calibrate_sigma(const Eigen::VectorXd& distances_sq,
                                   double perplexity_target) {
    if (distances_sq.size() < 2)
        throw std::invalid_argument("need at least 2 neighbors to calibrate");
    if (!(perplexity_target > 0.0) ||
        perplexity_target > static_cast<double>(distances_sq.size()))
        throw std::invalid_argument("perplexity target out of range");

    const double target_log = std::log2(perplexity_target);
    const double tol = 1e-5;
    auto log_perp = [&](double sigma) {
        return std::log2(perplexity_of(conditional_p(distances_sq, sigma)));
    };

    double lo = 1e-20, hi = 1e20;
    // Perplexity is monotone increasing in sigma; expand if the bracket
    // does not straddle the target.
    for (int i = 0; i < 64 && log_perp(lo) > target_log; ++i) lo *= 1e-2;
    for (int i = 0; i < 64 && log_perp(hi) < target_log; ++i) hi *= 1e2;

    // Bisect in log space: sigma spans many decades, so a linear midpoint
    // would exhaust the iteration budget before resolving moderate sigmas.
    double best = std::sqrt(lo * hi);
    bool converged = false;
    for (int iter = 0; iter < 64; ++iter) {
        best = std::sqrt(lo * hi);
        const double lp = log_perp(best);
        if (std::abs(lp - target_log) < tol) {
            converged = true;
            break;
        }
        if (lp < target_log)
            lo = best;
        else
            hi = best;
    }
    return {best, converged};
}

// Builds the symmetrized similarities p_ij = (p_{j|i} + p_{i|j}) / 2N from a
// full matrix of squared distances (diagonal ignored). For quantum inputs
// pass d2_ij = 1 - gram_ij; for classical, squared Euclidean distances.
inline SimilarityP build_p(const Eigen::MatrixXd& distances_sq, double perplexity_target) {
    const Eigen::Index n = distances_sq.rows();
    if (n < 2 || distances_sq.cols() != n)
        throw std::invalid_argument("build_p needs a square matrix with N >= 2");

    Eigen::MatrixXd conditional(n, n);
    SimilarityP result;
    result.sigmas.resize(n);
    result.perplexity_target = perplexity_target;

    Eigen::VectorXd row(n - 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::Index k = 0;
        for (Eigen::Index j = 0; j < n; ++j)
            if (j != i) row(k++) = distances_sq(i, j);
        SigmaResult cal{1.0, true};
        if (n > 2) {
            // With a single neighbor (N=2) the conditional row is forced to 1
            // and no bandwidth is needed.
            try {
                cal = calibrate_sigma(row, perplexity_target);
            } catch (const std::invalid_argument& e) {
                throw std::runtime_error("similarity row " + std::to_string(i) + ": " + e.what());
            }
        }
        result.sigmas(i) = cal.sigma;
        if (!cal.converged) result.unconverged_rows.push_back(static_cast<int>(i));
        const Eigen::VectorXd cp = conditional_p(row, cal.sigma);
        k = 0;
        conditional(i, i) = 0.0;
        for (Eigen::Index j = 0; j < n; ++j)
            if (j != i) conditional(i, j) = cp(k++);
    }

    result.p = (conditional + conditional.transpose()) / (2.0 * static_cast<double>(n));
    result.p.diagonal().setZero();
    return result;
}

// Student-t similarities of an embedding plus the normalizer Z.
struct SimilarityQ {
    Eigen::MatrixXd q;       // N x N, zero diagonal, sums to 1
    Eigen::MatrixXd weights; // (1 + ||y_i - y_j||^2)^-1, unnormalized
    double normalizer = 0.0; // Z
};

inline SimilarityQ build_q(const Eigen::MatrixXd& y) {
    const Eigen::Index n = y.rows();
    if (n < 2) throw std::invalid_argument("build_q needs N >= 2");

    SimilarityQ result;
    result.weights.resize(n, n);
    double z = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        result.weights(i, i) = 0.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double w = 1.0 / (1.0 + (y.row(i) - y.row(j)).squaredNorm());
            result.weights(i, j) = w;
            result.weights(j, i) = w;
            z += 2.0 * w;
        }
    }
    result.normalizer = z;
    result.q = result.weights / z;
    return result;
}

// C = sum_{i != j, p_ij > 0} p_ij log(p_ij / q_ij), with q floored at
// kSimilarityFloor inside the log.
inline double kl_cost(const Eigen::MatrixXd& p, const Eigen::MatrixXd& q) {
    if (p.rows() != q.rows() || p.cols() != q.cols())
        throw std::invalid_argument("kl_cost shape mismatch");
    double c = 0.0;
    for (Eigen::Index i = 0; i < p.rows(); ++i)
        for (Eigen::Index j = 0; j < p.cols(); ++j) {
            if (i == j) continue;
            const double pij = p(i, j);
            if (pij <= 0.0) continue;
            const double qij = std::max(q(i, j), kSimilarityFloor);
            c += pij * std::log(std::max(pij, kSimilarityFloor) / qij);
        }
    return c;
}

// dC/dy_i = 4 sum_j (p_ij - q_ij) (y_i - y_j) (1 + ||y_i - y_j||^2)^-1,
// with q precomputed to share work with the cost evaluation.
inline Eigen::MatrixXd grad_cost_wrt_y(const Eigen::MatrixXd& p, const Eigen::MatrixXd& y,
                                       const SimilarityQ& q) {
    const Eigen::Index n = y.rows();
    Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(n, y.cols());
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) continue;
            const double coeff = 4.0 * (p(i, j) - q.q(i, j)) * q.weights(i, j);
            grad.row(i) += coeff * (y.row(i) - y.row(j));
        }
    return grad;
}

inline Eigen::MatrixXd grad_cost_wrt_y(const Eigen::MatrixXd& p, const Eigen::MatrixXd& y) {
    return grad_cost_wrt_y(p, y, build_q(y));
}

} // namespace qktsne

#endif
