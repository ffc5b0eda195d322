#ifndef QKTSNE_KNN_HPP
#define QKTSNE_KNN_HPP

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "rng.hpp"

namespace qktsne {

struct CvReport {
    int k = 0;
    std::array<double, 5> fold_accuracies{};
    double mean_accuracy = 0.0;
};

// Majority vote among the k nearest training points (Euclidean metric).
// Ties between labels are broken by the smaller summed distance among the
// tied labels, then by the smaller label id.
inline int knn_predict(const Eigen::MatrixXd& train_y, const std::vector<int>& train_labels,
                       const Eigen::RowVectorXd& query, int k) {
    const Eigen::Index m = train_y.rows();
    if (m == 0) throw std::invalid_argument("empty training set");
    if (k < 1 || k > m) throw std::invalid_argument("k out of range");
    if (static_cast<Eigen::Index>(train_labels.size()) != m)
        throw std::invalid_argument("label count mismatch");

    std::vector<double> dist(m);
    for (Eigen::Index i = 0; i < m; ++i)
        dist[i] = (train_y.row(i) - query).squaredNorm();

    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](int a, int b) {
        if (dist[a] != dist[b]) return dist[a] < dist[b];
        return a < b; // stable under coincident points
    });

    std::map<int, std::pair<int, double>> votes; // label -> (count, summed distance)
    for (int i = 0; i < k; ++i) {
        auto& v = votes[train_labels[order[i]]];
        v.first += 1;
        v.second += dist[order[i]];
    }
    int best_label = votes.begin()->first;
    auto best = votes.begin()->second;
    for (const auto& [label, v] : votes) {
        if (v.first > best.first || (v.first == best.first && v.second < best.second)) {
            best_label = label;
            best = v;
        }
    }
    return best_label;
}

// Seeded shuffle, 5 near-equal folds, each fold scored against the other 4.
inline CvReport cross_validate(const Eigen::MatrixXd& y, const std::vector<int>& labels, int k,
                               std::uint64_t seed) {
    constexpr int kFolds = 5;
    const Eigen::Index n = y.rows();
    if (n < kFolds) throw std::invalid_argument("need at least 5 points for 5-fold CV");
    if (labels.empty() || static_cast<Eigen::Index>(labels.size()) != n)
        throw std::invalid_argument("labels missing or mismatched");

    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(seed);
    rng.shuffle(perm);

    CvReport report;
    report.k = k;
    double total = 0.0;
    for (int fold = 0; fold < kFolds; ++fold) {
        // Fold f takes indices perm[lo, hi); sizes differ by at most 1.
        const Eigen::Index lo = n * fold / kFolds;
        const Eigen::Index hi = n * (fold + 1) / kFolds;
        const Eigen::Index test_n = hi - lo;
        const Eigen::Index train_n = n - test_n;

        Eigen::MatrixXd train_y(train_n, y.cols());
        std::vector<int> train_labels(train_n);
        Eigen::Index t = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (i >= lo && i < hi) continue;
            train_y.row(t) = y.row(perm[i]);
            train_labels[t] = labels[perm[i]];
            ++t;
        }

        Eigen::Index correct = 0;
        for (Eigen::Index i = lo; i < hi; ++i) {
            const int predicted =
                knn_predict(train_y, train_labels, y.row(perm[i]), std::min<int>(k, train_n));
            if (predicted == labels[perm[i]]) ++correct;
        }
        const double acc = static_cast<double>(correct) / static_cast<double>(test_n);
        report.fold_accuracies[fold] = acc;
        total += acc;
    }
    report.mean_accuracy = total / kFolds;
    return report;
}

} // namespace qktsne

#endif
