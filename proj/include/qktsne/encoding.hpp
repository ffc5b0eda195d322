#ifndef QKTSNE_ENCODING_HPP
#define QKTSNE_ENCODING_HPP

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "simulator.hpp"

namespace qktsne {

struct Dataset {
    Eigen::MatrixXd features; // N x D
    std::vector<int> labels;  // empty when unlabeled

    bool has_labels() const { return !labels.empty(); }

    void validate() const {
        if (has_labels() && static_cast<Eigen::Index>(labels.size()) != features.rows())
            throw std::invalid_argument("label count does not match row count");
        if (!features.allFinite())
            throw std::invalid_argument("dataset contains NaN or Inf");
    }
};

struct CsvError : std::runtime_error {
    CsvError(const std::string& msg, std::size_t line)
        : std::runtime_error(msg + " (line " + std::to_string(line) + ")"), line_number(line) {}
    std::size_t line_number;
};

enum class LabelPolicy { Auto, Require, None };

namespace detail {

inline bool is_numeric_token(const std::string& tok) {
    if (tok.empty()) return false;
    char* end = nullptr;
    std::strtod(tok.c_str(), &end);
    return end == tok.c_str() + tok.size();
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        while (!tok.empty() && (tok.back() == '\r' || tok.back() == ' ')) tok.pop_back();
        std::size_t start = 0;
        while (start < tok.size() && tok[start] == ' ') ++start;
        out.push_back(tok.substr(start));
    }
    return out;
}

} // namespace detail

// One row per sample, feature columns first, optional final integer column
// "label". A header row is auto-detected by a non-numeric first token.
inline Dataset load_dataset_csv(const std::string& path, LabelPolicy policy = LabelPolicy::Auto) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path);

    std::string line;
    std::size_t line_no = 0;
    bool header_says_label = false;
    bool saw_header = false;
    std::vector<std::vector<double>> rows;
    std::size_t width = 0;

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto toks = detail::split_csv_line(line);
        if (rows.empty() && !saw_header && !detail::is_numeric_token(toks.front())) {
            saw_header = true;
            header_says_label = !toks.empty() && toks.back() == "label";
            width = toks.size();
            continue;
        }
        if (width == 0) width = toks.size();
        if (toks.size() != width)
            throw CsvError("inconsistent column count", line_no);
        std::vector<double> vals;
        vals.reserve(toks.size());
        for (const auto& t : toks) {
            if (!detail::is_numeric_token(t))
                throw CsvError("non-numeric value '" + t + "'", line_no);
            vals.push_back(std::strtod(t.c_str(), nullptr));
        }
        rows.push_back(std::move(vals));
    }
    if (rows.empty()) throw std::runtime_error("dataset is empty: " + path);

    bool with_labels;
    switch (policy) {
    case LabelPolicy::Require: with_labels = true; break;
    case LabelPolicy::None: with_labels = false; break;
    case LabelPolicy::Auto: with_labels = saw_header && header_says_label; break;
    }
    if (with_labels && width < 2)
        throw std::runtime_error("dataset has no feature columns besides the label");

    const std::size_t d = with_labels ? width - 1 : width;
    Dataset ds;
    ds.features.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
    if (with_labels) ds.labels.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < d; ++j)
            ds.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        if (with_labels) ds.labels[i] = static_cast<int>(std::lround(rows[i][d]));
    }
    ds.validate();
    return ds;
}

// PCA projection plus per-component min-max scaling onto [0, pi/2].
struct PcaScaler {
    Eigen::VectorXd mean;        // D
    Eigen::MatrixXd components;  // D x out_dim, orthonormal columns
    Eigen::VectorXd mins;        // out_dim, over training data
    Eigen::VectorXd maxs;        // out_dim

    int out_dim() const { return static_cast<int>(components.cols()); }
    int in_dim() const { return static_cast<int>(components.rows()); }
};

// Top-out_dim eigenvectors of the training covariance, by descending
// eigenvalue. Sign convention: each component's largest-magnitude entry is
// made positive so fits are deterministic.
inline PcaScaler fit_pca_scaler(const Dataset& train, int out_dim = 12) {
    const Eigen::Index n = train.features.rows();
    const Eigen::Index d = train.features.cols();
    if (n < out_dim || d < out_dim)
        throw std::invalid_argument("need at least out_dim samples and features");

    PcaScaler scaler;
    scaler.mean = train.features.colwise().mean();
    Eigen::MatrixXd centered = train.features.rowwise() - scaler.mean.transpose();
    Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("covariance eigendecomposition failed");

    // Eigen returns ascending eigenvalues; take the trailing out_dim columns.
    scaler.components.resize(d, out_dim);
    for (int c = 0; c < out_dim; ++c) {
        const Eigen::Index src = d - 1 - c;
        if (solver.eigenvalues()(src) <= 0.0)
            throw std::runtime_error("covariance is rank-deficient below out_dim");
        Eigen::VectorXd v = solver.eigenvectors().col(src);
        Eigen::Index imax;
        v.cwiseAbs().maxCoeff(&imax);
        if (v(imax) < 0.0) v = -v;
        scaler.components.col(c) = v;
    }

    Eigen::MatrixXd projected = centered * scaler.components;
    scaler.mins = projected.colwise().minCoeff();
    scaler.maxs = projected.colwise().maxCoeff();
    for (int c = 0; c < out_dim; ++c)
        if (!(scaler.mins(c) < scaler.maxs(c)))
            throw std::runtime_error("degenerate principal component " + std::to_string(c));
    return scaler;
}

// Project and scale each component onto [0, pi/2]; values outside the
// training min-max range are clamped.
inline Eigen::MatrixXd transform_to_angles(const PcaScaler& scaler, const Eigen::MatrixXd& features) {
    if (features.cols() != scaler.in_dim())
        throw std::invalid_argument("feature dimension does not match fitted scaler");
    const double half_pi = std::numbers::pi / 2.0;
    Eigen::MatrixXd projected =
        (features.rowwise() - scaler.mean.transpose()) * scaler.components;
    for (Eigen::Index i = 0; i < projected.rows(); ++i) {
        for (Eigen::Index c = 0; c < projected.cols(); ++c) {
            double v = (projected(i, c) - scaler.mins(c)) /
                       (scaler.maxs(c) - scaler.mins(c)) * half_pi;
            projected(i, c) = std::clamp(v, 0.0, half_pi);
        }
    }
    return projected;
}

// Scaler file: "qktsne-scaler v1", dims, then mean / components / mins /
// maxs as comma-separated doubles with 17 significant digits.
inline void save_scaler(const PcaScaler& scaler, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write scaler file: " + path);
    char buf[32];
    auto put = [&](double v, bool first) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        if (!first) out << ',';
        out << buf;
    };
    out << "qktsne-scaler v1\n" << scaler.in_dim() << ' ' << scaler.out_dim() << '\n';
    for (int j = 0; j < scaler.in_dim(); ++j) put(scaler.mean(j), j == 0);
    out << '\n';
    for (int i = 0; i < scaler.in_dim(); ++i) {
        for (int j = 0; j < scaler.out_dim(); ++j) put(scaler.components(i, j), j == 0);
        out << '\n';
    }
    for (int j = 0; j < scaler.out_dim(); ++j) put(scaler.mins(j), j == 0);
    out << '\n';
    for (int j = 0; j < scaler.out_dim(); ++j) put(scaler.maxs(j), j == 0);
    out << '\n';
    if (!out) throw std::runtime_error("short write on scaler file: " + path);
}

inline PcaScaler load_scaler(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scaler file: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "qktsne-scaler v1")
        throw std::runtime_error("bad scaler header in " + path);
    int d = 0, k = 0;
    if (!(in >> d >> k) || d < 1 || k < 1)
        throw std::runtime_error("bad scaler dimensions in " + path);
    std::getline(in, line);
    auto read_row = [&](Eigen::Index count) {
        if (!std::getline(in, line)) throw std::runtime_error("truncated scaler file: " + path);
        auto toks = detail::split_csv_line(line);
        if (static_cast<Eigen::Index>(toks.size()) != count)
            throw std::runtime_error("bad scaler row in " + path);
        Eigen::VectorXd v(count);
        for (Eigen::Index j = 0; j < count; ++j) v(j) = std::strtod(toks[j].c_str(), nullptr);
        return v;
    };
    PcaScaler scaler;
    scaler.mean = read_row(d);
    scaler.components.resize(d, k);
    for (int i = 0; i < d; ++i) scaler.components.row(i) = read_row(k).transpose();
    scaler.mins = read_row(k);
    scaler.maxs = read_row(k);
    return scaler;
}

// Data re-uploading encoder: an upload layer applies RX(x_i) then RY(x_i) on
// each qubit i; consecutive uploads are separated by a ring of CZ gates with
// control i and target (i+1) mod n. `layers` counts the uploads (default 2,
// i.e. one re-upload).
inline Circuit feature_map_circuit(const Eigen::VectorXd& angles, int layers = 2) {
    const int n = static_cast<int>(angles.size());
    if (n < 1) throw std::invalid_argument("empty angle vector");
    if (layers < 1) throw std::invalid_argument("need at least one upload layer");

    Circuit circuit{n, {}};
    circuit.gates.reserve(static_cast<std::size_t>(layers) * 2 * n +
                          static_cast<std::size_t>(layers - 1) * n);
    for (int layer = 0; layer < layers; ++layer) {
        if (layer > 0 && n > 1)
            for (int q = 0; q < n; ++q) circuit.gates.push_back(Gate::cz(q, (q + 1) % n));
        for (int q = 0; q < n; ++q) {
            circuit.gates.push_back(Gate::rx(q, angles(q)));
            circuit.gates.push_back(Gate::ry(q, angles(q)));
        }
    }
    return circuit;
}

} // namespace qktsne

#endif
