// Command-line front end for the quantum-kernel t-SNE toolkit.
//
// Subcommands: digits, knn, vqe-trace, transform, plot.
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <qktsne/embedder.hpp>
#include <qktsne/encoding.hpp>
#include <qktsne/kernels.hpp>
#include <qktsne/knn.hpp>
#include <qktsne/rng.hpp>
#include <qktsne/simulator.hpp>
#include <qktsne/state_io.hpp>
#include <qktsne/svg.hpp>
#include <qktsne/tsne.hpp>
#include <qktsne/vqe.hpp>

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace qktsne;

namespace {

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GlobalOpts {
    std::uint64_t seed = 42;
    std::string out = "out";
    int threads = 1;
    std::string cache = "reuse"; // reuse | recompute
};

std::string g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t hash = 0xcbf29ce484222325ULL) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
        hash ^= bytes[i];
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

// Embedding CSV: id, y0, y1, label (label may be a class id or a series name).
void write_embedding_csv(const fs::path& path, const std::vector<std::string>& ids,
                         const Eigen::MatrixXd& y, const std::vector<std::string>& labels) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "id,y0,y1,label\n";
    for (Eigen::Index i = 0; i < y.rows(); ++i)
        out << ids[static_cast<std::size_t>(i)] << ',' << g17(y(i, 0)) << ',' << g17(y(i, 1))
            << ',' << labels[static_cast<std::size_t>(i)] << '\n';
}

struct EmbeddingCsv {
    std::vector<std::string> ids;
    Eigen::MatrixXd y;
    std::vector<std::string> labels;
};

EmbeddingCsv read_embedding_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open embedding file: " + path.string());
    std::string line;
    if (!std::getline(in, line) || line.rfind("id,y0,y1,label", 0) != 0)
        throw std::runtime_error("bad embedding header in " + path.string());

    EmbeddingCsv result;
    std::vector<std::array<double, 2>> coords;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string id, y0, y1, label;
        if (!std::getline(ss, id, ',') || !std::getline(ss, y0, ',') ||
            !std::getline(ss, y1, ',') || !std::getline(ss, label))
            throw CsvError("short embedding row", line_no);
        result.ids.push_back(id);
        coords.push_back({std::strtod(y0.c_str(), nullptr), std::strtod(y1.c_str(), nullptr)});
        result.labels.push_back(label);
    }
    result.y.resize(static_cast<Eigen::Index>(coords.size()), 2);
    for (std::size_t i = 0; i < coords.size(); ++i) {
        result.y(static_cast<Eigen::Index>(i), 0) = coords[i][0];
        result.y(static_cast<Eigen::Index>(i), 1) = coords[i][1];
    }
    return result;
}

std::vector<int> labels_as_int(const std::vector<std::string>& labels) {
    std::vector<int> out;
    out.reserve(labels.size());
    for (const auto& l : labels) {
        char* end = nullptr;
        const long v = std::strtol(l.c_str(), &end, 10);
        if (end != l.c_str() + l.size())
            throw std::runtime_error("non-integer label '" + l + "'");
        out.push_back(static_cast<int>(v));
    }
    return out;
}

void write_metadata(const fs::path& dir, const std::string& command, const json& config,
                    const GlobalOpts& global, const ExecCounter& counter) {
    json meta;
    meta["command"] = command;
    meta["config"] = config;
    meta["seed"] = global.seed;
    meta["threads"] = global.threads;
    meta["cache"] = global.cache;
    meta["format_versions"] = {{"gram", kGramFormatVersion},
                               {"statevectors", kStateFileVersion},
                               {"model", 1},
                               {"trajectory", 1}};
    meta["exec_counter"] = {{"state_preparations", counter.state_preparations.load()},
                            {"fidelity_evaluations", counter.fidelity_evaluations.load()}};
    write_text(dir / "metadata.json", meta.dump(2) + "\n");
}

Eigen::MatrixXd pairwise_sq_distances(const Eigen::MatrixXd& x) {
    const Eigen::Index n = x.rows();
    Eigen::MatrixXd d2(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        d2(i, i) = 0.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double d = (x.row(i) - x.row(j)).squaredNorm();
            d2(i, j) = d;
            d2(j, i) = d;
        }
    }
    return d2;
}

std::vector<StateVector> encode_rows(const Eigen::MatrixXd& angles, int layers,
                                     ExecCounter& counter) {
    std::vector<StateVector> states;
    states.reserve(static_cast<std::size_t>(angles.rows()));
    for (Eigen::Index i = 0; i < angles.rows(); ++i)
        states.push_back(run_circuit(feature_map_circuit(angles.row(i), layers), counter));
    return states;
}

void save_feature_csv(const fs::path& path, const Eigen::MatrixXd& features) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    for (Eigen::Index i = 0; i < features.rows(); ++i) {
        for (Eigen::Index j = 0; j < features.cols(); ++j)
            out << (j ? "," : "") << g17(features(i, j));
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// digits

struct DigitsOpts {
    std::string data = "data/digits.csv";
    std::string kernel = "quantum";
    double perplexity = 30.0;
    int iterations = 1000;
    double learning_rate = 0.1;
    int pca_dim = 12;
    int layers = 2;
    int limit = 0;           // 0 = use every row
    double train_fraction = 0.8;
    bool exaggeration = false;
    double bandwidth = 1.0;
};

int run_digits(const DigitsOpts& opts, const GlobalOpts& global) {
    const fs::path out_dir(global.out);
    fs::create_directories(out_dir);

    Dataset full = load_dataset_csv(opts.data, LabelPolicy::Require);
    if (opts.limit > 0 && opts.limit < full.features.rows()) {
        full.features.conservativeResize(opts.limit, Eigen::NoChange);
        full.labels.resize(static_cast<std::size_t>(opts.limit));
    }
    const Eigen::Index n = full.features.rows();

    // Seeded split: shuffle row indices, first train_fraction go to training.
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    Rng split_rng(global.seed);
    split_rng.shuffle(order);
    const Eigen::Index n_train =
        static_cast<Eigen::Index>(std::llround(opts.train_fraction * static_cast<double>(n)));
    if (n_train < opts.pca_dim || n_train >= n)
        throw std::runtime_error("degenerate train/test split");

    Dataset train, test;
    train.features.resize(n_train, full.features.cols());
    test.features.resize(n - n_train, full.features.cols());
    train.labels.resize(static_cast<std::size_t>(n_train));
    test.labels.resize(static_cast<std::size_t>(n - n_train));
    std::vector<std::string> train_ids, test_ids;
    for (Eigen::Index i = 0; i < n; ++i) {
        const int src = order[static_cast<std::size_t>(i)];
        if (i < n_train) {
            train.features.row(i) = full.features.row(src);
            train.labels[static_cast<std::size_t>(i)] = full.labels[static_cast<std::size_t>(src)];
            train_ids.push_back(std::to_string(src));
        } else {
            test.features.row(i - n_train) = full.features.row(src);
            test.labels[static_cast<std::size_t>(i - n_train)] =
                full.labels[static_cast<std::size_t>(src)];
            test_ids.push_back(std::to_string(src));
        }
    }

    const PcaScaler scaler = fit_pca_scaler(train, opts.pca_dim);
    const Eigen::MatrixXd angles_train = transform_to_angles(scaler, train.features);
    const Eigen::MatrixXd angles_test = transform_to_angles(scaler, test.features);
    save_scaler(scaler, (out_dir / "scaler.txt").string());

    ExecCounter counter;
    KernelSpec spec;
    Eigen::MatrixXd train_gram;
    Eigen::MatrixXd similarity_d2;
    Eigen::MatrixXd test_rows(n - n_train, n_train);
    std::string refs_name;

    if (opts.kernel == "quantum") {
        spec = {KernelKind::QuantumFidelity, 1.0};
        std::vector<StateVector> train_states = encode_rows(angles_train, opts.layers, counter);
        refs_name = "train_states.qksv";
        save_statevectors(train_states, (out_dir / refs_name).string());

        // Gram cache keyed by the encoded inputs and the kernel spec.
        std::uint64_t key = fnv1a64(angles_train.data(),
                                    sizeof(double) * static_cast<std::size_t>(angles_train.size()));
        key = fnv1a64(&opts.layers, sizeof(opts.layers), key);
        const fs::path gram_path = out_dir / ("gram_" + hex64(key) + ".qkts");
        if (global.cache == "reuse" && fs::exists(gram_path)) {
            train_gram = load_gram(gram_path.string()).entries;
            if (train_gram.rows() != n_train)
                throw std::runtime_error("gram cache size mismatch: " + gram_path.string());
            std::cerr << "reusing gram cache " << gram_path << '\n';
        } else {
            train_gram = gram_quantum(train_states, counter, global.threads).entries;
            save_gram(GramMatrix{train_gram}, gram_path.string());
        }
        similarity_d2 = 1.0 - train_gram.array();

        for (Eigen::Index i = 0; i < angles_test.rows(); ++i) {
            const StateVector s =
                run_circuit(feature_map_circuit(angles_test.row(i), opts.layers), counter);
            test_rows.row(i) = kernel_row(s, train_states, counter).transpose();
        }
    } else if (opts.kernel == "gaussian") {
        spec = {KernelKind::Gaussian, opts.bandwidth};
        train_gram = gram_gaussian(angles_train, spec).entries;
        similarity_d2 = pairwise_sq_distances(angles_train);
        refs_name = "train_angles.csv";
        save_feature_csv(out_dir / refs_name, angles_train);
        for (Eigen::Index i = 0; i < angles_test.rows(); ++i)
            test_rows.row(i) =
                kernel_row(Eigen::VectorXd(angles_test.row(i)), angles_train, spec).transpose();
    } else {
        throw std::invalid_argument("unknown kernel: " + opts.kernel);
    }

    TrainConfig config;
    config.perplexity = opts.perplexity;
    config.iterations = opts.iterations;
    config.adam.learning_rate = opts.learning_rate;
    config.seed = global.seed;
    config.alpha_init_lo = 0.0;
    config.alpha_init_hi = 1.0;
    config.early_exaggeration = opts.exaggeration;

    EmbeddingModel model;
    try {
        model = train_embedding(train_gram, similarity_d2, spec, config);
    } catch (const std::runtime_error& e) {
        throw NumericalError(e.what());
    }
    model.training_refs_path = refs_name;
    save_model(model, (out_dir / "model.qkm").string());
    if (!model.unconverged_p_rows.empty())
        std::cerr << "warning: " << model.unconverged_p_rows.size()
                  << " similarity rows did not reach the perplexity target\n";

    const Eigen::MatrixXd y_train = transform_points(model, train_gram);
    const Eigen::MatrixXd y_test = transform_points(model, test_rows);

    auto label_strings = [](const std::vector<int>& labels) {
        std::vector<std::string> out;
        out.reserve(labels.size());
        for (int l : labels) out.push_back(std::to_string(l));
        return out;
    };
    write_embedding_csv(out_dir / "embedding_train.csv", train_ids, y_train,
                        label_strings(train.labels));
    write_embedding_csv(out_dir / "embedding_test.csv", test_ids, y_test,
                        label_strings(test.labels));
    write_text(out_dir / "scatter_train.svg", scatter_svg(y_train, train.labels));
    write_text(out_dir / "scatter_test.svg", scatter_svg(y_test, test.labels));

    {
        std::ofstream hist(out_dir / "cost_history.csv", std::ios::binary);
        hist << "iteration,kl_cost\n";
        for (std::size_t i = 0; i < model.cost_history.size(); ++i)
            hist << i << ',' << g17(model.cost_history[i]) << '\n';
    }

    json config_json = {{"data", opts.data},
                        {"kernel", opts.kernel},
                        {"perplexity", opts.perplexity},
                        {"iterations", opts.iterations},
                        {"learning_rate", opts.learning_rate},
                        {"pca_dim", opts.pca_dim},
                        {"layers", opts.layers},
                        {"limit", opts.limit},
                        {"train_fraction", opts.train_fraction},
                        {"exaggeration", opts.exaggeration},
                        {"n_train", n_train},
                        {"n_test", n - n_train}};
    write_metadata(out_dir, "digits", config_json, global, counter);

    std::cout << "digits: trained on " << n_train << " samples, final KL cost "
              << model.cost_history.back() << "\n"
              << "state preparations: " << counter.state_preparations.load()
              << ", fidelity evaluations: " << counter.fidelity_evaluations.load() << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// knn

struct KnnOpts {
    std::string embedding;
    std::vector<int> ks = {1, 10, 20};
    std::string model_name;
};

int run_knn(const KnnOpts& opts, const GlobalOpts& global) {
    const fs::path out_dir(global.out);
    fs::create_directories(out_dir);

    EmbeddingCsv embedding = read_embedding_csv(opts.embedding);
    const std::vector<int> labels = labels_as_int(embedding.labels);
    const std::string model_name =
        opts.model_name.empty() ? fs::path(opts.embedding).stem().string() : opts.model_name;

    std::ostringstream report;
    report << "model,k,fold0,fold1,fold2,fold3,fold4,mean\n";
    for (int k : opts.ks) {
        const CvReport cv = cross_validate(embedding.y, labels, k, global.seed);
        report << model_name << ',' << k;
        for (double acc : cv.fold_accuracies) report << ',' << g17(acc);
        report << ',' << g17(cv.mean_accuracy) << '\n';
    }
    write_text(out_dir / "knn_report.csv", report.str());
    std::cout << report.str();

    ExecCounter counter;
    write_metadata(out_dir, "knn",
                   {{"embedding", opts.embedding}, {"k", opts.ks}, {"model", model_name}},
                   global, counter);
    return 0;
}

// ---------------------------------------------------------------------------
// vqe-trace

struct VqeOpts {
    int n_qubits = 8;
    double coupling_j = -1.0;
    double field_h = -0.75;
    int depth = 6;
    int vqe_iterations = 100;
    double perplexity = 10.0;
    int train_iterations = 1000;
    double learning_rate = 0.1;
    std::vector<std::uint64_t> trajectory_seeds = {2, 4, 25};
};

int run_vqe_trace(const VqeOpts& opts, const GlobalOpts& global) {
    const fs::path out_dir(global.out);
    fs::create_directories(out_dir);

    const auto hamiltonian = tfim_hamiltonian(opts.n_qubits, opts.coupling_j, opts.field_h);
    const Ansatz ansatz{opts.n_qubits, opts.depth};
    ExecCounter counter;

    std::vector<Trajectory> trajectories;
    for (std::size_t t = 0; t < opts.trajectory_seeds.size(); ++t) {
        const std::string label = "trajectory" + std::to_string(t);
        const fs::path traj_path = out_dir / (label + ".traj");
        const fs::path states_path = out_dir / (label + ".qksv");
        if (global.cache == "reuse" && fs::exists(traj_path) && fs::exists(states_path)) {
            std::cerr << "reusing " << traj_path << '\n';
            trajectories.push_back(load_trajectory(traj_path.string(), states_path.string()));
            continue;
        }
        Rng rng(opts.trajectory_seeds[t]);
        Eigen::VectorXd theta0(ansatz.parameter_count());
        for (Eigen::Index j = 0; j < theta0.size(); ++j)
            theta0(j) = rng.uniform(0.0, 2.0 * std::numbers::pi);
        Trajectory traj =
            run_vqe_trajectory(label, hamiltonian, ansatz, theta0, counter, opts.vqe_iterations);
        save_trajectory(traj, traj_path.string(), states_path.string());
        trajectories.push_back(std::move(traj));
    }

    const Spectrum spectrum = exact_diagonalize(hamiltonian, opts.n_qubits);

    // Corpus: every recorded state plus the exact ground and 1st excited
    // states as annotated extras.
    std::vector<StateVector> corpus;
    std::vector<std::string> ids, series;
    for (const auto& traj : trajectories)
        for (const auto& it : traj.iterates) {
            corpus.push_back(it.state);
            ids.push_back(traj.label + ":" + std::to_string(it.iteration));
            series.push_back(traj.label);
        }
    corpus.push_back(eigenvector_state(spectrum, 0, opts.n_qubits));
    ids.push_back("ground");
    series.push_back("ground");
    corpus.push_back(eigenvector_state(spectrum, 1, opts.n_qubits));
    ids.push_back("excited");
    series.push_back("excited");

    const Eigen::MatrixXd gram = gram_quantum(corpus, counter, global.threads).entries;
    const Eigen::MatrixXd similarity_d2 = 1.0 - gram.array();

    TrainConfig config;
    config.perplexity = opts.perplexity;
    config.iterations = opts.train_iterations;
    config.adam.learning_rate = opts.learning_rate;
    config.seed = global.seed;
    config.alpha_init_lo = 0.0;
    config.alpha_init_hi = 0.1;

    EmbeddingModel model;
    try {
        model = train_embedding(gram, similarity_d2, {KernelKind::QuantumFidelity, 1.0}, config);
    } catch (const std::runtime_error& e) {
        throw NumericalError(e.what());
    }
    model.training_refs_path = "corpus_states.qksv";
    save_statevectors(corpus, (out_dir / model.training_refs_path).string());
    save_model(model, (out_dir / "model.qkm").string());

    const Eigen::MatrixXd y = transform_points(model, gram);
    write_embedding_csv(out_dir / "vqe_embedding.csv", ids, y, series);

    std::vector<PolylineSeries> polylines;
    Eigen::Index row = 0;
    for (const auto& traj : trajectories) {
        PolylineSeries s{traj.label,
                         y.middleRows(row, static_cast<Eigen::Index>(traj.iterates.size()))};
        polylines.push_back(std::move(s));
        row += static_cast<Eigen::Index>(traj.iterates.size());
    }
    std::vector<ReferencePoint> refs{{"ground", y(row, 0), y(row, 1)},
                                     {"excited", y(row + 1, 0), y(row + 1, 1)}};
    write_text(out_dir / "trajectories.svg", trajectory_svg(polylines, refs));

    // Informational: iteration ranges where trajectory pairs with matching
    // final states stay mutually close (fidelity > 0.90).
    ExecCounter scratch;
    for (std::size_t a = 0; a < trajectories.size(); ++a)
        for (std::size_t b = a + 1; b < trajectories.size(); ++b) {
            const auto& ta = trajectories[a];
            const auto& tb = trajectories[b];
            if (fidelity(ta.iterates.back().state, tb.iterates.back().state, scratch) <= 0.99)
                continue;
            const std::size_t common = std::min(ta.iterates.size(), tb.iterates.size());
            int first_close = -1;
            for (std::size_t i = 0; i < common; ++i)
                if (fidelity(ta.iterates[i].state, tb.iterates[i].state, scratch) > 0.90) {
                    first_close = static_cast<int>(i);
                    break;
                }
            if (first_close >= 0)
                std::cout << ta.label << " and " << tb.label
                          << " share their path (fidelity > 0.90) from iteration " << first_close
                          << '\n';
        }

    json config_json = {{"n_qubits", opts.n_qubits},
                        {"J", opts.coupling_j},
                        {"h", opts.field_h},
                        {"depth", opts.depth},
                        {"vqe_iterations", opts.vqe_iterations},
                        {"perplexity", opts.perplexity},
                        {"train_iterations", opts.train_iterations},
                        {"trajectory_seeds", opts.trajectory_seeds},
                        {"corpus_size", corpus.size()},
                        {"ground_energy", spectrum.eigenvalues(0)}};
    write_metadata(out_dir, "vqe-trace", config_json, global, counter);

    std::cout << "vqe-trace: " << trajectories.size() << " trajectories, corpus "
              << corpus.size() << " states, exact ground energy "
              << g17(spectrum.eigenvalues(0)) << '\n';
    for (const auto& traj : trajectories)
        std::cout << traj.label << ": final energy " << g17(traj.iterates.back().energy)
                  << " after " << traj.iterates.back().iteration << " iterations\n";
    return 0;
}

// ---------------------------------------------------------------------------
// transform

struct TransformOpts {
    std::string model;
    std::string data;   // feature CSV (gaussian, or quantum with --scaler)
    std::string states; // QKSV file of already-prepared states (quantum)
    std::string scaler; // scaler file for encoding raw features
    int layers = 2;
    std::string name = "transformed";
};

int run_transform(const TransformOpts& opts, const GlobalOpts& global) {
    const fs::path out_dir(global.out);
    fs::create_directories(out_dir);

    const EmbeddingModel model = load_model(opts.model);
    const fs::path refs_path = fs::path(opts.model).parent_path() / model.training_refs_path;
    ExecCounter counter;

    Eigen::MatrixXd rows;
    std::vector<std::string> labels;
    if (model.kernel.kind == KernelKind::QuantumFidelity) {
        const std::vector<StateVector> train_states = load_statevectors(refs_path.string());
        if (static_cast<int>(train_states.size()) != model.n_train())
            throw std::runtime_error("training references do not match the model");

        std::vector<StateVector> new_states;
        if (!opts.states.empty()) {
            new_states = load_statevectors(opts.states);
        } else if (!opts.data.empty() && !opts.scaler.empty()) {
            const Dataset ds = load_dataset_csv(opts.data);
            const PcaScaler scaler = load_scaler(opts.scaler);
            const Eigen::MatrixXd angles = transform_to_angles(scaler, ds.features);
            new_states = encode_rows(angles, opts.layers, counter);
            for (int l : ds.labels) labels.push_back(std::to_string(l));
        } else {
            throw std::invalid_argument(
                "quantum-kernel transform needs --states, or --data with --scaler");
        }
        rows.resize(static_cast<Eigen::Index>(new_states.size()), model.n_train());
        for (std::size_t i = 0; i < new_states.size(); ++i)
            rows.row(static_cast<Eigen::Index>(i)) =
                kernel_row(new_states[i], train_states, counter).transpose();
    } else {
        if (opts.data.empty())
            throw std::invalid_argument("gaussian-kernel transform needs --data");
        const Dataset refs = load_dataset_csv(refs_path.string(), LabelPolicy::None);
        const Dataset ds = load_dataset_csv(opts.data);
        rows.resize(ds.features.rows(), model.n_train());
        for (Eigen::Index i = 0; i < ds.features.rows(); ++i)
            rows.row(i) =
                kernel_row(Eigen::VectorXd(ds.features.row(i)), refs.features, model.kernel)
                    .transpose();
        for (int l : ds.labels) labels.push_back(std::to_string(l));
    }

    const Eigen::MatrixXd y = transform_points(model, rows);
    std::vector<std::string> ids;
    for (Eigen::Index i = 0; i < y.rows(); ++i) ids.push_back(std::to_string(i));
    if (labels.empty()) labels.assign(static_cast<std::size_t>(y.rows()), "0");
    write_embedding_csv(out_dir / (opts.name + ".csv"), ids, y, labels);

    write_metadata(out_dir, "transform",
                   {{"model", opts.model}, {"data", opts.data}, {"states", opts.states}},
                   global, counter);
    std::cout << "transformed " << y.rows() << " points -> "
              << (out_dir / (opts.name + ".csv")) << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// plot

struct PlotOpts {
    std::string embedding;
    std::string mode = "scatter"; // scatter | trajectory
    std::string output = "plot.svg";
};

int run_plot(const PlotOpts& opts, const GlobalOpts& global) {
    const fs::path out_dir(global.out);
    fs::create_directories(out_dir);

    const EmbeddingCsv embedding = read_embedding_csv(opts.embedding);
    std::string svg;
    if (opts.mode == "scatter") {
        svg = scatter_svg(embedding.y, labels_as_int(embedding.labels));
    } else if (opts.mode == "trajectory") {
        // Series named ground/excited become reference markers; the rest are
        // polylines in row order.
        std::vector<PolylineSeries> polylines;
        std::vector<ReferencePoint> refs;
        std::vector<std::string> seen;
        for (std::size_t i = 0; i < embedding.labels.size(); ++i) {
            const std::string& series = embedding.labels[i];
            if (series == "ground" || series == "excited") {
                refs.push_back({series, embedding.y(static_cast<Eigen::Index>(i), 0),
                                embedding.y(static_cast<Eigen::Index>(i), 1)});
                continue;
            }
            auto it = std::find(seen.begin(), seen.end(), series);
            std::size_t slot;
            if (it == seen.end()) {
                seen.push_back(series);
                polylines.push_back({series, Eigen::MatrixXd(0, 2)});
                slot = polylines.size() - 1;
            } else {
                slot = static_cast<std::size_t>(it - seen.begin());
            }
            Eigen::MatrixXd& pts = polylines[slot].points;
            pts.conservativeResize(pts.rows() + 1, 2);
            pts.row(pts.rows() - 1) = embedding.y.row(static_cast<Eigen::Index>(i));
        }
        svg = trajectory_svg(polylines, refs);
    } else {
        throw std::invalid_argument("unknown plot mode: " + opts.mode);
    }
    write_text(out_dir / opts.output, svg);
    std::cout << "wrote " << (out_dir / opts.output) << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"quantum-kernel t-SNE toolkit"};
    app.require_subcommand(1);

    GlobalOpts global;
    app.add_option("--seed", global.seed, "global random seed")->capture_default_str();
    app.add_option("--out", global.out, "output directory")->capture_default_str();
    app.add_option("--threads", global.threads, "worker cap for parallel sections")
        ->capture_default_str();
    app.add_option("--cache", global.cache, "reuse or recompute cached artifacts")
        ->check(CLI::IsMember({"reuse", "recompute"}))
        ->capture_default_str();

    DigitsOpts digits;
    auto* cmd_digits = app.add_subcommand("digits", "embed the hand-written digits data set");
    cmd_digits->add_option("--data", digits.data, "dataset CSV")->capture_default_str();
    cmd_digits->add_option("--kernel", digits.kernel, "quantum or gaussian")
        ->check(CLI::IsMember({"quantum", "gaussian"}))
        ->capture_default_str();
    cmd_digits->add_option("--perplexity", digits.perplexity)->capture_default_str();
    cmd_digits->add_option("--iters", digits.iterations, "Adam iterations")
        ->capture_default_str();
    cmd_digits->add_option("--lr", digits.learning_rate, "Adam learning rate")
        ->capture_default_str();
    cmd_digits->add_option("--pca-dim", digits.pca_dim)->capture_default_str();
    cmd_digits->add_option("--layers", digits.layers, "upload layers in the feature map")
        ->capture_default_str();
    cmd_digits->add_option("--limit", digits.limit, "use only the first N rows (0 = all)")
        ->capture_default_str();
    cmd_digits->add_option("--train-frac", digits.train_fraction)->capture_default_str();
    cmd_digits->add_flag("--exaggeration", digits.exaggeration,
                         "scale P by 4 for the first 100 iterations");
    cmd_digits->add_option("--bandwidth", digits.bandwidth, "gaussian kernel sigma'")
        ->capture_default_str();

    KnnOpts knn;
    auto* cmd_knn = app.add_subcommand("knn", "k-NN cross-validation of an embedding");
    cmd_knn->add_option("--embedding", knn.embedding, "embedding CSV")->required();
    cmd_knn->add_option("--k", knn.ks, "k values")->capture_default_str();
    cmd_knn->add_option("--model-name", knn.model_name, "name for the report column");

    VqeOpts vqe;
    auto* cmd_vqe = app.add_subcommand("vqe-trace", "visualize VQE optimization trajectories");
    cmd_vqe->add_option("--n", vqe.n_qubits)->capture_default_str();
    cmd_vqe->add_option("--J", vqe.coupling_j)->capture_default_str();
    cmd_vqe->add_option("--h-field", vqe.field_h)->capture_default_str();
    cmd_vqe->add_option("--depth", vqe.depth)->capture_default_str();
    cmd_vqe->add_option("--vqe-iters", vqe.vqe_iterations)->capture_default_str();
    cmd_vqe->add_option("--perplexity", vqe.perplexity)->capture_default_str();
    cmd_vqe->add_option("--iters", vqe.train_iterations, "Adam iterations")
        ->capture_default_str();
    cmd_vqe->add_option("--lr", vqe.learning_rate)->capture_default_str();
    cmd_vqe->add_option("--traj-seeds", vqe.trajectory_seeds, "per-trajectory init seeds")
        ->capture_default_str();

    TransformOpts transform;
    auto* cmd_transform = app.add_subcommand("transform", "map unseen data with a trained model");
    cmd_transform->add_option("--model", transform.model, "model file")->required();
    cmd_transform->add_option("--data", transform.data, "feature CSV");
    cmd_transform->add_option("--states", transform.states, "QKSV statevector file");
    cmd_transform->add_option("--scaler", transform.scaler, "scaler file for raw features");
    cmd_transform->add_option("--layers", transform.layers)->capture_default_str();
    cmd_transform->add_option("--name", transform.name, "output file stem")
        ->capture_default_str();

    PlotOpts plot;
    auto* cmd_plot = app.add_subcommand("plot", "render an embedding CSV as SVG");
    cmd_plot->add_option("--embedding", plot.embedding, "embedding CSV")->required();
    cmd_plot->add_option("--mode", plot.mode, "scatter or trajectory")
        ->check(CLI::IsMember({"scatter", "trajectory"}))
        ->capture_default_str();
    cmd_plot->add_option("--output", plot.output, "SVG filename inside --out")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (cmd_digits->parsed()) return run_digits(digits, global);
        if (cmd_knn->parsed()) return run_knn(knn, global);
        if (cmd_vqe->parsed()) return run_vqe_trace(vqe, global);
        if (cmd_transform->parsed()) return run_transform(transform, global);
        if (cmd_plot->parsed()) return run_plot(plot, global);
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const CsvError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
