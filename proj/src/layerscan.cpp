// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The bloomprobe Authors

#include "bloomprobe/layerscan.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "bloomprobe/error.hpp"

namespace bloomprobe {

namespace {

std::string format_double(double v) {
    std::ostringstream out;
    out.precision(17);
    out << v;
    return out.str();
}

std::vector<int> pick(std::span<const int> labels, std::span<const std::size_t> rows) {
    std::vector<int> out;
    out.reserve(rows.size());
    for (auto r : rows) out.push_back(labels[r]);
    return out;
}

}  // namespace

std::optional<std::size_t> detect_cso(std::span<const double> accuracies, double tau) {
    if (accuracies.empty()) throw InvalidArgument("detect_cso needs at least one accuracy");
    if (!(tau > 0.0 && tau <= 1.0)) throw InvalidArgument("tau must lie in (0, 1]");
    for (std::size_t l = 0; l < accuracies.size(); ++l) {
        if (accuracies[l] >= tau) return l;
    }
    return std::nullopt;
}

void check_alignment(std::span<const std::string> expected, std::span<const std::string> actual,
                     const std::string& what) {
    if (expected.size() != actual.size()) {
        throw AlignmentError(what + ": " + std::to_string(actual.size()) + " samples for " +
                             std::to_string(expected.size()) + " corpus questions");
    }
    for (std::size_t i = 0; i < expected.size(); ++i) {
        if (expected[i] != actual[i]) {
            throw AlignmentError(what + ": id mismatch at position " + std::to_string(i) + ": corpus has '" +
                                 expected[i] + "', found '" + actual[i] + "'");
        }
    }
}

Matrix gather_rows(const Eigen::Ref<const Matrix>& m, std::span<const std::size_t> rows) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
    return out;
}

Matrix gather_rows(const LayerMatrix& m, std::span<const std::size_t> rows) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), m.values.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = m.values.row(static_cast<Eigen::Index>(rows[i])).cast<double>();
    }
    return out;
}

std::vector<double> ScanReport::accuracies() const {
    std::vector<double> out;
    out.reserve(layer_results.size());
    for (const auto& r : layer_results) out.push_back(r.eval.accuracy);
    return out;
}

std::optional<double> ScanReport::mean_accuracy_past_cso() const {
    if (!cso_layer) return std::nullopt;
    const auto acc = accuracies();
    const auto first = acc.begin() + static_cast<std::ptrdiff_t>(*cso_layer);
    return std::accumulate(first, acc.end(), 0.0) / static_cast<double>(acc.end() - first);
}

double ScanReport::mean_accuracy_all_layers() const {
    const auto acc = accuracies();
    if (acc.empty()) return 0.0;
    return std::accumulate(acc.begin(), acc.end(), 0.0) / static_cast<double>(acc.size());
}

std::optional<double> ScanReport::accuracy_at_cso() const {
    if (!cso_layer) return std::nullopt;
    return layer_results.at(*cso_layer).eval.accuracy;
}

std::size_t ScanReport::best_layer() const {
    std::size_t best = 0;
    for (std::size_t l = 1; l < layer_results.size(); ++l) {
        if (layer_results[l].eval.accuracy > layer_results[best].eval.accuracy) best = l;
    }
    return best;
}

std::string ScanReport::trajectory_csv() const {
    std::ostringstream out;
    const int k = layer_results.empty() ? kNumBloomLevels : layer_results.front().eval.num_classes;
    out << "layer,accuracy";
    for (int c = 0; c < k; ++c) out << ",recall_" << c;
    out << '\n';
    for (const auto& r : layer_results) {
        out << r.layer << ',' << format_double(r.eval.accuracy);
        for (double rec : r.eval.per_class_recall) out << ',' << format_double(rec);
        out << '\n';
    }
    return out.str();
}

std::string ScanReport::radar_csv() const {
    std::ostringstream out;
    out << "level,recall\n";
    for (std::size_t k = 0; k < per_level_accuracy.size(); ++k) {
        out << k << ',' << format_double(per_level_accuracy[k]) << '\n';
    }
    return out.str();
}

ScanReport scan_layers(const ActivationTensor& tensor, const Corpus& corpus, const SplitIndices& split,
                       const TrainConfig& config, double tau, const ScanOptions& options) {
    if (!(tau > 0.0 && tau <= 1.0)) throw InvalidArgument("tau must lie in (0, 1]");
    config.validate();
    const auto corpus_ids = corpus.ids();
    check_alignment(corpus_ids, tensor.sample_ids(), "tensor '" + tensor.model_id() + "'");
    for (const auto* part : {&split.train, &split.test}) {
        for (auto i : *part) {
            if (i >= tensor.n_samples()) {
                throw InvalidArgument("split index " + std::to_string(i) + " out of range for " +
                                      std::to_string(tensor.n_samples()) + " samples");
            }
        }
    }
    if (split.train.empty() || split.test.empty()) throw InvalidArgument("split has an empty train or test part");

    const auto labels = corpus.labels();
    const auto y_train = pick(labels, split.train);
    const auto y_test = pick(labels, split.test);
    TrainConfig layer_config = config;
    if (layer_config.num_classes == 0) layer_config.num_classes = kNumBloomLevels;
    const int k = layer_config.num_classes;

    const auto n_layers = tensor.n_layers();
    std::vector<LayerResult> results(n_layers);
    std::vector<LinearProbe> probes(options.on_probe ? n_layers : 0);

    auto run_layer = [&](std::size_t layer) {
        const auto slice = layer_slice(tensor, layer);
        const Matrix x_train = gather_rows(slice, split.train);
        const Matrix x_test = gather_rows(slice, split.test);
        auto probe = train_probe(x_train, y_train, layer_config);
        const auto train_pred = predict(probe, x_train);
        const auto test_pred = predict(probe, x_test);

        auto& r = results[layer];
        r.layer = layer;
        r.eval = evaluate(y_test, test_pred, k);
        r.train_accuracy = evaluate(y_train, train_pred, k).accuracy;
        r.train_meta = probe.train_meta;
        r.train_meta.loss_history.clear();
        if (options.on_probe) probes[layer] = std::move(probe);
    };

    unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n_layers));
    if (threads <= 1) {
        for (std::size_t l = 0; l < n_layers; ++l) run_layer(l);
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (std::size_t l = next++; l < n_layers; l = next++) {
                    try {
                        run_layer(l);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                    }
                }
            });
        }
        for (auto& th : pool) th.join();
        if (failure) std::rethrow_exception(failure);
    }

    ScanReport report;
    report.model_id = tensor.model_id();
    report.tau = tau;
    report.layer_results = std::move(results);
    const auto acc = report.accuracies();
    report.cso_layer = detect_cso(acc, tau);
    if (report.cso_layer) {
        report.per_level_layer = *report.cso_layer;
        report.per_level_source = "cso";
        report.dips_below_tau_after_cso =
            std::any_of(acc.begin() + static_cast<std::ptrdiff_t>(*report.cso_layer), acc.end(),
                        [tau](double a) { return a < tau; });
    } else {
        report.per_level_layer = report.best_layer();
        report.per_level_source = "best_layer";
    }
    report.per_level_accuracy = report.layer_results[report.per_level_layer].eval.per_class_recall;

    if (options.on_probe) {
        for (std::size_t l = 0; l < n_layers; ++l) options.on_probe(l, probes[l]);
    }
    return report;
}

}  // namespace bloomprobe
