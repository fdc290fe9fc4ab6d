// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The bloomprobe Authors

#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bloomprobe/activation_store.hpp"
#include "bloomprobe/corpus.hpp"
#include "bloomprobe/evaluation.hpp"
#include "bloomprobe/probe.hpp"

namespace bloomprobe {

inline constexpr double kDefaultTau = 0.90;

struct LayerResult {
    std::size_t layer = 0;
    EvalReport eval;  ///< held-out test split
    double train_accuracy = 0.0;
    TrainMeta train_meta;
    std::optional<std::string> probe_path;
};

struct ScanReport {
    std::string model_id;
    double tau = kDefaultTau;
    std::vector<LayerResult> layer_results;  ///< one per layer, ascending
    std::optional<std::size_t> cso_layer;
    /// Per-class recall at the CSO layer, or at the best layer when there is no CSO.
    std::vector<double> per_level_accuracy;
    std::size_t per_level_layer = 0;
    std::string per_level_source;  ///< "cso" or "best_layer"
    /// Some layer after the CSO falls back below tau.
    bool dips_below_tau_after_cso = false;

    std::vector<double> accuracies() const;
    /// Mean test accuracy over layers >= cso_layer.
    std::optional<double> mean_accuracy_past_cso() const;
    double mean_accuracy_all_layers() const;
    std::optional<double> accuracy_at_cso() const;
    std::size_t best_layer() const;  ///< lowest index among the most accurate layers

    /// `layer,accuracy,recall_0..recall_{K-1}`.
    std::string trajectory_csv() const;
    /// `level,recall` at per_level_layer.
    std::string radar_csv() const;
};

/// Index of the first accuracy >= tau, or nullopt. Throws InvalidArgument
/// for an empty list or tau outside (0, 1].
std::optional<std::size_t> detect_cso(std::span<const double> accuracies, double tau);

struct ScanOptions {
    unsigned threads = 0;  ///< 0 uses the hardware concurrency
    /// Called once per layer, in layer order, after all layers finished.
    std::function<void(std::size_t layer, const LinearProbe&)> on_probe;
};

/// Trains and evaluates one probe per layer on the same split. Throws
/// AlignmentError naming the first position where tensor and corpus ids
/// disagree, and InvalidArgument for split indices out of range.
ScanReport scan_layers(const ActivationTensor& tensor, const Corpus& corpus, const SplitIndices& split,
                       const TrainConfig& config, double tau = kDefaultTau, const ScanOptions& options = {});

/// Rows of `m` selected by `rows`, widened to double.
Matrix gather_rows(const Eigen::Ref<const Matrix>& m, std::span<const std::size_t> rows);
Matrix gather_rows(const LayerMatrix& m, std::span<const std::size_t> rows);

/// Throws AlignmentError unless the ids match position by position.
void check_alignment(std::span<const std::string> expected, std::span<const std::string> actual,
                     const std::string& what);

}  // namespace bloomprobe
