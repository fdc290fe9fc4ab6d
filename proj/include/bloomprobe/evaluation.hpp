// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The bloomprobe Authors

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace bloomprobe {

struct SplitIndices {
    std::vector<std::size_t> train;  ///< ascending
    std::vector<std::size_t> test;   ///< ascending
    std::uint64_t seed = 0;
    double ratio = 0.8;  ///< train fraction
};

/// Per class: test count = round((1 - ratio) * count), clamped to
/// [1, count - 1]. Classes are visited in ascending label order and each
/// class's indices are shuffled by one seeded Shuffler; the first test-count
/// indices go to test. Throws InvalidArgument for a ratio outside (0, 1) and
/// ValidationError when a class has fewer than 2 samples.
SplitIndices stratified_split(std::span<const int> labels, double ratio, std::uint64_t seed);

/// Rows are true classes, columns predicted classes.
class ConfusionMatrix {
public:
    ConfusionMatrix() = default;
    explicit ConfusionMatrix(int num_classes);

    int num_classes() const noexcept { return k_; }
    std::int64_t& at(int truth, int predicted) { return counts_[static_cast<std::size_t>(truth * k_ + predicted)]; }
    std::int64_t at(int truth, int predicted) const {
        return counts_[static_cast<std::size_t>(truth * k_ + predicted)];
    }
    std::int64_t row_sum(int truth) const;
    std::int64_t col_sum(int predicted) const;
    std::int64_t trace() const;
    std::int64_t total() const;

    /// Header `,0,1,...,K-1` (predicted labels), then one row per true label.
    std::string to_csv() const;

    bool operator==(const ConfusionMatrix&) const = default;

private:
    int k_ = 0;
    std::vector<std::int64_t> counts_;
};

struct EvalReport {
    int num_classes = 0;
    std::size_t n_samples = 0;
    double accuracy = 0.0;
    std::vector<double> per_class_precision;
    std::vector<double> per_class_recall;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    ConfusionMatrix confusion;
    /// Mean |y_hat - y| over misclassified samples only (0 when there are none).
    double err_dist_mean_over_errors = 0.0;
    /// Mean |y_hat - y| over every sample.
    double err_dist_mean_over_all = 0.0;
    std::map<int, std::int64_t> err_dist_histogram;
    /// Classes that were never predicted; their precision is reported as 0.
    std::vector<int> zero_prediction_classes;
    /// Classes absent from y_true; their recall is reported as 0.
    std::vector<int> zero_support_classes;
};

/// Throws InvalidArgument on length mismatch or labels outside [0, K).
EvalReport evaluate(std::span<const int> y_true, std::span<const int> y_pred, int num_classes);

}  // namespace bloomprobe
