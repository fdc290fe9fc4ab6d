// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The bloomprobe Authors

#include "bloomprobe/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "bloomprobe/error.hpp"
#include "bloomprobe/rng.hpp"

namespace bloomprobe {

SplitIndices stratified_split(std::span<const int> labels, double ratio, std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw InvalidArgument("split ratio must lie in (0, 1)");

    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
    if (by_class.empty()) throw ValidationError("cannot split an empty label list");

    SplitIndices split;
    split.seed = seed;
    split.ratio = ratio;
    Shuffler shuffler(seed);
    for (auto& [label, indices] : by_class) {
        const auto count = indices.size();
        if (count < 2) {
            throw ValidationError("class " + std::to_string(label) + " has " + std::to_string(count) +
                                  " sample(s); stratified split needs at least 2");
        }
        auto n_test = static_cast<std::size_t>(std::llround((1.0 - ratio) * static_cast<double>(count)));
        n_test = std::clamp<std::size_t>(n_test, 1, count - 1);
        shuffler.shuffle(std::span<std::size_t>(indices));
        split.test.insert(split.test.end(), indices.begin(), indices.begin() + static_cast<std::ptrdiff_t>(n_test));
        split.train.insert(split.train.end(), indices.begin() + static_cast<std::ptrdiff_t>(n_test), indices.end());
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

ConfusionMatrix::ConfusionMatrix(int num_classes)
    : k_(num_classes), counts_(static_cast<std::size_t>(num_classes * num_classes), 0) {
    if (num_classes <= 0) throw InvalidArgument("confusion matrix needs at least one class");
}

std::int64_t ConfusionMatrix::row_sum(int truth) const {
    std::int64_t s = 0;
    for (int j = 0; j < k_; ++j) s += at(truth, j);
    return s;
}

std::int64_t ConfusionMatrix::col_sum(int predicted) const {
    std::int64_t s = 0;
    for (int i = 0; i < k_; ++i) s += at(i, predicted);
    return s;
}

std::int64_t ConfusionMatrix::trace() const {
    std::int64_t s = 0;
    for (int i = 0; i < k_; ++i) s += at(i, i);
    return s;
}

std::int64_t ConfusionMatrix::total() const {
    std::int64_t s = 0;
    for (auto c : counts_) s += c;
    return s;
}

std::string ConfusionMatrix::to_csv() const {
    std::ostringstream out;
    out << "true\\pred";
    for (int j = 0; j < k_; ++j) out << ',' << j;
    out << '\n';
    for (int i = 0; i < k_; ++i) {
        out << i;
        for (int j = 0; j < k_; ++j) out << ',' << at(i, j);
        out << '\n';
    }
    return out.str();
}

EvalReport evaluate(std::span<const int> y_true, std::span<const int> y_pred, int num_classes) {
    if (y_true.size() != y_pred.size()) {
        throw InvalidArgument("y_true has " + std::to_string(y_true.size()) + " labels, y_pred has " +
                              std::to_string(y_pred.size()));
    }
    if (num_classes <= 0) throw InvalidArgument("num_classes must be positive");

    EvalReport r;
    r.num_classes = num_classes;
    r.n_samples = y_true.size();
    r.confusion = ConfusionMatrix(num_classes);

    std::int64_t dist_sum = 0;
    std::int64_t n_errors = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const int t = y_true[i];
        const int p = y_pred[i];
        if (t < 0 || t >= num_classes || p < 0 || p >= num_classes) {
            throw InvalidArgument("label outside [0, " + std::to_string(num_classes) + ") at position " +
                                  std::to_string(i));
        }
        ++r.confusion.at(t, p);
        const int d = std::abs(p - t);
        ++r.err_dist_histogram[d];
        if (d > 0) {
            dist_sum += d;
            ++n_errors;
        }
    }

    const auto total = r.confusion.total();
    r.accuracy = total > 0 ? static_cast<double>(r.confusion.trace()) / static_cast<double>(total) : 0.0;
    r.err_dist_mean_over_errors = n_errors > 0 ? static_cast<double>(dist_sum) / static_cast<double>(n_errors) : 0.0;
    r.err_dist_mean_over_all = total > 0 ? static_cast<double>(dist_sum) / static_cast<double>(total) : 0.0;

    r.per_class_precision.assign(static_cast<std::size_t>(num_classes), 0.0);
    r.per_class_recall.assign(static_cast<std::size_t>(num_classes), 0.0);
    for (int k = 0; k < num_classes; ++k) {
        const auto predicted = r.confusion.col_sum(k);
        const auto support = r.confusion.row_sum(k);
        const auto hits = static_cast<double>(r.confusion.at(k, k));
        if (predicted > 0) {
            r.per_class_precision[static_cast<std::size_t>(k)] = hits / static_cast<double>(predicted);
        } else {
            r.zero_prediction_classes.push_back(k);
        }
        if (support > 0) {
            r.per_class_recall[static_cast<std::size_t>(k)] = hits / static_cast<double>(support);
        } else {
            r.zero_support_classes.push_back(k);
        }
    }
    for (int k = 0; k < num_classes; ++k) {
        r.macro_precision += r.per_class_precision[static_cast<std::size_t>(k)];
        r.macro_recall += r.per_class_recall[static_cast<std::size_t>(k)];
    }
    r.macro_precision /= num_classes;
    r.macro_recall /= num_classes;
    return r;
}

}  // namespace bloomprobe
