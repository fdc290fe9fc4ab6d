// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The bloomprobe Authors

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace bloomprobe {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Per-feature centering and scaling fitted on training rows.
struct Standardizer {
    Vector means;
    Vector scales;  ///< population std, 1 where the std is below 1e-12

    std::size_t dim() const noexcept { return static_cast<std::size_t>(means.size()); }
    Matrix apply(const Eigen::Ref<const Matrix>& x) const;
};

/// Throws InvalidArgument for a matrix with no rows.
Standardizer fit_standardizer(const Eigen::Ref<const Matrix>& x);

/// Softmax classifier parameters: logits = W x + b, W is K x d.
struct ProbeParams {
    Matrix weights;
    Vector bias;

    std::size_t num_classes() const noexcept { return static_cast<std::size_t>(weights.rows()); }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(weights.cols()); }
};

struct LossGrad {
    double loss = 0.0;
    Matrix grad_weights;
    Vector grad_bias;
};

/// Mean softmax cross-entropy plus lambda / (2n) * ||W||_F^2 (bias is not
/// penalized), with its exact gradient.
LossGrad loss_and_grad(const ProbeParams& params, const Eigen::Ref<const Matrix>& x, std::span<const int> labels,
                       double lambda);

struct TrainConfig {
    double lambda = 1.0;
    int max_iters = 1000;
    double grad_tol = 1e-6;
    std::uint64_t seed = 0;  ///< reserved, zero initialization does not consume it
    int num_classes = 0;     ///< 0 infers max(label) + 1

    /// Throws InvalidArgument if any field is out of range.
    void validate() const;
};

struct TrainMeta {
    int iterations = 0;
    double final_grad_norm = 0.0;
    double final_loss = 0.0;
    bool converged = false;
    std::vector<double> loss_history;  ///< objective after each accepted step, starting at the initial point
};

struct LinearProbe {
    ProbeParams params;
    Standardizer standardizer;
    double lambda = 1.0;
    TrainMeta train_meta;

    std::size_t num_classes() const noexcept { return params.num_classes(); }
    std::size_t dim() const noexcept { return params.dim(); }
};

/// Fits the standardizer on `x`, then runs full-batch gradient descent with
/// Armijo backtracking from W = 0, b = 0 until ||grad|| <= grad_tol or
/// max_iters. Deterministic for fixed inputs.
///
/// Throws InvalidArgument for shape problems or a single-class training set,
/// NumericalError if the objective becomes non-finite.
LinearProbe train_probe(const Eigen::Ref<const Matrix>& x, std::span<const int> labels,
                        const TrainConfig& config = {});

/// Row-wise softmax of the standardized logits; max-subtracted so large
/// logits do not overflow.
Matrix predict_proba(const LinearProbe& probe, const Eigen::Ref<const Matrix>& x);

/// Row-wise argmax of the logits; ties go to the lowest class index.
std::vector<int> predict(const LinearProbe& probe, const Eigen::Ref<const Matrix>& x);

}  // namespace bloomprobe
