// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The bloomprobe Authors

#include "bloomprobe/probe.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "bloomprobe/error.hpp"

namespace bloomprobe {

namespace {

constexpr double kMinScale = 1e-12;
constexpr double kArmijo = 1e-4;
constexpr double kMinStep = 1e-20;

void check_labels(std::span<const int> labels, Eigen::Index rows, Eigen::Index k) {
    if (static_cast<Eigen::Index>(labels.size()) != rows) {
        throw InvalidArgument("got " + std::to_string(labels.size()) + " labels for " + std::to_string(rows) +
                              " rows");
    }
    for (int y : labels) {
        if (y < 0 || y >= k) {
            throw InvalidArgument("label " + std::to_string(y) + " outside [0, " + std::to_string(k) + ")");
        }
    }
}

// Mean cross-entropy of row-wise softmax(logits); fills `probs` when given.
double cross_entropy(const Matrix& logits, std::span<const int> labels, Matrix* probs) {
    const auto n = logits.rows();
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double m = logits.row(i).maxCoeff();
        double z = 0.0;
        for (Eigen::Index k = 0; k < logits.cols(); ++k) z += std::exp(logits(i, k) - m);
        const double log_z = m + std::log(z);
        total += log_z - logits(i, labels[i]);
        if (probs) {
            for (Eigen::Index k = 0; k < logits.cols(); ++k) (*probs)(i, k) = std::exp(logits(i, k) - log_z);
        }
    }
    return total / static_cast<double>(n);
}

// Gradient of the objective given the softmax probabilities at the current point.
void gradient_from_probs(Matrix probs, const Eigen::Ref<const Matrix>& x, std::span<const int> labels,
                         const Matrix& weights, double lambda, Matrix& grad_w, Vector& grad_b) {
    const double n = static_cast<double>(x.rows());
    for (Eigen::Index i = 0; i < probs.rows(); ++i) probs(i, labels[i]) -= 1.0;
    grad_w.noalias() = probs.transpose() * x;
    grad_w /= n;
    grad_w += (lambda / n) * weights;
    grad_b = probs.colwise().sum().transpose() / n;
}

Matrix logits_of(const ProbeParams& params, const Eigen::Ref<const Matrix>& x) {
    Matrix logits = x * params.weights.transpose();
    logits.rowwise() += params.bias.transpose();
    return logits;
}

void check_dim(const LinearProbe& probe, const Eigen::Ref<const Matrix>& x) {
    if (static_cast<std::size_t>(x.cols()) != probe.dim()) {
        throw InvalidArgument("input has " + std::to_string(x.cols()) + " columns, probe expects " +
                              std::to_string(probe.dim()));
    }
}

}  // namespace

Matrix Standardizer::apply(const Eigen::Ref<const Matrix>& x) const {
    if (static_cast<std::size_t>(x.cols()) != dim()) {
        throw InvalidArgument("standardizer fitted on " + std::to_string(dim()) + " features, got " +
                              std::to_string(x.cols()));
    }
    return (x.rowwise() - means.transpose()).array().rowwise() / scales.transpose().array();
}

Standardizer fit_standardizer(const Eigen::Ref<const Matrix>& x) {
    if (x.rows() == 0) throw InvalidArgument("cannot fit a standardizer on an empty matrix");
    Standardizer s;
    const double n = static_cast<double>(x.rows());
    s.means = x.colwise().sum().transpose() / n;
    s.scales.resize(x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double var = (x.col(j).array() - s.means(j)).square().sum() / n;
        const double sd = std::sqrt(var);
        s.scales(j) = sd < kMinScale ? 1.0 : sd;
    }
    return s;
}

LossGrad loss_and_grad(const ProbeParams& params, const Eigen::Ref<const Matrix>& x, std::span<const int> labels,
                       double lambda) {
    if (params.bias.size() != params.weights.rows()) throw InvalidArgument("bias length does not match class count");
    if (x.cols() != params.weights.cols()) {
        throw InvalidArgument("input has " + std::to_string(x.cols()) + " columns, weights have " +
                              std::to_string(params.weights.cols()));
    }
    if (x.rows() == 0) throw InvalidArgument("loss_and_grad needs at least one row");
    check_labels(labels, x.rows(), params.weights.rows());

    const double n = static_cast<double>(x.rows());
    Matrix probs(x.rows(), params.weights.rows());
    LossGrad out;
    out.loss = cross_entropy(logits_of(params, x), labels, &probs) +
               lambda / (2.0 * n) * params.weights.squaredNorm();
    gradient_from_probs(std::move(probs), x, labels, params.weights, lambda, out.grad_weights, out.grad_bias);
    return out;
}

void TrainConfig::validate() const {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidArgument("lambda must be a positive finite number");
    if (max_iters < 1) throw InvalidArgument("max_iters must be at least 1");
    if (!(grad_tol > 0.0)) throw InvalidArgument("grad_tol must be positive");
    if (num_classes < 0) throw InvalidArgument("num_classes must be non-negative");
}

LinearProbe train_probe(const Eigen::Ref<const Matrix>& x_raw, std::span<const int> labels,
                        const TrainConfig& config) {
    config.validate();
    if (x_raw.rows() == 0 || x_raw.cols() == 0) throw InvalidArgument("training matrix is empty");
    if (static_cast<Eigen::Index>(labels.size()) != x_raw.rows()) {
        throw InvalidArgument("got " + std::to_string(labels.size()) + " labels for " + std::to_string(x_raw.rows()) +
                              " rows");
    }
    const std::set<int> distinct(labels.begin(), labels.end());
    if (distinct.size() < 2) throw InvalidArgument("training set contains a single class");
    const int k = config.num_classes > 0 ? config.num_classes : *distinct.rbegin() + 1;
    check_labels(labels, x_raw.rows(), k);
    if (x_raw.rows() < k) {
        throw InvalidArgument("need at least as many training rows as classes (" + std::to_string(k) + ")");
    }

    if (!x_raw.allFinite()) throw InvalidArgument("training matrix contains NaN or Inf");

    LinearProbe probe;
    probe.lambda = config.lambda;
    probe.standardizer = fit_standardizer(x_raw);
    const Matrix x = probe.standardizer.apply(x_raw);
    const auto n_rows = x.rows();
    const double n = static_cast<double>(n_rows);
    const double lambda = config.lambda;

    auto& w = probe.params.weights;
    auto& b = probe.params.bias;
    w = Matrix::Zero(k, x.cols());
    b = Vector::Zero(k);

    // Logits are affine in the step size, so each line search trial only
    // touches the n x K logit matrix instead of redoing X * W^T.
    Matrix logits = Matrix::Zero(n_rows, k);
    Matrix probs(n_rows, k);
    double loss = cross_entropy(logits, labels, &probs);
    Matrix grad_w;
    Vector grad_b;
    gradient_from_probs(probs, x, labels, w, lambda, grad_w, grad_b);

    auto& meta = probe.train_meta;
    meta.loss_history.push_back(loss);
    double step = 1.0;
    int iter = 0;
    double grad_norm = std::sqrt(grad_w.squaredNorm() + grad_b.squaredNorm());
    if (!std::isfinite(grad_norm)) throw NumericalError("non-finite gradient at iteration 0");
    Matrix dlogits(n_rows, k);
    Matrix trial(n_rows, k);

    while (grad_norm > config.grad_tol && iter < config.max_iters) {
        dlogits.noalias() = x * grad_w.transpose();
        dlogits.rowwise() += grad_b.transpose();

        const double w_sq = w.squaredNorm();
        const double w_dot_g = (w.array() * grad_w.array()).sum();
        const double g_sq = grad_w.squaredNorm();
        const double decrease = grad_norm * grad_norm;

        double t = step;
        double trial_loss = 0.0;
        bool accepted = false;
        while (t >= kMinStep) {
            trial = logits - t * dlogits;
            const double penalty = lambda / (2.0 * n) * (w_sq - 2.0 * t * w_dot_g + t * t * g_sq);
            trial_loss = cross_entropy(trial, labels, nullptr) + penalty;
            if (!std::isfinite(trial_loss)) {
                throw NumericalError("non-finite training loss at iteration " + std::to_string(iter + 1));
            }
            if (trial_loss <= loss - kArmijo * t * decrease) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        // Step underflow: no representable descent left, stop where we are.
        if (!accepted) break;

        w -= t * grad_w;
        b -= t * grad_b;
        logits.swap(trial);
        ++iter;

        loss = cross_entropy(logits, labels, &probs) + lambda / (2.0 * n) * w.squaredNorm();
        if (!std::isfinite(loss)) throw NumericalError("non-finite training loss at iteration " + std::to_string(iter));
        gradient_from_probs(probs, x, labels, w, lambda, grad_w, grad_b);
        grad_norm = std::sqrt(grad_w.squaredNorm() + grad_b.squaredNorm());
        if (!std::isfinite(grad_norm)) throw NumericalError("non-finite gradient at iteration " + std::to_string(iter));
        meta.loss_history.push_back(loss);
        step = std::min(2.0 * t, 1e6);
    }

    meta.iterations = iter;
    meta.final_loss = loss;
    meta.final_grad_norm = grad_norm;
    meta.converged = grad_norm <= config.grad_tol;
    return probe;
}

Matrix predict_proba(const LinearProbe& probe, const Eigen::Ref<const Matrix>& x) {
    check_dim(probe, x);
    Matrix logits = logits_of(probe.params, probe.standardizer.apply(x));
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        const double m = logits.row(i).maxCoeff();
        logits.row(i) = (logits.row(i).array() - m).exp();
        logits.row(i) /= logits.row(i).sum();
    }
    return logits;
}

std::vector<int> predict(const LinearProbe& probe, const Eigen::Ref<const Matrix>& x) {
    // Argmax over the probabilities so predict and predict_proba never disagree.
    const Matrix probs = predict_proba(probe, x);
    std::vector<int> out(static_cast<std::size_t>(probs.rows()));
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
        Eigen::Index best = 0;
        for (Eigen::Index k = 1; k < probs.cols(); ++k) {
            if (probs(i, k) > probs(i, best)) best = k;
        }
        out[static_cast<std::size_t>(i)] = static_cast<int>(best);
    }
    return out;
}

}  // namespace bloomprobe
