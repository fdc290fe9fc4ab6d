// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The bloomprobe Authors

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace bloomprobe {

using RowMatrixF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Read-only (n_samples x d_model) block of one layer, borrowed from a tensor.
struct LayerMatrix {
    std::size_t layer_index = 0;
    Eigen::Map<const RowMatrixF> values{nullptr, 0, 0};

    std::size_t rows() const noexcept { return static_cast<std::size_t>(values.rows()); }
    std::size_t cols() const noexcept { return static_cast<std::size_t>(values.cols()); }
    Eigen::MatrixXd to_double() const { return values.cast<double>(); }
};

struct NonFiniteValue {
    std::size_t layer = 0;
    std::size_t sample = 0;
    std::size_t dim = 0;
};

/// Hidden states of one model run: layer-major, then sample, then dimension.
///
/// Layer 0 is the embedding output and layers 1..L the residual stream after
/// each block, so n_layers = L + 1. Shape and ids are validated on
/// construction; finiteness is checked where data crosses the file boundary.
class ActivationTensor {
public:
    ActivationTensor(std::string model_id, std::size_t n_layers, std::size_t n_samples, std::size_t d_model,
                     std::vector<std::string> sample_ids, std::vector<float> data);

    const std::string& model_id() const noexcept { return model_id_; }
    std::size_t n_layers() const noexcept { return n_layers_; }
    std::size_t n_samples() const noexcept { return n_samples_; }
    std::size_t d_model() const noexcept { return d_model_; }
    const std::vector<std::string>& sample_ids() const noexcept { return sample_ids_; }
    std::span<const float> data() const noexcept { return data_; }

    float at(std::size_t layer, std::size_t sample, std::size_t dim) const {
        return data_[(layer * n_samples_ + sample) * d_model_ + dim];
    }

    /// First NaN/Inf in storage order, if any.
    std::optional<NonFiniteValue> find_non_finite() const;

    bool operator==(const ActivationTensor& other) const;

private:
    std::string model_id_;
    std::size_t n_layers_;
    std::size_t n_samples_;
    std::size_t d_model_;
    std::vector<std::string> sample_ids_;
    std::vector<float> data_;
};

inline constexpr std::uint32_t kActvVersion = 1;

/// Serializes to ACTV1 bytes. Throws ValidationError naming the first
/// non-finite value's layer/sample/dim.
std::vector<std::uint8_t> encode_tensor(const ActivationTensor& tensor);
/// Throws FormatError (bad magic, truncation, size mismatch, non-finite
/// payload) or UnsupportedVersionError.
ActivationTensor decode_tensor(std::span<const std::uint8_t> bytes);

void write_tensor(const ActivationTensor& tensor, const std::filesystem::path& path);
ActivationTensor read_tensor(const std::filesystem::path& path);

/// Throws BoundsError when layer >= n_layers. The view borrows from `tensor`.
LayerMatrix layer_slice(const ActivationTensor& tensor, std::size_t layer);

}  // namespace bloomprobe
