// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The bloomprobe Authors

#pragma once

#include <span>
#include <string>
#include <vector>

#include "bloomprobe/activation_store.hpp"
#include "bloomprobe/probe.hpp"

namespace bloomprobe {

struct CentroidSet {
    std::size_t layer = 0;
    Matrix centroids;  ///< K x d, row k = mean of the class-k vectors
};

/// Exact per-class means of the raw (unstandardized) rows, accumulated in
/// double. Throws ValidationError naming the first class with no rows.
CentroidSet class_centroids(const LayerMatrix& layer, std::span<const int> labels, int num_classes = 6);

/// ||a - b||_2 over two centroid rows.
double centroid_distance(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b);

struct DistanceProfile {
    /// per_layer[l][k] = || mu_{l,k+1} - mu_{l,k} ||_2, k = 0..K-2
    std::vector<std::vector<double>> per_layer;
    std::vector<double> mean_per_layer;
    /// Share of consecutive layer pairs where the mean distance grows.
    double monotonicity_fraction = 0.0;

    /// `layer,d_0_1,...,d_{K-2}_{K-1},mean`.
    std::string to_csv() const;
};

DistanceProfile centroid_profile(const ActivationTensor& tensor, std::span<const int> labels, int num_classes = 6);

}  // namespace bloomprobe
