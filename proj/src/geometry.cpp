// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The bloomprobe Authors

#include "bloomprobe/geometry.hpp"

#include <sstream>

#include "bloomprobe/error.hpp"

namespace bloomprobe {

CentroidSet class_centroids(const LayerMatrix& layer, std::span<const int> labels, int num_classes) {
    if (labels.size() != layer.rows()) {
        throw InvalidArgument("got " + std::to_string(labels.size()) + " labels for " + std::to_string(layer.rows()) +
                              " rows");
    }
    if (num_classes <= 0) throw InvalidArgument("num_classes must be positive");

    CentroidSet out;
    out.layer = layer.layer_index;
    out.centroids = Matrix::Zero(num_classes, layer.values.cols());
    std::vector<std::size_t> counts(static_cast<std::size_t>(num_classes), 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int y = labels[i];
        if (y < 0 || y >= num_classes) {
            throw InvalidArgument("label " + std::to_string(y) + " outside [0, " + std::to_string(num_classes) + ")");
        }
        out.centroids.row(y) += layer.values.row(static_cast<Eigen::Index>(i)).cast<double>();
        ++counts[static_cast<std::size_t>(y)];
    }
    for (int k = 0; k < num_classes; ++k) {
        if (counts[static_cast<std::size_t>(k)] == 0) {
            throw ValidationError("class " + std::to_string(k) + " has no samples; centroid undefined");
        }
        out.centroids.row(k) /= static_cast<double>(counts[static_cast<std::size_t>(k)]);
    }
    return out;
}

double centroid_distance(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) {
    return (a - b).norm();
}

std::string DistanceProfile::to_csv() const {
    std::ostringstream out;
    out.precision(17);
    const auto pairs = per_layer.empty() ? std::size_t{5} : per_layer.front().size();
    out << "layer";
    for (std::size_t k = 0; k < pairs; ++k) out << ",d_" << k << '_' << k + 1;
    out << ",mean\n";
    for (std::size_t l = 0; l < per_layer.size(); ++l) {
        out << l;
        for (double d : per_layer[l]) out << ',' << d;
        out << ',' << mean_per_layer[l] << '\n';
    }
    return out.str();
}

DistanceProfile centroid_profile(const ActivationTensor& tensor, std::span<const int> labels, int num_classes) {
    if (labels.size() != tensor.n_samples()) {
        throw InvalidArgument("got " + std::to_string(labels.size()) + " labels for " +
                              std::to_string(tensor.n_samples()) + " samples");
    }
    if (num_classes < 2) throw InvalidArgument("need at least two classes for adjacent distances");

    DistanceProfile profile;
    for (std::size_t l = 0; l < tensor.n_layers(); ++l) {
        const auto set = class_centroids(layer_slice(tensor, l), labels, num_classes);
        std::vector<double> dists;
        double sum = 0.0;
        for (int k = 0; k + 1 < num_classes; ++k) {
            const Vector hi = set.centroids.row(k + 1).transpose();
            const Vector lo = set.centroids.row(k).transpose();
            dists.push_back(centroid_distance(hi, lo));
            sum += dists.back();
        }
        profile.mean_per_layer.push_back(sum / static_cast<double>(dists.size()));
        profile.per_layer.push_back(std::move(dists));
    }
    const auto& means = profile.mean_per_layer;
    if (means.size() > 1) {
        std::size_t rising = 0;
        for (std::size_t l = 1; l < means.size(); ++l) rising += means[l] > means[l - 1];
        profile.monotonicity_fraction = static_cast<double>(rising) / static_cast<double>(means.size() - 1);
    }
    return profile;
}

}  // namespace bloomprobe
