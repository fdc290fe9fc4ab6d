// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The bloomprobe Authors

#include "bloomprobe/json_io.hpp"

#include "bloomprobe/error.hpp"

namespace bloomprobe {

namespace {

Json vec(const Vector& v) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

Json mat(const Matrix& m) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        out.push_back(std::move(row));
    }
    return out;
}

Vector vec_from(const Json& j, const char* field) {
    if (!j.is_array()) throw DataError(std::string("probe field '") + field + "' must be an array");
    Vector out(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) out(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    return out;
}

Matrix mat_from(const Json& j, const char* field) {
    if (!j.is_array()) throw DataError(std::string("probe field '") + field + "' must be an array of rows");
    const auto rows = j.size();
    const auto cols = rows ? j[0].size() : 0;
    Matrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows; ++i) {
        if (!j[i].is_array() || j[i].size() != cols) throw DataError(std::string("ragged matrix in '") + field + "'");
        for (std::size_t c = 0; c < cols; ++c) {
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = j[i][c].get<double>();
        }
    }
    return out;
}

Json train_meta_json(const TrainMeta& meta) {
    return Json{{"iterations", meta.iterations},
                {"final_grad_norm", meta.final_grad_norm},
                {"final_loss", meta.final_loss},
                {"converged", meta.converged}};
}

}  // namespace

Json to_json(const LengthReport& r) {
    Json per_level = Json::object();
    for (const auto& [level, counts] : r.per_level_word_counts) per_level[std::to_string(level)] = counts;
    Json pairs = Json::array();
    for (const auto& p : r.pairwise) {
        pairs.push_back({{"level_a", p.level_a},
                         {"level_b", p.level_b},
                         {"t_statistic", p.t_statistic},
                         {"dof", p.dof},
                         {"raw_p", p.raw_p},
                         {"significant_after_bonferroni", p.significant_after_bonferroni}});
    }
    return Json{{"per_level_word_counts", per_level},
                {"mean", r.mean},
                {"std", r.std},
                {"min", r.min},
                {"max", r.max},
                {"anova_f", r.anova_f},
                {"anova_p", r.anova_p},
                {"alpha", r.alpha},
                {"bonferroni_threshold", r.bonferroni_threshold},
                {"pairwise", pairs}};
}

Json to_json(const EvalReport& r) {
    Json confusion = Json::array();
    for (int i = 0; i < r.confusion.num_classes(); ++i) {
        Json row = Json::array();
        for (int j = 0; j < r.confusion.num_classes(); ++j) row.push_back(r.confusion.at(i, j));
        confusion.push_back(std::move(row));
    }
    Json hist = Json::object();
    for (const auto& [d, c] : r.err_dist_histogram) hist[std::to_string(d)] = c;
    return Json{{"num_classes", r.num_classes},
                {"n_samples", r.n_samples},
                {"accuracy", r.accuracy},
                {"per_class_precision", r.per_class_precision},
                {"per_class_recall", r.per_class_recall},
                {"macro_precision", r.macro_precision},
                {"macro_recall", r.macro_recall},
                {"confusion", confusion},
                {"err_dist_mean_over_errors", r.err_dist_mean_over_errors},
                {"err_dist_mean_over_all", r.err_dist_mean_over_all},
                {"err_dist_histogram", hist},
                {"zero_prediction_classes", r.zero_prediction_classes},
                {"zero_support_classes", r.zero_support_classes}};
}

Json to_json(const ScanReport& r) {
    Json layers = Json::array();
    for (const auto& lr : r.layer_results) {
        Json entry{{"layer", lr.layer},
                   {"test", to_json(lr.eval)},
                   {"train_accuracy", lr.train_accuracy},
                   {"train_meta", train_meta_json(lr.train_meta)}};
        entry["probe_path"] = lr.probe_path ? Json(*lr.probe_path) : Json(nullptr);
        layers.push_back(std::move(entry));
    }
    Json out{{"model_id", r.model_id},
             {"tau", r.tau},
             {"n_layers", r.layer_results.size()},
             {"accuracies", r.accuracies()},
             {"per_level_accuracy", r.per_level_accuracy},
             {"per_level_layer", r.per_level_layer},
             {"per_level_source", r.per_level_source},
             {"dips_below_tau_after_cso", r.dips_below_tau_after_cso},
             {"mean_accuracy_all_layers", r.mean_accuracy_all_layers()},
             {"best_layer", r.best_layer()},
             {"layers", layers}};
    out["cso_layer"] = r.cso_layer ? Json(*r.cso_layer) : Json(nullptr);
    const auto past = r.mean_accuracy_past_cso();
    out["mean_accuracy_past_cso"] = past ? Json(*past) : Json(nullptr);
    const auto at = r.accuracy_at_cso();
    out["accuracy_at_cso"] = at ? Json(*at) : Json(nullptr);
    return out;
}

Json to_json(const DistanceProfile& p) {
    return Json{{"per_layer", p.per_layer},
                {"mean_per_layer", p.mean_per_layer},
                {"monotonicity_fraction", p.monotonicity_fraction}};
}

Json to_json(const TfidfModel& m) {
    Json vocab = Json::object();
    for (const auto& [token, col] : m.vocabulary()) vocab[token] = col;
    return Json{{"vocabulary", vocab},
                {"idf", m.idf()},
                {"config",
                 {{"lowercase", m.config().lowercase},
                  {"smooth_idf", m.config().smooth_idf},
                  {"l2_normalize", m.config().l2_normalize},
                  {"token_pattern", "runs of ASCII alphanumerics (bytes >= 0x80 kept)"}}}};
}

Json to_json(const TrainConfig& c) {
    return Json{{"lambda", c.lambda},
                {"max_iters", c.max_iters},
                {"grad_tol", c.grad_tol},
                {"seed", c.seed},
                {"num_classes", c.num_classes}};
}

Json probe_to_json(const LinearProbe& probe, const std::string& model_id, std::size_t layer) {
    return Json{{"model_id", model_id},
                {"layer", layer},
                {"lambda", probe.lambda},
                {"means", vec(probe.standardizer.means)},
                {"scales", vec(probe.standardizer.scales)},
                {"weights", mat(probe.params.weights)},
                {"bias", vec(probe.params.bias)},
                {"train_meta", train_meta_json(probe.train_meta)}};
}

LinearProbe probe_from_json(const Json& j) {
    try {
        LinearProbe p;
        p.lambda = j.at("lambda").get<double>();
        p.standardizer.means = vec_from(j.at("means"), "means");
        p.standardizer.scales = vec_from(j.at("scales"), "scales");
        p.params.weights = mat_from(j.at("weights"), "weights");
        p.params.bias = vec_from(j.at("bias"), "bias");
        const auto& meta = j.at("train_meta");
        p.train_meta.iterations = meta.at("iterations").get<int>();
        p.train_meta.final_grad_norm = meta.at("final_grad_norm").get<double>();
        p.train_meta.final_loss = meta.at("final_loss").get<double>();
        p.train_meta.converged = meta.at("converged").get<bool>();
        if (p.params.bias.size() != p.params.weights.rows() || p.standardizer.means.size() != p.params.weights.cols() ||
            p.standardizer.scales.size() != p.params.weights.cols()) {
            throw DataError("probe JSON has inconsistent shapes");
        }
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed probe JSON: ") + e.what());
    }
}

TfidfModel tfidf_from_json(const Json& j) {
    try {
        std::map<std::string, std::size_t> vocab;
        for (const auto& [token, col] : j.at("vocabulary").items()) vocab.emplace(token, col.get<std::size_t>());
        TfidfConfig config;
        const auto& c = j.at("config");
        config.lowercase = c.at("lowercase").get<bool>();
        config.smooth_idf = c.at("smooth_idf").get<bool>();
        config.l2_normalize = c.at("l2_normalize").get<bool>();
        return TfidfModel(std::move(vocab), j.at("idf").get<std::vector<double>>(), config);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed TF-IDF JSON: ") + e.what());
    }
}

std::string dump(const Json& j) {
    return j.dump(2) + "\n";
}

}  // namespace bloomprobe
