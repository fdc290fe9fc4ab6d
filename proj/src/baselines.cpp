// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The bloomprobe Authors

#include "bloomprobe/baselines.hpp"

#include <cmath>
#include <set>

#include "bloomprobe/activation_store.hpp"
#include "bloomprobe/error.hpp"
#include "bloomprobe/layerscan.hpp"

namespace bloomprobe {

namespace {

bool is_word_byte(unsigned char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

std::vector<int> pick(const std::vector<int>& labels, std::span<const std::size_t> rows) {
    std::vector<int> out;
    out.reserve(rows.size());
    for (auto r : rows) out.push_back(labels[r]);
    return out;
}

std::vector<std::string> pick(const std::vector<std::string>& texts, std::span<const std::size_t> rows) {
    std::vector<std::string> out;
    out.reserve(rows.size());
    for (auto r : rows) out.push_back(texts[r]);
    return out;
}

}  // namespace

std::vector<std::string> tfidf_tokenize(std::string_view text, bool lowercase) {
    std::vector<std::string> tokens;
    std::string current;
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (is_word_byte(c)) {
            current.push_back(lowercase && c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : ch);
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

TfidfModel::TfidfModel(std::map<std::string, std::size_t> vocabulary, std::vector<double> idf, TfidfConfig config)
    : vocabulary_(std::move(vocabulary)), idf_(std::move(idf)), config_(config) {
    if (vocabulary_.size() != idf_.size()) throw InvalidArgument("vocabulary and idf sizes differ");
    std::vector<bool> used(idf_.size(), false);
    for (const auto& [token, col] : vocabulary_) {
        if (col >= idf_.size() || used[col]) throw InvalidArgument("vocabulary indices must be dense 0..V-1");
        used[col] = true;
    }
    for (double v : idf_) {
        if (!std::isfinite(v) || v <= 0.0) throw InvalidArgument("idf values must be finite and positive");
    }
}

Matrix TfidfModel::transform(const std::vector<std::string>& texts) const {
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(texts.size()), static_cast<Eigen::Index>(idf_.size()));
    for (std::size_t i = 0; i < texts.size(); ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        for (const auto& token : tfidf_tokenize(texts[i], config_.lowercase)) {
            auto it = vocabulary_.find(token);
            if (it != vocabulary_.end()) out(row, static_cast<Eigen::Index>(it->second)) += 1.0;
        }
        for (std::size_t j = 0; j < idf_.size(); ++j) out(row, static_cast<Eigen::Index>(j)) *= idf_[j];
        if (config_.l2_normalize) {
            const double norm = out.row(row).norm();
            if (norm > 0.0) out.row(row) /= norm;
        }
    }
    return out;
}

std::vector<std::size_t> TfidfModel::empty_rows(const std::vector<std::string>& texts) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        bool any = false;
        for (const auto& token : tfidf_tokenize(texts[i], config_.lowercase)) {
            if (vocabulary_.count(token)) {
                any = true;
                break;
            }
        }
        if (!any) out.push_back(i);
    }
    return out;
}

TfidfModel fit_tfidf(const std::vector<std::string>& texts, const TfidfConfig& config) {
    std::map<std::string, std::size_t> df;
    for (const auto& text : texts) {
        const auto tokens = tfidf_tokenize(text, config.lowercase);
        for (const auto& token : std::set<std::string>(tokens.begin(), tokens.end())) ++df[token];
    }
    if (df.empty()) throw InvalidArgument("TF-IDF needs at least one non-empty document");

    const double n_docs = static_cast<double>(texts.size());
    std::map<std::string, std::size_t> vocabulary;
    std::vector<double> idf;
    idf.reserve(df.size());
    for (const auto& [token, count] : df) {
        vocabulary.emplace(token, idf.size());
        const double d = static_cast<double>(count);
        idf.push_back(config.smooth_idf ? std::log((1.0 + n_docs) / (1.0 + d)) + 1.0 : std::log(n_docs / d) + 1.0);
    }
    return TfidfModel(std::move(vocabulary), std::move(idf), config);
}

EmbeddingMatrix load_embeddings(const std::filesystem::path& path) {
    const auto tensor = read_tensor(path);
    if (tensor.n_layers() != 1) {
        throw ValidationError("embedding file " + path.string() + " has " + std::to_string(tensor.n_layers()) +
                              " layers, expected 1");
    }
    EmbeddingMatrix out;
    out.sample_ids = tensor.sample_ids();
    out.vectors = layer_slice(tensor, 0).to_double();
    out.source_model = tensor.model_id();
    return out;
}

TextFeatures build_text_features(const Corpus& corpus, const FeatureSource& features, const SplitIndices& split) {
    const auto texts = corpus.texts();
    for (const auto* part : {&split.train, &split.test}) {
        for (auto i : *part) {
            if (i >= corpus.size()) throw InvalidArgument("split index " + std::to_string(i) + " out of range");
        }
    }

    TextFeatures out;
    if (const auto* tfidf = std::get_if<TfidfFeatures>(&features)) {
        const auto train_texts = pick(texts, split.train);
        out.tfidf = fit_tfidf(train_texts, tfidf->config);
        out.train = out.tfidf->transform(train_texts);
        out.test = out.tfidf->transform(pick(texts, split.test));
    } else {
        const auto& emb = std::get<EmbeddingFeatures>(features);
        const auto matrix = load_embeddings(emb.path);
        check_alignment(corpus.ids(), matrix.sample_ids, "embeddings '" + emb.path.string() + "'");
        out.train = gather_rows(matrix.vectors, split.train);
        out.test = gather_rows(matrix.vectors, split.test);
    }
    return out;
}

EvalReport run_text_baseline(const Corpus& corpus, const FeatureSource& features, const SplitIndices& split,
                             const TrainConfig& config) {
    const auto labels = corpus.labels();
    const auto x = build_text_features(corpus, features, split);
    TrainConfig probe_config = config;
    if (probe_config.num_classes == 0) probe_config.num_classes = kNumBloomLevels;
    const auto probe = train_probe(x.train, pick(labels, split.train), probe_config);
    return evaluate(pick(labels, split.test), predict(probe, x.test), probe_config.num_classes);
}

EvalReport run_text_baseline(const Corpus& corpus, const FeatureSource& features, std::uint64_t split_seed,
                             const TrainConfig& config, double ratio) {
    const auto labels = corpus.labels();
    return run_text_baseline(corpus, features, stratified_split(labels, ratio, split_seed), config);
}

}  // namespace bloomprobe
