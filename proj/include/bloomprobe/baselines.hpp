// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The bloomprobe Authors

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "bloomprobe/corpus.hpp"
#include "bloomprobe/evaluation.hpp"
#include "bloomprobe/probe.hpp"

namespace bloomprobe {

struct TfidfConfig {
    bool lowercase = true;
    bool smooth_idf = true;    ///< ln((1+N)/(1+df)) + 1, otherwise ln(N/df) + 1
    bool l2_normalize = true;

    bool operator==(const TfidfConfig&) const = default;
};

/// Splits on runs of characters that are not ASCII letters or digits. Bytes
/// >= 0x80 count as word characters so UTF-8 words stay whole.
std::vector<std::string> tfidf_tokenize(std::string_view text, bool lowercase = true);

/// Unigram TF-IDF vectorizer. Vocabulary columns follow lexicographic token order.
class TfidfModel {
public:
    TfidfModel(std::map<std::string, std::size_t> vocabulary, std::vector<double> idf, TfidfConfig config);

    const std::map<std::string, std::size_t>& vocabulary() const noexcept { return vocabulary_; }
    const std::vector<double>& idf() const noexcept { return idf_; }
    const TfidfConfig& config() const noexcept { return config_; }
    std::size_t size() const noexcept { return idf_.size(); }

    /// Rows are raw count * idf, optionally L2-normalized. Tokens missing from
    /// the vocabulary are ignored; a document with none left stays all-zero.
    Matrix transform(const std::vector<std::string>& texts) const;
    /// Indices of documents in `texts` whose transformed row is all-zero.
    std::vector<std::size_t> empty_rows(const std::vector<std::string>& texts) const;

private:
    std::map<std::string, std::size_t> vocabulary_;
    std::vector<double> idf_;
    TfidfConfig config_;
};

/// Throws InvalidArgument when no document contributes a token.
TfidfModel fit_tfidf(const std::vector<std::string>& texts, const TfidfConfig& config = {});

struct TfidfFeatures {
    TfidfConfig config;
};

/// Precomputed sentence embeddings stored as a single-layer ACTV1 file.
struct EmbeddingFeatures {
    std::filesystem::path path;
};

using FeatureSource = std::variant<TfidfFeatures, EmbeddingFeatures>;

struct EmbeddingMatrix {
    std::vector<std::string> sample_ids;
    Matrix vectors;  ///< n x d_e
    std::string source_model;
};

/// Reads an ACTV1 file, requiring n_layers == 1.
EmbeddingMatrix load_embeddings(const std::filesystem::path& path);

struct TextFeatures {
    Matrix train;  ///< rows in split.train order
    Matrix test;   ///< rows in split.test order
    std::optional<TfidfModel> tfidf;  ///< set for TF-IDF features
};

/// Feature matrices for both halves of the split. TF-IDF is fitted on the
/// training rows only. Throws AlignmentError when embedding ids do not match
/// the corpus.
TextFeatures build_text_features(const Corpus& corpus, const FeatureSource& features, const SplitIndices& split);

/// TF-IDF is fitted on the training rows only. Throws AlignmentError when
/// embedding ids do not match the corpus.
EvalReport run_text_baseline(const Corpus& corpus, const FeatureSource& features, const SplitIndices& split,
                             const TrainConfig& config);

/// Same, with the default 80/20 stratified split drawn from `split_seed`.
EvalReport run_text_baseline(const Corpus& corpus, const FeatureSource& features, std::uint64_t split_seed,
                             const TrainConfig& config, double ratio = 0.8);

}  // namespace bloomprobe
