// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The bloomprobe Authors

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bloomprobe {

inline constexpr int kNumBloomLevels = 6;

/// Level names indexed by label, 0 = Remember ... 5 = Create.
inline constexpr std::array<std::string_view, kNumBloomLevels> kBloomLevelNames = {
    "Remember", "Understand", "Apply", "Analyze", "Evaluate", "Create"};

enum class Source { CourseQueries, EduQG, Other };

std::string_view to_string(Source source);
/// Unknown or empty names map to Source::Other.
Source source_from_string(std::string_view name);

struct Question {
    std::string id;
    std::string text;
    int bloom_level = 0;
    Source source = Source::Other;

    bool operator==(const Question&) const = default;
};

/// Ordered, validated question set. Ids are unique, labels in 0..5, texts
/// non-blank. Immutable once built.
class Corpus {
public:
    Corpus() = default;
    /// Validates every question; throws ValidationError on the first violation.
    explicit Corpus(std::vector<Question> questions);

    const std::vector<Question>& questions() const noexcept { return questions_; }
    std::size_t size() const noexcept { return questions_.size(); }
    const Question& operator[](std::size_t i) const { return questions_[i]; }

    /// level -> count, only for levels that occur.
    std::map<int, std::size_t> class_counts() const;
    std::vector<int> labels() const;
    std::vector<std::string> ids() const;
    std::vector<std::string> texts() const;

    /// Rows with the given indices, in the given order.
    Corpus subset(const std::vector<std::size_t>& indices) const;

    bool operator==(const Corpus&) const = default;

private:
    std::vector<Question> questions_;
};

enum class CorpusFormat { Delimited, JsonLines };

/// `.jsonl` / `.json` / `.ndjson` -> JsonLines, everything else -> Delimited.
CorpusFormat guess_corpus_format(const std::filesystem::path& path);

/// Throws ParseError (with 1-based line number) for malformed records and
/// ValidationError for out-of-range labels, blank texts or duplicate ids.
/// Missing ids become zero-based row indices.
Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format);
Corpus load_corpus(const std::filesystem::path& path);

Corpus parse_corpus_jsonl(std::string_view content);
Corpus parse_corpus_delimited(std::string_view content);

/// Keeps min-count questions per level. Within each level (0..5 in order) the
/// candidate indices are shuffled with one seeded Shuffler and the first k
/// kept; survivors keep their original relative order.
Corpus balance_downsample(const Corpus& corpus, std::uint64_t seed);

/// Whitespace-run tokenization; no punctuation handling.
std::size_t word_count(std::string_view text);

struct PairwiseLengthTest {
    int level_a = 0;
    int level_b = 0;
    double t_statistic = 0.0;
    double dof = 0.0;
    double raw_p = 1.0;
    bool significant_after_bonferroni = false;
};

struct LengthReport {
    std::map<int, std::vector<std::size_t>> per_level_word_counts;
    double mean = 0.0;
    double std = 0.0;  ///< population standard deviation over all questions
    std::size_t min = 0;
    std::size_t max = 0;
    double anova_f = 0.0;
    double anova_p = 1.0;
    double alpha = 0.05;
    double bonferroni_threshold = 0.05 / 15.0;
    std::vector<PairwiseLengthTest> pairwise;  ///< 15 entries, (0,1), (0,2), ... (4,5)
};

/// One-way ANOVA over the six levels plus pairwise Welch t-tests judged at
/// alpha / 15. Every level needs at least two questions.
LengthReport length_analysis(const Corpus& corpus, double alpha = 0.05);

/// Upper tail of the F distribution, P(F > f). Exposed for testing.
double f_test_upper_tail(double f, double dof1, double dof2);

/// Two-sided Welch t-test on two samples (each with n >= 2).
PairwiseLengthTest welch_t_test(std::span<const double> a, std::span<const double> b);

}  // namespace bloomprobe
