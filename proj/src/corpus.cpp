// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The bloomprobe Authors

#include "bloomprobe/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>
#include <unordered_set>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <json.hpp>

#include "bloomprobe/error.hpp"
#include "bloomprobe/rng.hpp"

namespace bloomprobe {

namespace {

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(), is_space);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// A record under construction; `line` is where it started.
struct RawRecord {
    std::optional<std::string> id;
    std::string text;
    long long label = 0;
    std::optional<std::string> source;
    std::size_t line = 0;
};

Corpus build_corpus(std::vector<RawRecord> records) {
    std::vector<Question> questions;
    questions.reserve(records.size());
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < records.size(); ++i) {
        auto& r = records[i];
        if (r.label < 0 || r.label >= kNumBloomLevels) {
            throw ValidationError("line " + std::to_string(r.line) + ": bloom_level " +
                                  std::to_string(r.label) + " outside 0..5");
        }
        if (is_blank(r.text)) {
            throw ValidationError("line " + std::to_string(r.line) + ": empty question text");
        }
        Question q;
        q.id = r.id ? std::move(*r.id) : std::to_string(i);
        q.text = std::move(r.text);
        q.bloom_level = static_cast<int>(r.label);
        q.source = source_from_string(r.source.value_or(""));
        if (!seen.insert(q.id).second) {
            throw ValidationError("line " + std::to_string(r.line) + ": duplicate id '" + q.id + "'");
        }
        questions.push_back(std::move(q));
    }
    return Corpus(std::move(questions));
}

long long parse_label(std::string_view field, std::size_t line) {
    auto trimmed = field;
    while (!trimmed.empty() && is_space(trimmed.front())) trimmed.remove_prefix(1);
    while (!trimmed.empty() && is_space(trimmed.back())) trimmed.remove_suffix(1);
    long long value = 0;
    auto [ptr, ec] = std::from_chars(trimmed.data(), trimmed.data() + trimmed.size(), value);
    if (trimmed.empty() || ec != std::errc() || ptr != trimmed.data() + trimmed.size()) {
        throw ParseError("bloom_level '" + std::string(field) + "' is not an integer", line);
    }
    return value;
}

// RFC 4180-style rows: quoted fields may contain commas, doubled quotes and
// newlines. Returns (start line, fields) pairs.
std::vector<std::pair<std::size_t, std::vector<std::string>>> split_delimited(std::string_view content) {
    std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
    std::vector<std::string> fields;
    std::string field;
    bool in_quotes = false;
    bool field_was_quoted = false;
    std::size_t line = 1;
    std::size_t row_start = 1;

    auto end_field = [&] {
        fields.push_back(std::move(field));
        field.clear();
        field_was_quoted = false;
    };
    auto end_row = [&] {
        end_field();
        const bool empty_row = fields.size() == 1 && fields[0].empty();
        if (!empty_row) rows.emplace_back(row_start, std::move(fields));
        fields.clear();
    };

    for (std::size_t i = 0; i < content.size(); ++i) {
        const char c = content[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < content.size() && content[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                if (!field.empty() || field_was_quoted) {
                    throw ParseError("stray quote inside unquoted field", line);
                }
                in_quotes = true;
                field_was_quoted = true;
                break;
            case ',':
                end_field();
                break;
            case '\r':
                break;
            case '\n':
                end_row();
                ++line;
                row_start = line;
                break;
            default:
                if (field_was_quoted) throw ParseError("text after closing quote", line);
                field.push_back(c);
        }
    }
    if (in_quotes) throw ParseError("unterminated quoted field", row_start);
    if (!field.empty() || !fields.empty() || field_was_quoted) end_row();
    return rows;
}

}  // namespace

std::string_view to_string(Source source) {
    switch (source) {
        case Source::CourseQueries: return "course_queries";
        case Source::EduQG: return "eduqg";
        case Source::Other: return "other";
    }
    return "other";
}

Source source_from_string(std::string_view name) {
    if (name == "course_queries") return Source::CourseQueries;
    if (name == "eduqg") return Source::EduQG;
    return Source::Other;
}

Corpus::Corpus(std::vector<Question> questions) : questions_(std::move(questions)) {
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < questions_.size(); ++i) {
        const auto& q = questions_[i];
        if (q.bloom_level < 0 || q.bloom_level >= kNumBloomLevels) {
            throw ValidationError("question " + std::to_string(i) + ": bloom_level " +
                                  std::to_string(q.bloom_level) + " outside 0..5");
        }
        if (is_blank(q.text)) throw ValidationError("question '" + q.id + "' has empty text");
        if (!seen.insert(q.id).second) throw ValidationError("duplicate question id '" + q.id + "'");
    }
}

std::map<int, std::size_t> Corpus::class_counts() const {
    std::map<int, std::size_t> counts;
    for (const auto& q : questions_) ++counts[q.bloom_level];
    return counts;
}

std::vector<int> Corpus::labels() const {
    std::vector<int> out;
    out.reserve(questions_.size());
    for (const auto& q : questions_) out.push_back(q.bloom_level);
    return out;
}

std::vector<std::string> Corpus::ids() const {
    std::vector<std::string> out;
    out.reserve(questions_.size());
    for (const auto& q : questions_) out.push_back(q.id);
    return out;
}

std::vector<std::string> Corpus::texts() const {
    std::vector<std::string> out;
    out.reserve(questions_.size());
    for (const auto& q : questions_) out.push_back(q.text);
    return out;
}

Corpus Corpus::subset(const std::vector<std::size_t>& indices) const {
    std::vector<Question> out;
    out.reserve(indices.size());
    for (auto i : indices) {
        if (i >= questions_.size()) throw BoundsError("corpus index " + std::to_string(i) + " out of range");
        out.push_back(questions_[i]);
    }
    return Corpus(std::move(out));
}

CorpusFormat guess_corpus_format(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".jsonl" || ext == ".json" || ext == ".ndjson") return CorpusFormat::JsonLines;
    return CorpusFormat::Delimited;
}

Corpus parse_corpus_jsonl(std::string_view content) {
    std::vector<RawRecord> records;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= content.size()) {
        const auto nl = content.find('\n', pos);
        const auto line = content.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        ++line_no;
        pos = nl == std::string_view::npos ? content.size() + 1 : nl + 1;
        if (is_blank(line)) continue;

        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
        }
        if (!obj.is_object()) throw ParseError("record is not a JSON object", line_no);

        RawRecord r;
        r.line = line_no;
        auto text = obj.find("text");
        if (text == obj.end() || !text->is_string()) throw ParseError("missing string field 'text'", line_no);
        r.text = text->get<std::string>();

        auto label = obj.find("bloom_level");
        if (label == obj.end()) throw ParseError("missing field 'bloom_level'", line_no);
        if (label->is_number_integer()) {
            r.label = label->get<long long>();
        } else if (label->is_string()) {
            r.label = parse_label(label->get<std::string>(), line_no);
        } else {
            throw ParseError("bloom_level is not an integer", line_no);
        }

        if (auto id = obj.find("id"); id != obj.end() && !id->is_null()) {
            if (id->is_string()) {
                r.id = id->get<std::string>();
            } else if (id->is_number_integer()) {
                r.id = std::to_string(id->get<long long>());
            } else {
                throw ParseError("id must be a string", line_no);
            }
        }
        if (auto src = obj.find("source"); src != obj.end() && src->is_string()) {
            r.source = src->get<std::string>();
        }
        records.push_back(std::move(r));
    }
    return build_corpus(std::move(records));
}

Corpus parse_corpus_delimited(std::string_view content) {
    auto rows = split_delimited(content);
    if (rows.empty()) throw ParseError("missing header row", 1);

    const auto& header = rows.front().second;
    std::optional<std::size_t> id_col, text_col, label_col, source_col;
    for (std::size_t c = 0; c < header.size(); ++c) {
        std::string name = header[c];
        if (c == 0 && name.rfind("\xEF\xBB\xBF", 0) == 0) name.erase(0, 3);  // BOM
        if (name == "id") id_col = c;
        else if (name == "text") text_col = c;
        else if (name == "bloom_level") label_col = c;
        else if (name == "source") source_col = c;
    }
    if (!text_col || !label_col) throw ParseError("header must name 'text' and 'bloom_level' columns", 1);

    std::vector<RawRecord> records;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& [line, fields] = rows[r];
        if (fields.size() != header.size()) {
            throw ParseError("expected " + std::to_string(header.size()) + " fields, found " +
                                 std::to_string(fields.size()),
                             line);
        }
        RawRecord rec;
        rec.line = line;
        rec.text = fields[*text_col];
        rec.label = parse_label(fields[*label_col], line);
        if (id_col && !fields[*id_col].empty()) rec.id = fields[*id_col];
        if (source_col) rec.source = fields[*source_col];
        records.push_back(std::move(rec));
    }
    return build_corpus(std::move(records));
}

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format) {
    const auto content = read_file(path);
    return format == CorpusFormat::JsonLines ? parse_corpus_jsonl(content) : parse_corpus_delimited(content);
}

Corpus load_corpus(const std::filesystem::path& path) {
    return load_corpus(path, guess_corpus_format(path));
}

Corpus balance_downsample(const Corpus& corpus, std::uint64_t seed) {
    std::array<std::vector<std::size_t>, kNumBloomLevels> by_level;
    for (std::size_t i = 0; i < corpus.size(); ++i) by_level[corpus[i].bloom_level].push_back(i);

    std::size_t target = corpus.size();
    for (int level = 0; level < kNumBloomLevels; ++level) {
        if (by_level[level].empty()) {
            throw ValidationError("cannot balance: level " + std::to_string(level) + " (" +
                                  std::string(kBloomLevelNames[level]) + ") is absent");
        }
        target = std::min(target, by_level[level].size());
    }

    Shuffler shuffler(seed);
    std::vector<std::size_t> keep;
    keep.reserve(target * kNumBloomLevels);
    for (auto& indices : by_level) {
        shuffler.shuffle(std::span<std::size_t>(indices));
        keep.insert(keep.end(), indices.begin(), indices.begin() + static_cast<std::ptrdiff_t>(target));
    }
    std::sort(keep.begin(), keep.end());
    return corpus.subset(keep);
}

std::size_t word_count(std::string_view text) {
    std::size_t count = 0;
    bool in_word = false;
    for (char c : text) {
        if (is_space(c)) {
            in_word = false;
        } else if (!in_word) {
            in_word = true;
            ++count;
        }
    }
    return count;
}

double f_test_upper_tail(double f, double dof1, double dof2) {
    if (!(f > 0.0)) return 1.0;
    if (std::isinf(f)) return 0.0;
    boost::math::fisher_f dist(dof1, dof2);
    return boost::math::cdf(boost::math::complement(dist, f));
}

namespace {

struct Moments {
    double n = 0.0;
    double mean = 0.0;
    double var = 0.0;  // sample variance (n - 1)
};

Moments moments(std::span<const double> xs) {
    Moments m;
    m.n = static_cast<double>(xs.size());
    m.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / m.n;
    double ss = 0.0;
    for (double x : xs) ss += (x - m.mean) * (x - m.mean);
    m.var = ss / (m.n - 1.0);
    return m;
}

}  // namespace

PairwiseLengthTest welch_t_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) throw InvalidArgument("Welch t-test needs at least two samples per group");
    const auto ma = moments(a);
    const auto mb = moments(b);
    PairwiseLengthTest out;
    const double va = ma.var / ma.n;
    const double vb = mb.var / mb.n;
    const double se2 = va + vb;
    if (se2 == 0.0) {
        // Both groups constant: identical means cannot differ, distinct means always do.
        out.raw_p = ma.mean == mb.mean ? 1.0 : 0.0;
        out.t_statistic = ma.mean == mb.mean ? 0.0 : std::copysign(INFINITY, ma.mean - mb.mean);
        out.dof = ma.n + mb.n - 2.0;
        return out;
    }
    out.t_statistic = (ma.mean - mb.mean) / std::sqrt(se2);
    out.dof = se2 * se2 / (va * va / (ma.n - 1.0) + vb * vb / (mb.n - 1.0));
    boost::math::students_t dist(out.dof);
    out.raw_p = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(out.t_statistic))));
    return out;
}

LengthReport length_analysis(const Corpus& corpus, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");

    LengthReport report;
    report.alpha = alpha;
    std::array<std::vector<double>, kNumBloomLevels> groups;
    std::vector<double> all;
    all.reserve(corpus.size());
    for (int level = 0; level < kNumBloomLevels; ++level) report.per_level_word_counts[level];
    for (const auto& q : corpus.questions()) {
        const auto wc = word_count(q.text);
        report.per_level_word_counts[q.bloom_level].push_back(wc);
        groups[q.bloom_level].push_back(static_cast<double>(wc));
        all.push_back(static_cast<double>(wc));
    }
    for (int level = 0; level < kNumBloomLevels; ++level) {
        if (groups[level].size() < 2) {
            throw ValidationError("length analysis needs at least 2 questions at level " + std::to_string(level) +
                                  ", found " + std::to_string(groups[level].size()));
        }
    }

    const double n_total = static_cast<double>(all.size());
    report.mean = std::accumulate(all.begin(), all.end(), 0.0) / n_total;
    double ss_total = 0.0;
    for (double x : all) ss_total += (x - report.mean) * (x - report.mean);
    report.std = std::sqrt(ss_total / n_total);
    const auto [lo, hi] = std::minmax_element(all.begin(), all.end());
    report.min = static_cast<std::size_t>(*lo);
    report.max = static_cast<std::size_t>(*hi);

    double ss_between = 0.0;
    double ss_within = 0.0;
    for (const auto& g : groups) {
        const auto m = moments(g);
        ss_between += m.n * (m.mean - report.mean) * (m.mean - report.mean);
        ss_within += m.var * (m.n - 1.0);
    }
    const double dof1 = kNumBloomLevels - 1;
    const double dof2 = n_total - kNumBloomLevels;
    // Group means of integer counts are exact enough that "no spread" shows up as
    // a negligible fraction of the total sum of squares.
    const bool no_between = ss_between <= 1e-12 * std::max(ss_total, 1.0);
    if (no_between) {
        report.anova_f = 0.0;
        report.anova_p = 1.0;
    } else if (ss_within == 0.0) {
        report.anova_f = INFINITY;
        report.anova_p = 0.0;
    } else {
        report.anova_f = (ss_between / dof1) / (ss_within / dof2);
        report.anova_p = f_test_upper_tail(report.anova_f, dof1, dof2);
    }

    constexpr int kPairs = kNumBloomLevels * (kNumBloomLevels - 1) / 2;
    report.bonferroni_threshold = alpha / kPairs;
    for (int a = 0; a < kNumBloomLevels; ++a) {
        for (int b = a + 1; b < kNumBloomLevels; ++b) {
            auto test = welch_t_test(groups[a], groups[b]);
            test.level_a = a;
            test.level_b = b;
            test.significant_after_bonferroni = test.raw_p < report.bonferroni_threshold;
            report.pairwise.push_back(test);
        }
    }
    return report;
}

}  // namespace bloomprobe
