// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The bloomprobe Authors
//
// Acceptance runner: one PASS/FAIL/SKIP line per criterion, nonzero exit on
// any FAIL. Full-scale checks run only when real data is supplied through
// BLOOMPROBE_CORPUS, BLOOMPROBE_TENSORS (comma separated) and
// BLOOMPROBE_EMBEDDINGS.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bloomprobe/activation_store.hpp"
#include "bloomprobe/baselines.hpp"
#include "bloomprobe/corpus.hpp"
#include "bloomprobe/error.hpp"
#include "bloomprobe/evaluation.hpp"
#include "bloomprobe/geometry.hpp"
#include "bloomprobe/layerscan.hpp"
#include "bloomprobe/pipeline.hpp"
#include "bloomprobe/probe.hpp"
#include "test_util.hpp"

using namespace bloomprobe;
namespace bt = bloomprobe::testing;
namespace fs = std::filesystem;

namespace {

enum class Status { Pass, Fail, Skip };

struct Outcome {
    Status status = Status::Pass;
    std::string detail;
};

Outcome fail(std::string d) { return {Status::Fail, std::move(d)}; }
Outcome skip(std::string d) { return {Status::Skip, std::move(d)}; }
Outcome check(bool ok, std::string d) { return {ok ? Status::Pass : Status::Fail, std::move(d)}; }

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

const char* env(const char* name) {
    const char* v = std::getenv(name);
    return v && *v ? v : nullptr;
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream in(s);
    for (std::string item; std::getline(in, item, ',');)
        if (!item.empty()) out.push_back(item);
    return out;
}

// ---------------------------------------------------------------------------

Outcome gradient_oracle() {
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> nd(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 50);
        const int d = 1 + static_cast<int>(rng() % 10);
        Matrix x(n, d);
        for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = nd(rng);
        std::vector<int> y(n);
        for (auto& v : y) v = static_cast<int>(rng() % 6);
        ProbeParams p{Matrix(6, d), Vector(6)};
        for (Eigen::Index i = 0; i < p.weights.size(); ++i) p.weights(i) = nd(rng);
        for (Eigen::Index i = 0; i < 6; ++i) p.bias(i) = nd(rng);
        const double lambda = std::exp(nd(rng));
        worst = std::max(worst, bt::max_rel_grad_error(p, x, y, lambda));
    }
    return check(worst < 1e-5, "max relative error " + fmt("%.3g", worst));
}

Outcome optimizer_oracle() {
    double worst = 0.0;
    std::mt19937_64 rng(7);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (int trial = 0; trial < 3; ++trial) {
        Matrix x(4, 2);
        std::vector<int> y = {0, 1, 1, 0};
        if (trial == 0) {
            x << 0.0, 1.0, 1.0, 0.0, 2.0, 2.0, -1.0, 0.5;
        } else {
            for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = nd(rng);
        }
        TrainConfig cfg;
        cfg.max_iters = 5000;
        const auto probe = train_probe(x, y, cfg);
        const double grid = bt::grid_min_two_class(bt::reference_standardize(x), y, cfg.lambda);
        worst = std::max(worst, std::fabs(probe.train_meta.final_loss - grid));
    }
    return check(worst <= 1e-4, "max |trained - grid| " + fmt("%.3g", worst));
}

Outcome separable_clusters() {
    const auto ds = bt::gaussian_clusters(100, 6, 6, 10.0, 1.0, 99);
    const auto split = stratified_split(ds.y, 0.8, 42);
    std::vector<int> ytr, yte;
    for (auto i : split.train) ytr.push_back(ds.y[i]);
    for (auto i : split.test) yte.push_back(ds.y[i]);
    const auto probe = train_probe(gather_rows(ds.x, split.train), ytr);
    const auto report = evaluate(yte, predict(probe, gather_rows(ds.x, split.test)), 6);
    return check(report.accuracy >= 0.99,
                 "held-out accuracy " + fmt("%.4f", report.accuracy) + " on " + std::to_string(yte.size()));
}

Outcome planted_cso() {
    const auto labels = bt::round_robin_labels(50, 6);
    const auto tensor = bt::planted_tensor(labels, 8, 3, 16, 8.0, 5);
    const auto report =
        scan_layers(tensor, bt::make_corpus(labels), stratified_split(labels, 0.8, 42), TrainConfig{}, 0.9);
    const auto acc = report.accuracies();
    bool ok = report.cso_layer == 3u;
    std::string curve;
    for (std::size_t l = 0; l < acc.size(); ++l) {
        ok = ok && (l < 3 ? acc[l] <= 0.35 : acc[l] >= 0.95);
        curve += (l ? " " : "") + fmt("%.2f", acc[l]);
    }
    const std::string cso = report.cso_layer ? std::to_string(*report.cso_layer) : "none";
    return check(ok, "cso " + cso + ", curve [" + curve + "]");
}

Outcome evaluation_oracle() {
    std::mt19937_64 rng(123);
    int mismatches = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const int k = 6;
        const int n = 1 + static_cast<int>(rng() % 200);
        std::vector<int> t(n), p(n);
        for (int i = 0; i < n; ++i) {
            t[i] = static_cast<int>(rng() % k);
            p[i] = rng() % 2 ? t[i] : static_cast<int>(rng() % k);
        }
        const auto r = evaluate(t, p, k);

        std::vector<std::vector<std::int64_t>> cm(k, std::vector<std::int64_t>(k, 0));
        for (int i = 0; i < n; ++i) cm[t[i]][p[i]] += 1;
        std::int64_t correct = 0, dist_sum = 0, errors = 0;
        std::map<int, std::int64_t> hist;
        for (int i = 0; i < n; ++i) {
            const int dd = std::abs(p[i] - t[i]);
            hist[dd] += 1;
            if (dd == 0) {
                ++correct;
            } else {
                ++errors;
                dist_sum += dd;
            }
        }
        bool same = r.n_samples == static_cast<std::size_t>(n) && r.num_classes == k;
        same = same && r.accuracy == static_cast<double>(correct) / n;
        double macro_p = 0.0, macro_r = 0.0;
        std::vector<int> zero_pred, zero_support;
        for (int c = 0; c < k; ++c) {
            std::int64_t row = 0, col = 0;
            for (int j = 0; j < k; ++j) {
                row += cm[c][j];
                col += cm[j][c];
                same = same && r.confusion.at(c, j) == cm[c][j];
            }
            const double prec = col ? static_cast<double>(cm[c][c]) / col : 0.0;
            const double rec = row ? static_cast<double>(cm[c][c]) / row : 0.0;
            if (!col) zero_pred.push_back(c);
            if (!row) zero_support.push_back(c);
            same = same && r.per_class_precision[c] == prec && r.per_class_recall[c] == rec;
            macro_p += prec;
            macro_r += rec;
        }
        same = same && r.macro_precision == macro_p / k && r.macro_recall == macro_r / k;
        same = same && r.err_dist_mean_over_errors == (errors ? static_cast<double>(dist_sum) / errors : 0.0);
        same = same && r.err_dist_mean_over_all == static_cast<double>(dist_sum) / n;
        same = same && r.err_dist_histogram == hist;
        same = same && r.zero_prediction_classes == zero_pred && r.zero_support_classes == zero_support;
        if (!same) ++mismatches;
    }
    return check(mismatches == 0, std::to_string(50 - mismatches) + "/50 vectors match exactly");
}

Outcome geometry_oracle() {
    std::mt19937_64 rng(77);
    double worst_centroid = 0.0, worst_dist = 0.0, worst_translate = 0.0, worst_scale = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n_layers = 1 + rng() % 4, d = 1 + rng() % 12;
        std::vector<int> labels = bt::round_robin_labels(2, 6);
        const std::size_t extra = rng() % 40;
        for (std::size_t i = 0; i < extra; ++i) labels.push_back(static_cast<int>(rng() % 6));
        const std::size_t n = labels.size();
        // Values on a 1/64 grid keep float storage and shifted copies exact.
        std::vector<float> data(n_layers * n * d), shifted(data.size()), scaled(data.size());
        std::vector<float> shift(d);
        for (auto& s : shift) s = static_cast<float>(static_cast<int>(rng() % 41) - 20);
        for (std::size_t i = 0; i < data.size(); ++i) {
            data[i] = static_cast<float>(static_cast<int>(rng() % 1025) - 512) / 64.0f;
            shifted[i] = data[i] + shift[i % d];
            scaled[i] = data[i] * -2.5f;
        }
        std::vector<std::string> ids;
        for (std::size_t i = 0; i < n; ++i) ids.push_back("q" + std::to_string(i));
        const ActivationTensor base("m", n_layers, n, d, ids, data);
        const auto p0 = centroid_profile(base, labels, 6);
        const auto p1 = centroid_profile(ActivationTensor("m", n_layers, n, d, ids, shifted), labels, 6);
        const auto p2 = centroid_profile(ActivationTensor("m", n_layers, n, d, ids, scaled), labels, 6);

        for (std::size_t l = 0; l < n_layers; ++l) {
            const auto cs = class_centroids(layer_slice(base, l), labels, 6);
            std::vector<std::vector<long double>> mu(6, std::vector<long double>(d, 0.0L));
            std::vector<int> count(6, 0);
            for (std::size_t i = 0; i < n; ++i) {
                ++count[labels[i]];
                for (std::size_t j = 0; j < d; ++j) mu[labels[i]][j] += data[(l * n + i) * d + j];
            }
            for (int c = 0; c < 6; ++c) {
                for (std::size_t j = 0; j < d; ++j) {
                    mu[c][j] /= count[c];
                    const double ref = static_cast<double>(mu[c][j]);
                    worst_centroid = std::max(worst_centroid,
                                              std::fabs(cs.centroids(c, j) - ref) / std::max(1.0, std::fabs(ref)));
                }
            }
            for (int c = 0; c < 5; ++c) {
                long double ss = 0.0L;
                for (std::size_t j = 0; j < d; ++j) ss += (mu[c + 1][j] - mu[c][j]) * (mu[c + 1][j] - mu[c][j]);
                const double ref = static_cast<double>(std::sqrt(ss));
                const double denom = std::max(ref, 1e-300);
                if (ref == 0.0) {
                    worst_dist = std::max(worst_dist, std::fabs(p0.per_layer[l][c]));
                } else {
                    worst_dist = std::max(worst_dist, std::fabs(p0.per_layer[l][c] - ref) / denom);
                    worst_translate = std::max(worst_translate, std::fabs(p1.per_layer[l][c] - ref) / denom);
                    worst_scale = std::max(worst_scale, std::fabs(p2.per_layer[l][c] - 2.5 * ref) / (2.5 * denom));
                }
            }
        }
    }
    const bool ok = worst_centroid <= 1e-9 && worst_dist <= 1e-9 && worst_translate <= 1e-9 && worst_scale <= 1e-9;
    return check(ok, "centroid " + fmt("%.2g", worst_centroid) + ", distance " + fmt("%.2g", worst_dist) +
                         ", translation " + fmt("%.2g", worst_translate) + ", scaling " + fmt("%.2g", worst_scale));
}

template <class E>
bool rejects_with(const std::vector<std::uint8_t>& bytes) {
    try {
        decode_tensor(bytes);
    } catch (const E&) {
        return true;
    } catch (...) {
        return false;
    }
    return false;
}

Outcome format_round_trip() {
    bt::TempDir dir("acceptance_format");
    std::mt19937_64 rng(4242);
    int exact = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n_layers = 1 + rng() % 6, n = 1 + rng() % 20, d = 1 + rng() % 32;
        std::vector<float> data(n_layers * n * d);
        for (auto& v : data) {
            do {
                const auto bits = static_cast<std::uint32_t>(rng());
                std::memcpy(&v, &bits, sizeof v);
            } while (!std::isfinite(v));
        }
        std::vector<std::string> ids;
        for (std::size_t i = 0; i < n; ++i) ids.push_back("sample-" + std::to_string(trial) + "-" + std::to_string(i));
        const ActivationTensor t("model/" + std::to_string(trial), n_layers, n, d, ids, data);
        const auto path = dir / ("t" + std::to_string(trial) + ".actv");
        write_tensor(t, path);
        const auto back = read_tensor(path);
        if (back == t && back.model_id() == t.model_id() && back.sample_ids() == t.sample_ids() &&
            std::memcmp(back.data().data(), data.data(), data.size() * sizeof(float)) == 0) {
            ++exact;
        }
    }

    const auto labels = bt::round_robin_labels(2, 6);
    const auto good = encode_tensor(bt::planted_tensor(labels, 2, 1, 4, 1.0, 1));
    int rejected = 0, cases = 0;
    auto expect = [&](bool r) {
        ++cases;
        rejected += r;
    };
    {
        auto b = good;
        b.resize(b.size() - 3);
        expect(rejects_with<FormatError>(b));
    }
    {
        auto b = good;
        b.resize(10);
        expect(rejects_with<FormatError>(b));
    }
    {
        auto b = good;
        b[0] = 'X';
        expect(rejects_with<FormatError>(b));
    }
    {
        auto b = good;
        b[4] = 2;
        expect(rejects_with<UnsupportedVersionError>(b));
    }
    {
        auto b = good;
        b.push_back(0);
        expect(rejects_with<FormatError>(b));
    }
    {
        auto b = good;
        const float nan = std::numeric_limits<float>::quiet_NaN();
        std::memcpy(b.data() + b.size() - sizeof(float), &nan, sizeof nan);
        expect(rejects_with<FormatError>(b));
    }
    return check(exact == 100 && rejected == cases, std::to_string(exact) + "/100 bit-exact, " +
                                                        std::to_string(rejected) + "/" + std::to_string(cases) +
                                                        " corruptions rejected with the right error");
}

Outcome tfidf_oracle() {
    double worst = 0.0;
    auto cmp = [&](double got, double want) { worst = std::max(worst, std::fabs(got - want)); };

    const auto two = fit_tfidf({"a a b", "a c"});
    cmp(two.idf()[two.vocabulary().at("a")], 1.0);
    cmp(two.idf()[two.vocabulary().at("b")], std::log(1.5) + 1.0);
    cmp(two.idf()[two.vocabulary().at("c")], std::log(1.5) + 1.0);

    const std::vector<std::string> docs = {"a a b", "a c", "d"};
    const auto m = fit_tfidf(docs);
    const double ia = std::log(4.0 / 3.0) + 1.0, io = std::log(2.0) + 1.0;
    const double n0 = std::sqrt(4.0 * ia * ia + io * io), n1 = std::sqrt(ia * ia + io * io);
    const double expected[3][4] = {{2 * ia / n0, io / n0, 0, 0}, {ia / n1, 0, io / n1, 0}, {0, 0, 0, 1}};
    const auto x = m.transform(docs);
    if (x.rows() != 3 || x.cols() != 4) return fail("unexpected matrix shape");
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 4; ++j) cmp(x(i, j), expected[i][j]);
    cmp(m.idf()[0], ia);
    for (int j = 1; j < 4; ++j) cmp(m.idf()[j], io);

    const auto single = fit_tfidf({"x"});
    cmp(single.transform({"x"})(0, 0), 1.0);
    cmp(single.transform({"y x"})(0, 0), 1.0);
    return check(worst <= 1e-9, "max abs error " + fmt("%.3g", worst));
}

std::map<std::string, std::string> read_tree(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (!e.is_regular_file()) continue;
        const auto rel = fs::relative(e.path(), root).generic_string();
        if (e.path().filename() == "manifest.json") continue;
        std::ifstream in(e.path(), std::ios::binary);
        std::ostringstream s;
        s << in.rdbuf();
        files[rel] = s.str();
    }
    return files;
}

Outcome determinism() {
    bt::TempDir dir("acceptance_determinism");
    const auto labels = bt::round_robin_labels(20, 6);
    bt::write_corpus_jsonl(dir / "corpus.jsonl", bt::cue_corpus(labels));
    write_tensor(bt::planted_tensor(labels, 6, 2, 12, 5.0, 3, "model-a"), dir / "a.actv");
    write_tensor(bt::planted_tensor(labels, 5, 1, 10, 4.0, 4, "model-b"), dir / "b.actv");
    write_tensor(bt::planted_tensor(labels, 1, 0, 8, 3.0, 5, "embedder"), dir / "emb.actv");

    std::vector<RunManifest> manifests;
    for (const char* name : {"run1", "run2"}) {
        const ConfigValues v = {{"corpus", (dir / "corpus.jsonl").string()},
                                {"tensors", (dir / "a.actv").string() + "," + (dir / "b.actv").string()},
                                {"out", (dir / name).string()},
                                {"commands", "length,scan,geometry,baseline,report"},
                                {"save_probes", "true"}};
        manifests.push_back(run_pipeline(parse_config(v)));
        if (manifests.back().exit_code() != 0) return fail(std::string(name) + " did not succeed");
        auto emb = v;
        emb["commands"] = "baseline";
        emb["features"] = "embeddings";
        emb["embeddings"] = (dir / "emb.actv").string();
        emb["out"] = (dir / name / "emb").string();
        if (run_pipeline(parse_config(emb)).exit_code() != 0) return fail("embedding baseline failed");
    }
    const auto a = read_tree(dir / "run1"), b = read_tree(dir / "run2");
    bool same = a == b && manifests[0].outputs.size() == manifests[1].outputs.size();
    for (std::size_t i = 0; same && i < manifests[0].outputs.size(); ++i) {
        same = manifests[0].outputs[i].path == manifests[1].outputs[i].path &&
               manifests[0].outputs[i].sha256 == manifests[1].outputs[i].sha256;
    }
    return check(same, std::to_string(a.size()) + " output files compared");
}

// ---------------------------------------------------------------------------
// Full-scale reproduction on real data.

Outcome full_baselines() {
    const char* corpus_path = env("BLOOMPROBE_CORPUS");
    if (!corpus_path) return skip("set BLOOMPROBE_CORPUS (and BLOOMPROBE_EMBEDDINGS) to run");
    const auto corpus = load_corpus(corpus_path);
    const auto split = stratified_split(corpus.labels(), 0.8, 42);
    const auto tfidf = run_text_baseline(corpus, TfidfFeatures{}, split, TrainConfig{});
    bool ok = std::fabs(tfidf.accuracy - 0.73) <= 0.07;
    std::string detail = "tfidf " + fmt("%.4f", tfidf.accuracy);
    if (const char* emb = env("BLOOMPROBE_EMBEDDINGS")) {
        const auto e = run_text_baseline(corpus, EmbeddingFeatures{emb}, split, TrainConfig{});
        ok = ok && std::fabs(e.accuracy - 0.61) <= 0.07;
        detail += ", embeddings " + fmt("%.4f", e.accuracy);
    } else {
        ok = false;
        detail += ", embeddings not supplied";
    }
    return check(ok, detail);
}

std::vector<ScanReport> full_scans() {
    static std::vector<ScanReport> cache;
    static bool done = false;
    if (done) return cache;
    done = true;
    const auto corpus = load_corpus(env("BLOOMPROBE_CORPUS"));
    const auto split = stratified_split(corpus.labels(), 0.8, 42);
    for (const auto& p : split_commas(env("BLOOMPROBE_TENSORS"))) {
        cache.push_back(scan_layers(read_tensor(p), corpus, split, TrainConfig{}, 0.9));
    }
    return cache;
}

Outcome full_probe_accuracy() {
    if (!env("BLOOMPROBE_CORPUS") || !env("BLOOMPROBE_TENSORS"))
        return skip("set BLOOMPROBE_CORPUS and BLOOMPROBE_TENSORS to run");
    bool ok = true;
    std::string detail;
    for (const auto& r : full_scans()) {
        for (std::size_t l = 5; l < r.layer_results.size(); ++l) ok = ok && r.layer_results[l].eval.accuracy >= 0.90;
        const auto past = r.mean_accuracy_past_cso();
        ok = ok && r.cso_layer && *r.cso_layer <= 8 && past && std::fabs(*past - 0.95) <= 0.03;
        detail += (detail.empty() ? "" : "; ") + r.model_id + " cso " +
                  (r.cso_layer ? std::to_string(*r.cso_layer) : "none") +
                  (past ? " mean past cso " + fmt("%.4f", *past) : "");
    }
    return check(ok, detail);
}

Outcome full_error_distance() {
    if (!env("BLOOMPROBE_CORPUS") || !env("BLOOMPROBE_TENSORS"))
        return skip("set BLOOMPROBE_CORPUS and BLOOMPROBE_TENSORS to run");
    bool ok = true;
    std::string detail;
    for (const auto& r : full_scans()) {
        if (!r.cso_layer) {
            ok = false;
            detail += (detail.empty() ? "" : "; ") + r.model_id + " has no cso";
            continue;
        }
        const double m = r.layer_results[*r.cso_layer].eval.err_dist_mean_over_errors;
        ok = ok && m >= 0.9 && m <= 1.5;
        detail += (detail.empty() ? "" : "; ") + r.model_id + " " + fmt("%.3f", m);
    }
    return check(ok, detail);
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<Outcome()> run;
        double budget_seconds;  // 0 means no runtime bound
    };
    const std::vector<Criterion> criteria = {
        {"gradient oracle", gradient_oracle, 5.0},
        {"optimizer oracle", optimizer_oracle, 10.0},
        {"separable clusters", separable_clusters, 0.0},
        {"planted change-point", planted_cso, 30.0},
        {"evaluation oracle", evaluation_oracle, 0.0},
        {"geometry oracle", geometry_oracle, 0.0},
        {"format round-trip", format_round_trip, 0.0},
        {"tf-idf oracle", tfidf_oracle, 0.0},
        {"pipeline determinism", determinism, 0.0},
        {"full-scale text baselines", full_baselines, 0.0},
        {"full-scale probe accuracy", full_probe_accuracy, 0.0},
        {"full-scale error distance", full_error_distance, 0.0},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = fail(std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (o.status == Status::Pass && c.budget_seconds > 0 && secs > c.budget_seconds) {
            o = fail(o.detail + ", over the " + fmt("%.0f", c.budget_seconds) + " s budget");
        }
        const char* tag = o.status == Status::Pass ? "PASS" : o.status == Status::Fail ? "FAIL" : "SKIP";
        if (o.status == Status::Fail) ++failures;
        std::printf("%s  %-28s %s (%.2f s)\n", tag, c.name, o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%d failure(s)\n", failures);
    return failures == 0 ? 0 : 1;
}
