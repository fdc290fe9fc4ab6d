// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The bloomprobe Authors

// Command-line front end: every subcommand is turned into a RunConfig and
// executed through run_pipeline, so ad-hoc invocations and config-file runs
// produce the same layout and manifest.

#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bloomprobe/error.hpp"
#include "bloomprobe/pipeline.hpp"

namespace {

using bloomprobe::ConfigValues;

std::string num(double v) {
    std::ostringstream s;
    s << std::setprecision(17) << v;
    return s.str();
}

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) {
        if (!out.empty()) out += ',';
        out += s;
    }
    return out;
}

struct Common {
    std::string out;
    std::optional<double> tau;
    std::optional<std::uint64_t> seed;
    std::optional<double> ratio;
    std::optional<double> lambda;
    std::optional<int> max_iters;
    std::optional<double> grad_tol;
    std::optional<unsigned> threads;

    void add_to(CLI::App* app, bool out_required = true) {
        auto* o = app->add_option("--out", out, "Output directory");
        if (out_required) o->required();
        app->add_option("--tau", tau, "CSO accuracy threshold (default 0.90)");
        app->add_option("--seed", seed, "Split seed (default 42)");
        app->add_option("--ratio", ratio, "Train fraction of the stratified split (default 0.8)");
        app->add_option("--lambda", lambda, "L2 strength of the probe (default 1.0)");
        app->add_option("--max-iters", max_iters, "Gradient descent iteration cap (default 1000)");
        app->add_option("--grad-tol", grad_tol, "Gradient-norm stopping tolerance (default 1e-6)");
        app->add_option("--threads", threads, "Worker threads for per-layer training (0 = all cores)");
    }

    void fill(ConfigValues& v) const {
        if (!out.empty()) v["out"] = out;
        if (tau) v["tau"] = num(*tau);
        if (seed) v["seed"] = std::to_string(*seed);
        if (ratio) v["ratio"] = num(*ratio);
        if (lambda) v["lambda"] = num(*lambda);
        if (max_iters) v["max_iters"] = std::to_string(*max_iters);
        if (grad_tol) v["grad_tol"] = num(*grad_tol);
        if (threads) v["threads"] = std::to_string(*threads);
    }
};

int report_outcome(const bloomprobe::RunManifest& manifest) {
    for (const auto& c : manifest.commands) {
        std::cout << c.command;
        if (!c.target.empty()) std::cout << " [" << c.target << "]";
        if (c.ok) {
            std::cout << ": ok (" << c.seconds << " s)\n";
        } else {
            std::cout << ": FAILED: " << c.error << '\n';
        }
    }
    std::cout << manifest.outputs.size() << " file(s) written\n";
    return manifest.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Layer-wise linear probing of Bloom-level structure in LLM activations"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(bloomprobe::toolkit_version()));

    ConfigValues values;
    Common common;

    std::string corpus;
    std::vector<std::string> tensors;
    auto* scan = app.add_subcommand("scan", "Train one probe per layer, detect the CSO layer");
    scan->add_option("--corpus", corpus, "Corpus file (.jsonl or .csv)")->required();
    scan->add_option("--tensor", tensors, "ACTV1 activation file (repeatable)")->required();
    bool save_probes = false;
    scan->add_flag("--save-probes", save_probes, "Also write every layer's probe as JSON");
    common.add_to(scan);

    auto* geometry = app.add_subcommand("geometry", "Adjacent class-centroid distances per layer");
    geometry->add_option("--corpus", corpus, "Corpus file")->required();
    geometry->add_option("--tensor", tensors, "ACTV1 activation file (repeatable)")->required();
    common.add_to(geometry);

    std::string features = "tfidf";
    std::string embeddings;
    auto* baseline = app.add_subcommand("baseline", "TF-IDF or sentence-embedding control classifier");
    baseline->add_option("--corpus", corpus, "Corpus file")->required();
    baseline->add_option("--features", features, "tfidf | embeddings")->check(CLI::IsMember({"tfidf", "embeddings"}));
    baseline->add_option("--embeddings", embeddings, "Single-layer ACTV1 embedding file");
    common.add_to(baseline);

    double alpha = 0.05;
    auto* length = app.add_subcommand("length", "Question-length confound analysis");
    length->add_option("--corpus", corpus, "Corpus file")->required();
    length->add_option("--alpha", alpha, "Family-wise significance level (default 0.05)");
    common.add_to(length);

    std::vector<std::string> inputs;
    auto* report = app.add_subcommand("report", "Merge scan outputs into a cross-model comparison");
    report->add_option("--in", inputs, "Directories holding scan_report.json files")->required();
    common.add_to(report);

    std::string config_file;
    std::vector<std::string> sets;
    auto* run = app.add_subcommand("run", "Run the commands listed in a key = value config file");
    run->add_option("--config", config_file, "Config file")->required()->check(CLI::ExistingFile);
    run->add_option("--set", sets, "Override a config key, key=value (repeatable)");
    common.add_to(run, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        common.fill(values);
        bloomprobe::RunConfig config;
        if (*scan) {
            values["commands"] = "scan";
            values["corpus"] = corpus;
            values["tensors"] = join(tensors);
            if (save_probes) values["save_probes"] = "true";
        } else if (*geometry) {
            values["commands"] = "geometry";
            values["corpus"] = corpus;
            values["tensors"] = join(tensors);
        } else if (*baseline) {
            values["commands"] = "baseline";
            values["corpus"] = corpus;
            values["features"] = features;
            if (!embeddings.empty()) values["embeddings"] = embeddings;
        } else if (*length) {
            values["commands"] = "length";
            values["corpus"] = corpus;
            values["alpha"] = num(alpha);
        } else if (*report) {
            values["commands"] = "report";
            values["report_inputs"] = join(inputs);
        }

        if (*run) {
            for (const auto& s : sets) {
                const auto eq = s.find('=');
                if (eq == std::string::npos) throw bloomprobe::ConfigError("--set expects key=value, got '" + s + "'");
                values[s.substr(0, eq)] = s.substr(eq + 1);
            }
            config = bloomprobe::parse_config(std::filesystem::path(config_file), values);
        } else {
            config = bloomprobe::parse_config(ConfigValues{}, values);
        }
        return report_outcome(bloomprobe::run_pipeline(config));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return bloomprobe::exit_code_for(e);
    }
}
