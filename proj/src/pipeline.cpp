// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The bloomprobe Authors

#include "bloomprobe/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <optional>
#include <set>
#include <sstream>

#include <openssl/evp.h>

#include "bloomprobe/activation_store.hpp"
#include "bloomprobe/baselines.hpp"
#include "bloomprobe/corpus.hpp"
#include "bloomprobe/error.hpp"
#include "bloomprobe/evaluation.hpp"
#include "bloomprobe/geometry.hpp"
#include "bloomprobe/layerscan.hpp"

#ifndef BLOOMPROBE_VERSION
#define BLOOMPROBE_VERSION "0.0.0"
#endif

namespace bloomprobe {

namespace fs = std::filesystem;

namespace {

constexpr const char* kPartial = ".partial";

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto comma = s.find(',', start);
        auto item = trim(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (!item.empty()) out.push_back(std::move(item));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': '" + value + "' is not a number");
    }
}

template <class Int>
Int parse_int(const std::string& key, const std::string& value) {
    Int v{};
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (value.empty() || ec != std::errc() || ptr != value.data() + value.size()) {
        throw ConfigError("config key '" + key + "': '" + value + "' is not an integer");
    }
    return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
    if (value == "false" || value == "0" || value == "no" || value == "off") return false;
    throw ConfigError("config key '" + key + "': '" + value + "' is not a boolean");
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Stages a command's files as `<name>.partial` and renames them on commit.
class CommandOutputs {
public:
    CommandOutputs(fs::path root, std::string command) : root_(std::move(root)), command_(std::move(command)) {}

    void write(const std::string& relative, const std::string& content) {
        const fs::path target = root_ / relative;
        fs::create_directories(target.parent_path());
        const fs::path staged = target.string() + kPartial;
        std::ofstream out(staged, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write " + staged.string());
        staged_.push_back(relative);
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw DataError("failed writing " + staged.string());
        out.close();
        // A stale final file from an earlier run must not survive next to the new partial one.
        std::error_code ec;
        fs::remove(target, ec);
    }

    std::vector<OutputRecord> commit() {
        std::vector<OutputRecord> records;
        for (const auto& relative : staged_) {
            const fs::path target = root_ / relative;
            fs::rename(target.string() + kPartial, target);
            OutputRecord rec;
            rec.command = command_;
            rec.path = fs::path(relative).generic_string();
            rec.sha256 = sha256_file(target);
            rec.bytes = fs::file_size(target);
            records.push_back(std::move(rec));
        }
        staged_.clear();
        return records;
    }

    // Staged files of a failed command stay on disk under their `.partial` name.
    std::vector<OutputRecord> abandon() {
        std::vector<OutputRecord> records;
        for (const auto& relative : staged_) {
            const fs::path staged = (root_ / relative).string() + kPartial;
            std::error_code ec;
            if (!fs::is_regular_file(staged, ec)) continue;
            OutputRecord rec;
            rec.command = command_;
            rec.path = fs::path(relative).generic_string() + kPartial;
            rec.sha256 = sha256_file(staged);
            rec.bytes = fs::file_size(staged);
            rec.partial = true;
            records.push_back(std::move(rec));
        }
        staged_.clear();
        return records;
    }

private:
    fs::path root_;
    std::string command_;
    std::vector<std::string> staged_;
};

std::string layer_file(std::size_t layer, const char* ext) {
    std::ostringstream name;
    name << "layer_" << std::setw(3) << std::setfill('0') << layer << ext;
    return name.str();
}

std::string format_double(double v) {
    std::ostringstream out;
    out.precision(17);
    out << v;
    return out.str();
}

std::string json_number_or_empty(const Json& j) {
    if (j.is_null()) return "";
    if (j.is_number_integer() || j.is_number_unsigned()) return std::to_string(j.get<long long>());
    return format_double(j.get<double>());
}

// One row of the cross-model comparison, read from a scan_report.json object.
Json comparison_row(const Json& scan) {
    Json row{{"model_id", scan.at("model_id")},
             {"n_layers", scan.at("n_layers")},
             {"tau", scan.at("tau")},
             {"cso_layer", scan.at("cso_layer")},
             {"accuracy_at_cso", scan.at("accuracy_at_cso")},
             {"mean_accuracy_past_cso", scan.at("mean_accuracy_past_cso")},
             {"mean_accuracy_all_layers", scan.at("mean_accuracy_all_layers")},
             {"best_layer", scan.at("best_layer")},
             {"per_level_layer", scan.at("per_level_layer")},
             {"per_level_source", scan.at("per_level_source")},
             {"per_level_accuracy", scan.at("per_level_accuracy")}};
    const auto& layers = scan.at("layers");
    const auto best = scan.at("best_layer").get<std::size_t>();
    const auto at = scan.at("per_level_layer").get<std::size_t>();
    row["best_accuracy"] = layers.at(best).at("test").at("accuracy");
    row["err_dist_mean_over_errors_at_level_layer"] = layers.at(at).at("test").at("err_dist_mean_over_errors");
    return row;
}

// Baseline errors are expected to land farther from the true level than the
// probe's; the comparison is only made when both used the same split.
Json baseline_rows(const std::vector<Json>& baselines, const std::vector<Json>& scans) {
    Json rows = Json::array();
    try {
        for (const auto& b : baselines) {
            Json row{{"features", b.at("features")},
                     {"accuracy", b.at("accuracy")},
                     {"err_dist_mean_over_errors", b.at("err_dist_mean_over_errors")},
                     {"split_seed", b.value("split_seed", Json(nullptr))},
                     {"ratio", b.value("ratio", Json(nullptr))}};
            Json versus = Json::object();
            for (const auto& scan : scans) {
                if (scan.value("split_seed", Json(nullptr)) != row["split_seed"] ||
                    scan.value("ratio", Json(nullptr)) != row["ratio"]) {
                    continue;
                }
                const auto at = scan.at("per_level_layer").get<std::size_t>();
                const double probe = scan.at("layers").at(at).at("test").at("err_dist_mean_over_errors").get<double>();
                versus[scan.at("model_id").get<std::string>()] =
                    row["err_dist_mean_over_errors"].get<double>() >= probe;
            }
            row["err_dist_ge_probe"] = std::move(versus);
            rows.push_back(std::move(row));
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("report: malformed baseline report: ") + e.what());
    }
    return rows;
}

}  // namespace

std::string_view toolkit_version() { return BLOOMPROBE_VERSION; }

std::string_view to_string(Command command) {
    switch (command) {
        case Command::Length: return "length";
        case Command::Scan: return "scan";
        case Command::Geometry: return "geometry";
        case Command::Baseline: return "baseline";
        case Command::Report: return "report";
    }
    return "?";
}

Command command_from_string(std::string_view name) {
    for (auto c : {Command::Length, Command::Scan, Command::Geometry, Command::Baseline, Command::Report}) {
        if (to_string(c) == name) return c;
    }
    throw ConfigError("unknown command '" + std::string(name) + "'");
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return 1;
    if (dynamic_cast<const DataError*>(&e)) return 2;
    return 3;
}

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 computation failed");
    }
    std::ostringstream out;
    out << std::hex << std::setfill('0');
    for (unsigned i = 0; i < len; ++i) out << std::setw(2) << static_cast<int>(digest[i]);
    return out.str();
}

std::string sha256_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return sha256_hex(bytes);
}

std::string sanitize_name(std::string_view name) {
    std::string out;
    for (char c : name) {
        const bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                          c == '_' || c == '.';
        out.push_back(keep ? c : '_');
    }
    if (out.empty() || out == "." || out == "..") out = "model";
    return out;
}

ConfigValues parse_config_text(std::string_view text) {
    ConfigValues values;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto nl = text.find('\n', start);
        auto line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
        ++line_no;
        start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        auto key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        values[key] = trim(line.substr(eq + 1));
    }
    return values;
}

RunConfig parse_config(const ConfigValues& file_values, const ConfigValues& overrides) {
    ConfigValues merged = file_values;
    for (const auto& [k, v] : overrides) merged[k] = v;

    RunConfig cfg;
    for (const auto& [key, value] : merged) {
        if (key == "corpus") cfg.corpus_path = value;
        else if (key == "tensors" || key == "tensor") cfg.tensor_paths = split_list(value);
        else if (key == "features") cfg.features = value;
        else if (key == "embeddings") cfg.embeddings_path = value;
        else if (key == "report_inputs" || key == "in") cfg.report_inputs = split_list(value);
        else if (key == "tau") cfg.tau = parse_double(key, value);
        else if (key == "ratio") cfg.ratio = parse_double(key, value);
        else if (key == "seed") cfg.split_seed = parse_int<std::uint64_t>(key, value);
        else if (key == "lambda") cfg.train.lambda = parse_double(key, value);
        else if (key == "max_iters") cfg.train.max_iters = parse_int<int>(key, value);
        else if (key == "grad_tol") cfg.train.grad_tol = parse_double(key, value);
        else if (key == "alpha") cfg.alpha = parse_double(key, value);
        else if (key == "out") cfg.out_dir = value;
        else if (key == "commands") {
            for (const auto& name : split_list(value)) cfg.commands.push_back(command_from_string(name));
        } else if (key == "save_probes") cfg.save_probes = parse_bool(key, value);
        else if (key == "threads") cfg.threads = parse_int<unsigned>(key, value);
        else throw ConfigError("unknown config key '" + key + "'");
    }
    cfg.train.seed = cfg.split_seed;
    cfg.validate();
    return cfg;
}

RunConfig parse_config(const fs::path& file, const ConfigValues& overrides) {
    return parse_config(parse_config_text(read_text(file)), overrides);
}

void RunConfig::validate() const {
    if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("config key 'tau' must lie in (0, 1]");
    if (!(ratio > 0.0 && ratio < 1.0)) throw ConfigError("config key 'ratio' must lie in (0, 1)");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("config key 'alpha' must lie in (0, 1)");
    try {
        train.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("training config: ") + e.what());
    }
    if (out_dir.empty()) throw ConfigError("missing required config key 'out'");
    if (commands.empty()) throw ConfigError("missing required config key 'commands'");

    auto wants = [&](Command c) { return std::find(commands.begin(), commands.end(), c) != commands.end(); };
    auto require_file = [](const std::string& key, const std::string& path) {
        if (path.empty()) throw ConfigError("missing required config key '" + key + "'");
        if (!fs::exists(path)) throw ConfigError("config key '" + key + "': path does not exist: " + path);
    };

    if (wants(Command::Length) || wants(Command::Scan) || wants(Command::Geometry) || wants(Command::Baseline)) {
        require_file("corpus", corpus_path);
    }
    if (wants(Command::Scan) || wants(Command::Geometry)) {
        if (tensor_paths.empty()) throw ConfigError("missing required config key 'tensors'");
        for (const auto& p : tensor_paths) require_file("tensors", p);
    }
    if (wants(Command::Baseline)) {
        if (features != "tfidf" && features != "embeddings") {
            throw ConfigError("config key 'features' must be 'tfidf' or 'embeddings'");
        }
        if (features == "embeddings") require_file("embeddings", embeddings_path);
    }
    if (wants(Command::Report)) {
        if (report_inputs.empty() && !wants(Command::Scan)) {
            throw ConfigError("missing required config key 'report_inputs' (or run 'scan' in the same run)");
        }
        for (const auto& p : report_inputs) require_file("report_inputs", p);
    }
}

Json RunConfig::to_json() const {
    Json cmds = Json::array();
    for (auto c : commands) cmds.push_back(std::string(bloomprobe::to_string(c)));
    return Json{{"corpus", corpus_path},
                {"tensors", tensor_paths},
                {"features", features},
                {"embeddings", embeddings_path},
                {"report_inputs", report_inputs},
                {"tau", tau},
                {"ratio", ratio},
                {"seed", split_seed},
                {"train", bloomprobe::to_json(train)},
                {"alpha", alpha},
                {"out", out_dir},
                {"commands", cmds},
                {"save_probes", save_probes}};
}

int RunManifest::exit_code() const {
    for (const auto& c : commands) {
        if (!c.ok) return c.exit_code;
    }
    return 0;
}

Json RunManifest::to_json() const {
    Json cmds = Json::array();
    for (const auto& c : commands) {
        cmds.push_back({{"command", c.command},
                        {"target", c.target},
                        {"status", c.ok ? "ok" : "failed"},
                        {"error", c.error},
                        {"exit_code", c.exit_code},
                        {"seconds", c.seconds}});
    }
    Json outs = Json::array();
    for (const auto& o : outputs) {
        outs.push_back({{"command", o.command},
                        {"path", o.path},
                        {"sha256", o.sha256},
                        {"bytes", o.bytes},
                        {"partial", o.partial}});
    }
    return Json{{"toolkit_version", toolkit_version},
                {"config", config},
                {"commands", cmds},
                {"outputs", outs},
                {"inputs", input_digests}};
}

RunManifest run_pipeline(const RunConfig& config) {
    config.validate();
    const fs::path root(config.out_dir);
    fs::create_directories(root);

    RunManifest manifest;
    manifest.toolkit_version = std::string(toolkit_version());
    manifest.config = config.to_json();

    auto digest_input = [&](const std::string& path) {
        if (!path.empty() && fs::is_regular_file(path)) manifest.input_digests[path] = sha256_file(path);
    };
    digest_input(config.corpus_path);
    for (const auto& p : config.tensor_paths) digest_input(p);
    if (config.features == "embeddings") digest_input(config.embeddings_path);

    std::set<Command> requested(config.commands.begin(), config.commands.end());
    std::optional<Corpus> corpus;
    std::optional<SplitIndices> split;
    std::vector<Json> scan_reports;
    std::vector<Json> baseline_reports;

    // Runs one unit of work, staging its outputs and recording the outcome.
    auto run = [&](Command command, const std::string& target, auto&& body) {
        CommandStatus status;
        status.command = std::string(to_string(command));
        status.target = target;
        CommandOutputs outputs(root, status.command);
        const auto t0 = std::chrono::steady_clock::now();
        try {
            body(outputs);
            auto records = outputs.commit();
            manifest.outputs.insert(manifest.outputs.end(), records.begin(), records.end());
        } catch (const std::exception& e) {
            status.ok = false;
            status.error = e.what();
            status.exit_code = exit_code_for(e);
            auto records = outputs.abandon();
            manifest.outputs.insert(manifest.outputs.end(), records.begin(), records.end());
        }
        status.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        manifest.commands.push_back(std::move(status));
    };

    auto need_corpus = [&]() -> const Corpus& {
        if (!corpus) corpus = load_corpus(config.corpus_path);
        return *corpus;
    };
    auto need_split = [&]() -> const SplitIndices& {
        if (!split) split = stratified_split(need_corpus().labels(), config.ratio, config.split_seed);
        return *split;
    };

    // Unique per-model directory names, in tensor order.
    std::vector<std::string> model_dirs;
    std::vector<std::optional<ActivationTensor>> tensors(config.tensor_paths.size());
    auto need_tensor = [&](std::size_t i) -> const ActivationTensor& {
        if (!tensors[i]) tensors[i] = read_tensor(config.tensor_paths[i]);
        return *tensors[i];
    };
    auto model_dir = [&](std::size_t i) -> const std::string& {
        while (model_dirs.size() <= i) model_dirs.emplace_back();
        if (model_dirs[i].empty()) {
            auto base = sanitize_name(need_tensor(i).model_id());
            auto name = base;
            for (int n = 2; std::find(model_dirs.begin(), model_dirs.end(), name) != model_dirs.end(); ++n) {
                name = base + "_" + std::to_string(n);
            }
            model_dirs[i] = name;
        }
        return model_dirs[i];
    };

    if (requested.count(Command::Length)) {
        run(Command::Length, "", [&](CommandOutputs& out) {
            out.write("length/length_report.json", dump(to_json(length_analysis(need_corpus(), config.alpha))));
        });
    }

    if (requested.count(Command::Scan)) {
        for (std::size_t i = 0; i < config.tensor_paths.size(); ++i) {
            run(Command::Scan, config.tensor_paths[i], [&](CommandOutputs& out) {
                const auto& tensor = need_tensor(i);
                const auto dir = "scan/" + model_dir(i) + "/";
                ScanOptions options;
                options.threads = config.threads;
                std::vector<std::string> probe_paths(tensor.n_layers());
                if (config.save_probes) {
                    options.on_probe = [&](std::size_t layer, const LinearProbe& probe) {
                        probe_paths[layer] = dir + "probes/" + layer_file(layer, ".json");
                        out.write(probe_paths[layer], dump(probe_to_json(probe, tensor.model_id(), layer)));
                    };
                }
                auto report = scan_layers(tensor, need_corpus(), need_split(), config.train, config.tau, options);
                for (auto& lr : report.layer_results) {
                    if (config.save_probes) lr.probe_path = probe_paths[lr.layer];
                    out.write(dir + "confusion/" + layer_file(lr.layer, ".csv"), lr.eval.confusion.to_csv());
                }
                auto json = to_json(report);
                json["split_seed"] = config.split_seed;
                json["ratio"] = config.ratio;
                out.write(dir + "scan_report.json", dump(json));
                out.write(dir + "accuracy.csv", report.trajectory_csv());
                out.write(dir + "radar.csv", report.radar_csv());
                scan_reports.push_back(std::move(json));
            });
        }
    }

    if (requested.count(Command::Geometry)) {
        for (std::size_t i = 0; i < config.tensor_paths.size(); ++i) {
            run(Command::Geometry, config.tensor_paths[i], [&](CommandOutputs& out) {
                const auto& tensor = need_tensor(i);
                check_alignment(need_corpus().ids(), tensor.sample_ids(), "tensor '" + tensor.model_id() + "'");
                const auto profile = centroid_profile(tensor, need_corpus().labels(), kNumBloomLevels);
                const auto dir = "geometry/" + model_dir(i) + "/";
                out.write(dir + "distance_profile.csv", profile.to_csv());
                auto json = to_json(profile);
                json["model_id"] = tensor.model_id();
                out.write(dir + "distance_profile.json", dump(json));
            });
        }
    }

    if (requested.count(Command::Baseline)) {
        run(Command::Baseline, config.features, [&](CommandOutputs& out) {
            FeatureSource features = TfidfFeatures{};
            if (config.features == "embeddings") features = EmbeddingFeatures{config.embeddings_path};
            const auto report = run_text_baseline(need_corpus(), features, need_split(), config.train);
            auto json = to_json(report);
            json["features"] = config.features;
            json["split_seed"] = config.split_seed;
            json["ratio"] = config.ratio;
            const auto dir = "baseline/" + config.features + "/";
            out.write(dir + "eval_report.json", dump(json));
            out.write(dir + "confusion.csv", report.confusion.to_csv());
            baseline_reports.push_back(std::move(json));
        });
    }

    if (requested.count(Command::Report)) {
        run(Command::Report, "", [&](CommandOutputs& out) {
            std::vector<Json> reports = scan_reports;
            std::vector<Json> baselines = baseline_reports;
            auto load = [&](const fs::path& p) {
                manifest.input_digests[p.generic_string()] = sha256_file(p);
                std::ifstream in(p);
                try {
                    return Json::parse(in);
                } catch (const nlohmann::json::exception& e) {
                    throw DataError("cannot parse " + p.string() + ": " + e.what());
                }
            };
            for (const auto& dir : config.report_inputs) {
                std::vector<fs::path> found;
                std::vector<fs::path> found_baselines;
                if (fs::is_regular_file(dir)) {
                    found.emplace_back(dir);
                } else {
                    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
                        if (!entry.is_regular_file()) continue;
                        if (entry.path().filename() == "scan_report.json") found.push_back(entry.path());
                        if (entry.path().filename() == "eval_report.json" &&
                            entry.path().parent_path().parent_path().filename() == "baseline") {
                            found_baselines.push_back(entry.path());
                        }
                    }
                }
                std::sort(found.begin(), found.end());
                std::sort(found_baselines.begin(), found_baselines.end());
                for (const auto& p : found) reports.push_back(load(p));
                for (const auto& p : found_baselines) baselines.push_back(load(p));
            }
            if (reports.empty()) throw DataError("report: no scan reports found");

            Json rows = Json::array();
            std::ostringstream csv;
            csv << "model_id,n_layers,cso_layer,accuracy_at_cso,mean_accuracy_past_cso,mean_accuracy_all_layers,"
                   "best_layer,best_accuracy,err_dist_mean_over_errors_at_level_layer\n";
            double sum_at_cso = 0.0;
            double sum_past = 0.0;
            int with_cso = 0;
            try {
                for (const auto& scan : reports) {
                    auto row = comparison_row(scan);
                    csv << row["model_id"].get<std::string>() << ',' << row["n_layers"].get<std::size_t>() << ','
                        << json_number_or_empty(row["cso_layer"]) << ',' << json_number_or_empty(row["accuracy_at_cso"])
                        << ',' << json_number_or_empty(row["mean_accuracy_past_cso"]) << ','
                        << json_number_or_empty(row["mean_accuracy_all_layers"]) << ','
                        << row["best_layer"].get<std::size_t>() << ',' << json_number_or_empty(row["best_accuracy"])
                        << ',' << json_number_or_empty(row["err_dist_mean_over_errors_at_level_layer"]) << '\n';
                    if (!row["cso_layer"].is_null()) {
                        sum_at_cso += row["accuracy_at_cso"].get<double>();
                        sum_past += row["mean_accuracy_past_cso"].get<double>();
                        ++with_cso;
                    }
                    rows.push_back(std::move(row));
                }
            } catch (const nlohmann::json::exception& e) {
                throw DataError(std::string("report: malformed scan report: ") + e.what());
            }
            Json summary{{"models", rows}, {"n_models", rows.size()}, {"n_models_with_cso", with_cso}};
            summary["mean_accuracy_at_cso_over_models"] = with_cso ? Json(sum_at_cso / with_cso) : Json(nullptr);
            summary["mean_accuracy_past_cso_over_models"] = with_cso ? Json(sum_past / with_cso) : Json(nullptr);
            summary["baselines"] = baseline_rows(baselines, reports);
            out.write("report/comparison.csv", csv.str());
            out.write("report/comparison.json", dump(summary));
        });
    }

    std::ofstream(root / "manifest.json", std::ios::binary | std::ios::trunc) << dump(manifest.to_json());
    return manifest;
}

}  // namespace bloomprobe
