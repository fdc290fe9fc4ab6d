// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The bloomprobe Authors

#pragma once

#include <cstdint>
#include <exception>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bloomprobe/json_io.hpp"
#include "bloomprobe/probe.hpp"

namespace bloomprobe {

enum class Command { Length, Scan, Geometry, Baseline, Report };

std::string_view to_string(Command command);
/// Throws ConfigError for unknown names.
Command command_from_string(std::string_view name);

struct RunConfig {
    std::string corpus_path;
    std::vector<std::string> tensor_paths;
    std::string features = "tfidf";  ///< baseline features: tfidf | embeddings
    std::string embeddings_path;
    std::vector<std::string> report_inputs;  ///< directories searched for scan_report.json
    double tau = 0.90;
    double ratio = 0.8;
    std::uint64_t split_seed = 42;
    TrainConfig train;
    double alpha = 0.05;
    std::string out_dir;
    std::vector<Command> commands;
    bool save_probes = false;
    unsigned threads = 0;

    /// Range checks, required keys for the requested commands, and input
    /// paths that must exist. Throws ConfigError naming the offending key.
    void validate() const;
    Json to_json() const;
};

using ConfigValues = std::map<std::string, std::string>;

/// Flat `key = value` lines; `#` starts a comment, blank lines are skipped.
ConfigValues parse_config_text(std::string_view text);

/// Applies file values, then overrides (flags win), then defaults, then validate().
RunConfig parse_config(const ConfigValues& file_values, const ConfigValues& overrides = {});
RunConfig parse_config(const std::filesystem::path& file, const ConfigValues& overrides = {});

struct OutputRecord {
    std::string command;
    std::string path;  ///< relative to the output directory, '/'-separated
    std::string sha256;
    std::uintmax_t bytes = 0;
    bool partial = false;  ///< left behind by a failed command, path ends in `.partial`
};

struct CommandStatus {
    std::string command;
    std::string target;  ///< model id or feature kind, empty for global commands
    bool ok = true;
    std::string error;
    int exit_code = 0;
    double seconds = 0.0;
};

struct RunManifest {
    std::string toolkit_version;
    Json config;
    std::vector<CommandStatus> commands;
    std::vector<OutputRecord> outputs;
    std::map<std::string, std::string> input_digests;

    /// 0 when every command succeeded, else the first failing command's code.
    int exit_code() const;
    Json to_json() const;
};

/// Runs the requested commands in dependency order (length, scan, geometry,
/// baseline, report) and writes `<out>/manifest.json`. A failing command
/// leaves its files with a `.partial` suffix and does not stop unrelated
/// commands.
RunManifest run_pipeline(const RunConfig& config);

/// 1 for ConfigError, 2 for DataError, 3 for anything else.
int exit_code_for(const std::exception& e);

std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_file(const std::filesystem::path& path);

/// File-system safe directory name for a model id.
std::string sanitize_name(std::string_view name);

std::string_view toolkit_version();

}  // namespace bloomprobe
