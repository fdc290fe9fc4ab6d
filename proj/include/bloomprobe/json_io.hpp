// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The bloomprobe Authors

#pragma once

#include <string>

#include <json.hpp>

#include "bloomprobe/baselines.hpp"
#include "bloomprobe/corpus.hpp"
#include "bloomprobe/evaluation.hpp"
#include "bloomprobe/geometry.hpp"
#include "bloomprobe/layerscan.hpp"
#include "bloomprobe/probe.hpp"

// JSON views of the report types. Doubles are written in shortest
// round-trip form; non-finite values (an infinite F statistic) become null.
namespace bloomprobe {

using Json = nlohmann::json;

Json to_json(const LengthReport& report);
Json to_json(const EvalReport& report);
Json to_json(const ScanReport& report);
Json to_json(const DistanceProfile& profile);
Json to_json(const TfidfModel& model);
Json to_json(const TrainConfig& config);

/// {model_id, layer, lambda, means, scales, weights, bias, train_meta}
Json probe_to_json(const LinearProbe& probe, const std::string& model_id, std::size_t layer);
/// Inverse of probe_to_json; throws DataError on missing or ill-shaped fields.
LinearProbe probe_from_json(const Json& j);

TfidfModel tfidf_from_json(const Json& j);

/// Pretty-printed with a trailing newline; stable for identical input.
std::string dump(const Json& j);

}  // namespace bloomprobe
