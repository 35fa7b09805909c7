#pragma once

#include "myobench/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>

namespace myobench {

inline constexpr const char* kStoreIndexName = "store.json";

/// Writes one CSV per (subject, feature set) plus a store.json index.
/// CSV columns: gesture, position (empty when absent), repetition, window,
/// window_start_s, then ch{c}_{feature}. A leading "# " line carries the
/// provenance JSON. Values are written in shortest round-trip form.
void write_feature_store(const FeatureSet& fs, const std::filesystem::path& dir,
                         const nlohmann::json& provenance = nlohmann::json::object());

/// Inverse of write_feature_store; rows come back grouped by subject in
/// ascending order, each subject's rows in their original order.
FeatureSet read_feature_store(const std::filesystem::path& dir);

nlohmann::json read_feature_store_provenance(const std::filesystem::path& dir);

}  // namespace myobench
