#pragma once

#include "myobench/classifiers.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>

namespace myobench {

inline constexpr int kModelFormatVersion = 1;

/// Versioned JSON form of a fitted model. Doubles are written in shortest
/// round-trip form, so a reloaded model predicts bit-identically.
nlohmann::json model_to_json(const TrainedModel& m);
TrainedModel model_from_json(const nlohmann::json& j);

void save_model(const TrainedModel& m, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace myobench
