#pragma once

#include "myobench/classifiers.hpp"
#include "myobench/evaluation.hpp"
#include "myobench/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace myobench {

/// Everything a run depends on. Every field except `bundle` has a default,
/// and to_json() of the resolved config is embedded in every output file.
struct RunConfig {
    std::optional<std::filesystem::path> bundle;
    std::filesystem::path output = "out";
    std::uint64_t seed = 0;
    double scale = 1.0;  // synthetic generation only
    int jobs = 1;

    FeaturePipelineOptions pipeline;
    std::vector<ClassifierKind> classifiers{ClassifierKind::lda(), ClassifierKind::qda(), ClassifierKind::knn(),
                                            ClassifierKind::rf()};
    double ridge_gamma = 1e-6;

    std::vector<TaskKind> tasks{TaskKind::Position, TaskKind::WithinPosition, TaskKind::Sequential};
    /// Gestures dropped from the gesture and sequential tasks (matched by
    /// name, case-insensitive). The position task always keeps them.
    std::vector<std::string> exclude_gestures{"rest", "no motion"};
    /// Position and gesture feature sets of the sequential task.
    FeatureSetKind sequential_position_features = FeatureSetKind::MED;
    FeatureSetKind sequential_gesture_features = FeatureSetKind::TD;
    std::optional<std::filesystem::path> subset;

    nlohmann::json to_json() const;
};

/// Parses TOML text. Unknown keys and ill-typed values throw ConfigError.
RunConfig parse_run_config(std::string_view toml_text, const std::string& source_name = "config");

RunConfig load_run_config(const std::filesystem::path& file);

/// "acc-med:emg-td" -> (MED, TD).
std::pair<FeatureSetKind, FeatureSetKind> parse_feature_pair(std::string_view text);

}  // namespace myobench
