#pragma once

#include "myobench/classifiers.hpp"
#include "myobench/features.hpp"
#include "myobench/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <span>
#include <vector>

namespace myobench {

enum class TaskKind {
    Position,        // all gestures pooled, target = limb position
    WithinPosition,  // one gesture classifier per position, target = gesture
    Sequential,      // predicted position selects the gesture classifier
};

/// CLI names: position, gesture, sequential.
std::string_view to_string(TaskKind t);
TaskKind parse_task(std::string_view text);

struct Fold {
    int held_out_repetition = 0;
    std::vector<std::size_t> train;  // row indices into the feature table
    std::vector<std::size_t> test;
};

/// Leave-one-trial-out plan of one subject: a trial is a repetition index,
/// held out across every gesture and position at once.
struct FoldPlan {
    int subject = 0;
    std::vector<Fold> folds;
};

/// Throws DataError when fewer than two repetitions are present.
FoldPlan make_loto_folds(const FeatureMatrix& m, int subject);

struct WindowOutcome {
    std::size_t row = 0;
    int truth = 0;
    int predicted = 0;

    bool operator==(const WindowOutcome&) const = default;
};

struct FoldResult {
    int held_out_repetition = 0;
    std::vector<WindowOutcome> outcomes;  // ascending row order
    double accuracy = 0.0;
    int fallbacks = 0;  // sequential: windows routed to the fallback position
};

struct SubjectResult {
    int subject = 0;
    std::vector<FoldResult> folds;
    double mean_accuracy = 0.0;  // mean over folds
};

struct ConfusionMatrix {
    std::vector<int> classes;
    std::vector<std::vector<long>> counts;     // true x predicted
    std::vector<std::vector<double>> percent;  // row-normalized, 0..100
    std::vector<bool> empty_rows;
};

/// Row-normalized percentages; empty rows are all zero and flagged.
/// Throws DataError for unequal lengths or labels outside `classes`.
ConfusionMatrix confusion_matrix(std::span<const int> truths, std::span<const int> predictions,
                                 std::span<const int> classes);

struct TaskResult {
    TaskKind task = TaskKind::WithinPosition;
    std::string dataset;
    FeatureSetKind features = FeatureSetKind::TD;             // gesture (or position task) feature set
    std::optional<FeatureSetKind> position_features;          // sequential only
    ClassifierKind classifier;
    std::optional<ClassifierKind> position_classifier;        // sequential only
    std::vector<SubjectResult> subjects;
    double mean = 0.0;  // over all subjects and folds
    double std = 0.0;   // sample standard deviation of per-subject means
    ConfusionMatrix confusion;
    std::map<int, std::string> class_names;
    int fallbacks = 0;
    nlohmann::json config = nlohmann::json::object();

    /// Per-subject mean accuracies, ascending subject order.
    std::vector<double> subject_means() const;
};

enum class PositionRouter {
    Classifier,   // normal sequential operation
    GroundTruth,  // dispatch on the true position (upper bound check)
};

struct TaskOptions {
    std::uint64_t seed = 0;
    FitOptions fit;
    int jobs = 1;
    PositionRouter router = PositionRouter::Classifier;
    std::optional<ClassifierKind> position_classifier;  // sequential override; default: same family
    nlohmann::json config = nlohmann::json::object();   // echoed into the result
};

/// Throws TaskUnavailable when the features carry no position labels.
TaskResult run_position_task(const FeatureSet& fs, FeatureSetKind features, const ClassifierKind& classifier,
                             const TaskOptions& options = {});

TaskResult run_within_position_task(const FeatureSet& fs, FeatureSetKind features, const ClassifierKind& classifier,
                                    const TaskOptions& options = {});

/// Throws TaskUnavailable when the features carry no position labels.
TaskResult run_sequential_task(const FeatureSet& fs, FeatureSetKind position_features,
                               FeatureSetKind gesture_features, const ClassifierKind& classifier,
                               const TaskOptions& options = {});

nlohmann::json to_json(const TaskResult& r);
TaskResult task_result_from_json(const nlohmann::json& j);

}  // namespace myobench
