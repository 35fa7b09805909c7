#pragma once

#include "myobench/evaluation.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace myobench {

/// "96.2+0.7": accuracy fractions rendered as percent, one decimal.
std::string format_cell(double mean, double std);

/// A published accuracy for one table cell, in percent.
struct ReferenceCell {
    TaskKind task;
    std::optional<FeatureSetKind> position_features;  // sequential only
    FeatureSetKind features;
    ClassifierKind::Family classifier;
    double mean;
    double std;
};

/// Named sets of reference accuracies: "biomedical", "hci-a", "hci-b",
/// "hci-c". Throws ConfigError for other names.
const std::vector<ReferenceCell>& reference_targets(std::string_view name);
std::vector<std::string> reference_target_names();

struct ReferenceComparison {
    std::string reference;
    int cells = 0;         // cells present in both
    int within = 0;        // |delta| <= tolerance
    double tolerance = 3.0;
    double max_abs_delta = 0.0;
};

struct ReportOptions {
    std::optional<std::string> reference;  // compare against reference_targets(name)
    double tolerance_points = 3.0;
    bool confusion = true;
};

struct Report {
    std::string markdown;
    std::optional<ReferenceComparison> comparison;
};

/// Tables shaped like the classic layout: position accuracy (classifier x
/// feature set), within-position gesture accuracy per dataset, sequential
/// accuracy (feature pair x classifier), then confusion matrices.
Report render_report(const std::vector<TaskResult>& results, const ReportOptions& options = {});

/// Markdown matrix of row-normalized percentages, one decimal.
std::string render_confusion(const TaskResult& r);

/// Loads every task-result JSON in `dir`, sorted by file name.
std::vector<TaskResult> load_results(const std::filesystem::path& dir);

/// Plot-ready exports: one row per result, and one row per (result, subject).
std::string accuracy_csv(const std::vector<TaskResult>& results);
std::string subject_csv(const std::vector<TaskResult>& results);

}  // namespace myobench
