#pragma once

#include "myobench/dataset.hpp"
#include "myobench/features.hpp"
#include "myobench/preprocessing.hpp"
#include "myobench/windowing.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <map>

namespace myobench {

struct FeaturePipelineOptions {
    bool preprocess = true;
    PreprocessOptions filters;
    WindowSpec windows;
    FeatureOptions features;
    std::vector<FeatureSetKind> kinds{kAllFeatureSets.begin(), kAllFeatureSets.end()};
    int jobs = 1;

    nlohmann::json to_json() const;
};

/// Labeled feature matrices of one dataset, one per feature set. Row i of
/// every table refers to the same analysis frame (trial, window index).
struct FeatureSet {
    std::string dataset_name;
    std::map<int, std::string> gesture_names;
    std::map<int, std::string> position_names;
    std::map<FeatureSetKind, FeatureMatrix> tables;

    const FeatureMatrix& table(FeatureSetKind k) const;
    bool has_positions() const;
};

/// Features of one trial for every requested kind, streams of the same
/// modality concatenated channel-wise.
std::map<FeatureSetKind, FeatureMatrix> trial_features(const TrialRecord& t, const FeaturePipelineOptions& o);

/// preprocess -> segment -> extract over a whole dataset.
FeatureSet compute_features(const Dataset& d, const FeaturePipelineOptions& o = {});

/// Same, pulling trials from a generator so raw signals never coexist in
/// memory. `source(i)` must be deterministic.
FeatureSet compute_features(std::size_t trial_count, const std::function<TrialRecord(std::size_t)>& source,
                            const Dataset& names_only, const FeaturePipelineOptions& o);

/// Keeps rows whose gesture is not excluded, in every table.
FeatureSet exclude_gestures(const FeatureSet& fs, const std::set<int>& excluded);

/// Keeps rows whose gesture is in the subset; throws DataError when the
/// subset names a gesture the feature set lacks.
FeatureSet filter_subset(const FeatureSet& fs, const GestureSubset& s);

/// Gesture ids whose names match any entry (case-insensitive).
std::set<int> gestures_named(const FeatureSet& fs, const std::vector<std::string>& names);

}  // namespace myobench
