#include "myobench/pipeline.hpp"

#include "myobench/error.hpp"
#include "myobench/parallel.hpp"

#include <algorithm>
#include <cctype>

namespace myobench {

nlohmann::json FeaturePipelineOptions::to_json() const {
    nlohmann::json kinds_json = nlohmann::json::array();
    for (auto k : kinds) kinds_json.push_back(std::string(to_string(k)));
    return {{"preprocess", preprocess},
            {"filters", filters.to_json()},
            {"windows",
             {{"length_ms", windows.length_ms},
              {"increment_ms", windows.increment_ms},
              {"anchor", std::string(to_string(windows.anchor))}}},
            {"features",
             {{"kinds", kinds_json},
              {"zc_threshold", features.zc_threshold},
              {"ssc_threshold", features.ssc_threshold},
              {"tdpsd_epsilon", features.tdpsd_epsilon},
              {"tdpsd_version", features::kTdpsdVersion}}}};
}

const FeatureMatrix& FeatureSet::table(FeatureSetKind k) const {
    const auto it = tables.find(k);
    if (it == tables.end()) throw DataError("feature set " + std::string(to_string(k)) + " was not extracted");
    return it->second;
}

bool FeatureSet::has_positions() const {
    if (tables.empty()) return false;
    const auto& labels = tables.begin()->second.labels;
    return !labels.empty() && std::all_of(labels.begin(), labels.end(), [](const RowLabel& l) { return l.position.has_value(); });
}

std::map<FeatureSetKind, FeatureMatrix> trial_features(const TrialRecord& raw, const FeaturePipelineOptions& o) {
    const TrialRecord t = o.preprocess ? preprocess_trial(raw, o.filters) : raw;
    const TrialWindows tw = segment_windows(t, o.windows);

    std::map<FeatureSetKind, FeatureMatrix> out;
    for (auto kind : o.kinds) {
        const Modality want = modality_of(kind);
        FeatureMatrix m;
        m.kind = kind;
        std::vector<std::size_t> streams;
        int channels = 0;
        for (std::size_t s = 0; s < t.streams.size(); ++s) {
            if (t.streams[s].modality != want) continue;
            streams.push_back(s);
            const auto names = column_names(kind, t.streams[s].channel_count(), channels);
            m.columns.insert(m.columns.end(), names.begin(), names.end());
            channels += t.streams[s].channel_count();
        }
        if (streams.empty())
            throw FeatureError("trial " + to_string(t.key) + " has no " + std::string(to_string(want)) +
                               " stream for " + std::string(to_string(kind)));

        m.values.resize(static_cast<long>(tw.paired_count), static_cast<long>(m.columns.size()));
        for (std::size_t k = 0; k < tw.paired_count; ++k) {
            long col = 0;
            for (auto s : streams) {
                const auto row = extract_window(tw.per_stream[s][k], kind, o.features);
                for (double v : row) m.values(static_cast<long>(k), col++) = v;
            }
            const Window& lead = tw.per_stream[streams.front()][k];
            m.labels.push_back({t.key.subject, t.key.gesture, t.key.position, t.key.repetition, static_cast<int>(k),
                                lead.start_time_s});
        }
        out.emplace(kind, std::move(m));
    }
    return out;
}

namespace {

FeatureMatrix concatenate(std::vector<std::map<FeatureSetKind, FeatureMatrix>>& parts, FeatureSetKind kind) {
    FeatureMatrix out;
    out.kind = kind;
    long rows = 0;
    for (auto& p : parts) rows += static_cast<long>(p.at(kind).rows());
    if (parts.empty()) return out;
    out.columns = parts.front().at(kind).columns;
    out.values.resize(rows, static_cast<long>(out.columns.size()));
    long r = 0;
    for (auto& p : parts) {
        auto& m = p.at(kind);
        if (m.columns != out.columns)
            throw FeatureError("trials disagree on " + std::string(to_string(kind)) + " channel layout");
        out.values.middleRows(r, static_cast<long>(m.rows())) = m.values;
        r += static_cast<long>(m.rows());
        out.labels.insert(out.labels.end(), m.labels.begin(), m.labels.end());
    }
    return out;
}

FeatureSet assemble(std::vector<std::map<FeatureSetKind, FeatureMatrix>>& parts, const Dataset& names,
                    const FeaturePipelineOptions& o) {
    FeatureSet fs;
    fs.dataset_name = names.name;
    fs.gesture_names = names.gesture_names;
    fs.position_names = names.position_names;
    for (auto kind : o.kinds) fs.tables.emplace(kind, concatenate(parts, kind));
    return fs;
}

}  // namespace

FeatureSet compute_features(const Dataset& d, const FeaturePipelineOptions& o) {
    std::vector<std::map<FeatureSetKind, FeatureMatrix>> parts(d.trials.size());
    parallel_for(d.trials.size(), o.jobs, [&](std::size_t i) { parts[i] = trial_features(d.trials[i], o); });
    return assemble(parts, d, o);
}

FeatureSet compute_features(std::size_t trial_count, const std::function<TrialRecord(std::size_t)>& source,
                            const Dataset& names_only, const FeaturePipelineOptions& o) {
    std::vector<std::map<FeatureSetKind, FeatureMatrix>> parts(trial_count);
    parallel_for(trial_count, o.jobs, [&](std::size_t i) { parts[i] = trial_features(source(i), o); });
    return assemble(parts, names_only, o);
}

namespace {

FeatureSet keep_rows(const FeatureSet& fs, const std::function<bool(const RowLabel&)>& keep) {
    FeatureSet out;
    out.dataset_name = fs.dataset_name;
    out.position_names = fs.position_names;
    std::set<int> kept_gestures;
    for (const auto& [kind, m] : fs.tables) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < m.rows(); ++i)
            if (keep(m.labels[i])) {
                idx.push_back(i);
                kept_gestures.insert(m.labels[i].gesture);
            }
        out.tables.emplace(kind, m.select(idx));
    }
    for (const auto& [id, name] : fs.gesture_names)
        if (kept_gestures.contains(id)) out.gesture_names.emplace(id, name);
    return out;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

}  // namespace

FeatureSet exclude_gestures(const FeatureSet& fs, const std::set<int>& excluded) {
    return keep_rows(fs, [&](const RowLabel& l) { return !excluded.contains(l.gesture); });
}

FeatureSet filter_subset(const FeatureSet& fs, const GestureSubset& s) {
    if (s.gesture_ids.empty()) throw DataError("gesture subset '" + s.name + "' is empty");
    std::set<int> present;
    if (!fs.tables.empty())
        for (const auto& l : fs.tables.begin()->second.labels) present.insert(l.gesture);
    for (int g : s.gesture_ids)
        if (!present.contains(g))
            throw DataError("gesture subset '" + s.name + "' references gesture " + std::to_string(g) +
                            " absent from dataset '" + fs.dataset_name + "'");
    FeatureSet out = keep_rows(fs, [&](const RowLabel& l) { return s.gesture_ids.contains(l.gesture); });
    out.dataset_name = fs.dataset_name + "/" + s.name;
    return out;
}

std::set<int> gestures_named(const FeatureSet& fs, const std::vector<std::string>& names) {
    std::set<int> out;
    for (const auto& [id, name] : fs.gesture_names)
        for (const auto& n : names)
            if (lower(name) == lower(n)) out.insert(id);
    return out;
}

}  // namespace myobench
