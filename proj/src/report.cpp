#include "myobench/report.hpp"

#include "myobench/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace myobench {

using Family = ClassifierKind::Family;

std::string format_cell(double mean, double std) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.1f+%.1f", 100.0 * mean, 100.0 * std);
    return buf;
}

namespace {

std::string percent1(double p) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", p);
    return buf;
}

constexpr FeatureSetKind kMed = FeatureSetKind::MED;
constexpr FeatureSetKind kRms = FeatureSetKind::RMS;
constexpr FeatureSetKind kTd = FeatureSetKind::TD;
constexpr FeatureSetKind kPsd = FeatureSetKind::TDPSD;
constexpr std::array<FeatureSetKind, 4> kColumns{kMed, kRms, kTd, kPsd};
constexpr std::array<Family, 4> kFamilies{Family::LDA, Family::QDA, Family::KNN, Family::RF};

std::string family_label(Family f) {
    switch (f) {
        case Family::LDA: return "LDA";
        case Family::QDA: return "QDA";
        case Family::KNN: return "kNN";
        case Family::RF: return "RF";
    }
    return "?";
}

std::string feature_label(FeatureSetKind k) {
    switch (k) {
        case kMed: return "ACC MED";
        case kRms: return "ACC RMS";
        case kTd: return "EMG TD";
        case kPsd: return "EMG TDPSD";
    }
    return "?";
}

// Rows: LDA, QDA, kNN, RF; columns: MED, RMS, TD, TDPSD.
std::vector<ReferenceCell> grid(TaskKind task, const double (&v)[4][4][2]) {
    std::vector<ReferenceCell> out;
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 4; ++c) out.push_back({task, std::nullopt, kColumns[c], kFamilies[r], v[r][c][0], v[r][c][1]});
    return out;
}

std::vector<ReferenceCell> biomedical_targets() {
    static const double position[4][4][2] = {{{99.9, 0.3}, {96.3, 5.2}, {63.0, 9.7}, {62.3, 8.0}},
                                             {{99.9, 0.1}, {98.4, 1.8}, {67.8, 8.9}, {66.0, 7.6}},
                                             {{100.0, 0.0}, {98.0, 2.4}, {66.8, 8.1}, {54.8, 8.4}},
                                             {{99.5, 0.6}, {96.3, 3.2}, {66.8, 8.4}, {63.0, 8.5}}};
    static const double gesture[4][4][2] = {{{69.8, 4.4}, {65.8, 4.5}, {96.2, 0.7}, {96.0, 0.4}},
                                            {{66.4, 4.8}, {64.3, 5.1}, {95.1, 0.8}, {94.2, 0.5}},
                                            {{63.8, 5.6}, {60.8, 5.1}, {94.3, 0.9}, {85.8, 1.2}},
                                            {{61.2, 4.9}, {59.2, 3.3}, {92.9, 0.7}, {91.6, 0.9}}};
    // [position set][gesture set][classifier] = mean, std
    static const double sequential[4][4][4][2] = {
        {{{65.5, 17.2}, {62.4, 15.8}, {60.2, 15.5}, {58.2, 15.1}},
         {{61.9, 16.4}, {60.5, 15.7}, {57.5, 15.5}, {55.8, 15.4}},
         {{96.0, 3.2}, {94.7, 4.3}, {93.9, 4.2}, {92.5, 4.0}},
         {{95.6, 3.5}, {93.6, 4.0}, {84.7, 5.5}, {91.0, 4.6}}},
        {{{63.8, 15.9}, {61.9, 15.5}, {59.5, 14.8}, {57.2, 14.8}},
         {{60.5, 15.2}, {60.0, 15.3}, {56.7, 14.9}, {54.1, 14.3}},
         {{95.5, 3.1}, {94.4, 4.2}, {93.6, 4.3}, {91.5, 4.2}},
         {{95.2, 3.4}, {93.3, 3.8}, {84.3, 5.4}, {90.6, 4.5}}},
        {{{50.2, 12.0}, {49.7, 11.1}, {51.1, 13.0}, {47.3, 11.5}},
         {{46.7, 11.0}, {47.4, 11.0}, {46.6, 12.5}, {44.1, 11.6}},
         {{93.4, 4.8}, {92.8, 5.3}, {94.1, 4.7}, {91.2, 4.7}},
         {{93.2, 4.7}, {92.2, 4.5}, {84.3, 4.3}, {89.8, 5.0}}},
        {{{49.7, 11.7}, {49.1, 11.2}, {47.0, 10.8}, {46.5, 11.5}},
         {{45.8, 10.5}, {47.3, 11.1}, {42.0, 9.9}, {43.4, 10.8}},
         {{93.3, 5.0}, {92.8, 5.6}, {91.2, 5.4}, {90.2, 5.1}},
         {{93.5, 4.7}, {92.1, 4.5}, {83.1, 4.3}, {89.2, 5.3}}}};
    auto out = grid(TaskKind::Position, position);
    auto g = grid(TaskKind::WithinPosition, gesture);
    out.insert(out.end(), g.begin(), g.end());
    for (std::size_t p = 0; p < 4; ++p)
        for (std::size_t f = 0; f < 4; ++f)
            for (std::size_t c = 0; c < 4; ++c)
                out.push_back({TaskKind::Sequential, kColumns[p], kColumns[f], kFamilies[c], sequential[p][f][c][0],
                               sequential[p][f][c][1]});
    return out;
}

std::vector<ReferenceCell> hci_targets(char subset) {
    static const double a[4][4][2] = {{{97.1, 1.5}, {96.6, 1.9}, {89.1, 3.5}, {91.1, 2.7}},
                                      {{93.8, 3.8}, {89.0, 5.5}, {82.9, 5.3}, {68.4, 7.0}},
                                      {{94.2, 2.6}, {94.6, 2.4}, {82.8, 4.5}, {70.1, 4.8}},
                                      {{92.0, 3.8}, {92.9, 2.5}, {85.4, 3.6}, {82.3, 3.8}}};
    static const double b[4][4][2] = {{{94.4, 4.0}, {94.2, 4.1}, {84.7, 8.1}, {87.5, 8.6}},
                                      {{88.5, 8.5}, {84.4, 8.5}, {75.0, 8.4}, {53.1, 10.4}},
                                      {{87.7, 8.8}, {87.9, 8.6}, {68.3, 9.1}, {50.6, 9.2}},
                                      {{84.2, 6.9}, {84.4, 7.1}, {78.4, 7.0}, {73.0, 8.4}}};
    static const double c[4][4][2] = {{{89.1, 4.4}, {84.5, 6.6}, {66.5, 8.5}, {71.9, 8.5}},
                                      {{87.9, 8.1}, {84.1, 8.9}, {60.9, 9.6}, {45.9, 8.8}},
                                      {{80.6, 9.1}, {81.7, 9.2}, {52.0, 9.8}, {34.1, 7.1}},
                                      {{77.9, 8.9}, {78.2, 8.9}, {62.3, 8.6}, {54.2, 8.0}}};
    return grid(TaskKind::WithinPosition, subset == 'a' ? a : subset == 'b' ? b : c);
}

}  // namespace

std::vector<std::string> reference_target_names() { return {"biomedical", "hci-a", "hci-b", "hci-c"}; }

const std::vector<ReferenceCell>& reference_targets(std::string_view name) {
    static const std::map<std::string, std::vector<ReferenceCell>, std::less<>> sets{
        {"biomedical", biomedical_targets()},
        {"hci-a", hci_targets('a')},
        {"hci-b", hci_targets('b')},
        {"hci-c", hci_targets('c')}};
    const auto it = sets.find(name);
    if (it == sets.end())
        throw ConfigError("unknown reference '" + std::string(name) + "' (expected biomedical|hci-a|hci-b|hci-c)");
    return it->second;
}

std::string render_confusion(const TaskResult& r) {
    const auto& cm = r.confusion;
    const auto name = [&](int c) { return r.class_names.contains(c) ? r.class_names.at(c) : std::to_string(c); };
    std::ostringstream os;
    os << "| True \\ Predicted |";
    for (int c : cm.classes) os << ' ' << name(c) << " |";
    os << "\n|---|";
    for (std::size_t i = 0; i < cm.classes.size(); ++i) os << "---:|";
    os << '\n';
    for (std::size_t i = 0; i < cm.classes.size(); ++i) {
        os << "| " << name(cm.classes[i]) << " |";
        for (std::size_t j = 0; j < cm.classes.size(); ++j) {
            const std::string v = cm.empty_rows[i] ? "n/a" : percent1(cm.percent[i][j]);
            os << ' ' << (i == j ? "**" + v + "**" : v) << " |";
        }
        os << '\n';
    }
    return os.str();
}

namespace {

struct CellKey {
    TaskKind task;
    std::string dataset;
    std::optional<FeatureSetKind> position_features;
    FeatureSetKind features;
    Family family;
    auto operator<=>(const CellKey&) const = default;
};

CellKey key_of(const TaskResult& r) {
    return {r.task, r.dataset, r.task == TaskKind::Sequential ? r.position_features : std::nullopt, r.features,
            r.classifier.family};
}

const ReferenceCell* find_reference(const std::vector<ReferenceCell>* ref, const CellKey& k) {
    if (!ref) return nullptr;
    for (const auto& c : *ref)
        if (c.task == k.task && c.features == k.features && c.classifier == k.family &&
            c.position_features == k.position_features)
            return &c;
    return nullptr;
}

class Renderer {
public:
    Renderer(const std::vector<TaskResult>& results, const ReportOptions& o) : o_(o) {
        for (const auto& r : results) cells_.emplace(key_of(r), &r);
        if (o.reference) {
            ref_ = &reference_targets(*o.reference);
            cmp_ = ReferenceComparison{*o.reference, 0, 0, o.tolerance_points, 0.0};
        }
    }

    std::string cell(const CellKey& k) {
        const auto it = cells_.find(k);
        if (it == cells_.end()) return "-";
        const TaskResult& r = *it->second;
        std::string s = format_cell(r.mean, r.std);
        if (const auto* ref = find_reference(ref_, k)) {
            const double delta = 100.0 * r.mean - ref->mean;
            char buf[96];
            std::snprintf(buf, sizeof buf, " (ref %.1f, %+.1f)", ref->mean, delta);
            s += buf;
            ++cmp_->cells;
            if (std::abs(delta) <= o_.tolerance_points + 1e-9) ++cmp_->within;
            cmp_->max_abs_delta = std::max(cmp_->max_abs_delta, std::abs(delta));
        }
        return s;
    }

    bool any(TaskKind t, const std::string& dataset) const {
        return std::any_of(cells_.begin(), cells_.end(),
                           [&](const auto& kv) { return kv.first.task == t && kv.first.dataset == dataset; });
    }

    void grid_table(std::ostringstream& os, TaskKind t, const std::string& dataset) {
        os << "| Classifier | ACC MED | ACC RMS | EMG TD | EMG TDPSD |\n|---|---:|---:|---:|---:|\n";
        for (Family f : kFamilies) {
            bool row = false;
            for (auto c : kColumns) row |= cells_.contains({t, dataset, std::nullopt, c, f});
            if (!row) continue;
            os << "| " << family_label(f) << " |";
            for (auto c : kColumns) os << ' ' << cell({t, dataset, std::nullopt, c, f}) << " |";
            os << '\n';
        }
        os << '\n';
    }

    void sequential_table(std::ostringstream& os, const std::string& dataset) {
        os << "| Position | Gesture | LDA | QDA | kNN | RF |\n|---|---|---:|---:|---:|---:|\n";
        for (auto p : kColumns)
            for (auto g : kColumns) {
                bool row = false;
                for (Family f : kFamilies) row |= cells_.contains({TaskKind::Sequential, dataset, p, g, f});
                if (!row) continue;
                os << "| " << feature_label(p) << " | " << feature_label(g) << " |";
                for (Family f : kFamilies) os << ' ' << cell({TaskKind::Sequential, dataset, p, g, f}) << " |";
                os << '\n';
            }
        os << '\n';
    }

    Report render() {
        std::ostringstream os;
        std::vector<std::string> datasets;
        for (const auto& [k, _] : cells_)
            if (std::find(datasets.begin(), datasets.end(), k.dataset) == datasets.end()) datasets.push_back(k.dataset);
        std::sort(datasets.begin(), datasets.end());

        os << "# Results\n\nCells are mean+std of per-subject accuracy (%), leave-one-trial-out.\n";
        if (cmp_) os << "Parenthesized values: reference accuracy `" << cmp_->reference << "` and difference.\n";
        os << '\n';
        for (const auto& d : datasets) {
            if (any(TaskKind::Position, d)) {
                os << "## Position recognition: " << d << "\n\n";
                grid_table(os, TaskKind::Position, d);
            }
            if (any(TaskKind::WithinPosition, d)) {
                os << "## Within-position gesture recognition: " << d << "\n\n";
                grid_table(os, TaskKind::WithinPosition, d);
            }
            if (any(TaskKind::Sequential, d)) {
                os << "## Sequential gesture recognition: " << d << "\n\n";
                sequential_table(os, d);
            }
        }
        if (o_.confusion) {
            for (const auto& [k, r] : cells_) {
                if (k.task == TaskKind::Position) continue;
                os << "## Confusion matrix (%): " << k.dataset << ", " << to_string(k.task) << ", ";
                if (k.position_features) os << feature_label(*k.position_features) << " -> ";
                os << feature_label(k.features) << ", " << r->classifier.label() << "\n\n" << render_confusion(*r) << '\n';
            }
        }
        if (cmp_) {
            os << "## Reference agreement\n\n"
               << cmp_->within << " of " << cmp_->cells << " cells within +/-" << percent1(cmp_->tolerance)
               << " points; largest difference " << percent1(cmp_->max_abs_delta) << " points.\n";
        }
        return {os.str(), cmp_};
    }

private:
    const ReportOptions& o_;
    std::map<CellKey, const TaskResult*> cells_;
    const std::vector<ReferenceCell>* ref_ = nullptr;
    std::optional<ReferenceComparison> cmp_;
};

}  // namespace

Report render_report(const std::vector<TaskResult>& results, const ReportOptions& options) {
    return Renderer(results, options).render();
}

std::vector<TaskResult> load_results(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw DataError("results directory '" + dir.string() + "' does not exist");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::vector<TaskResult> out;
    for (const auto& f : files) {
        std::ifstream in(f, std::ios::binary);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw DataError(f.filename().string() + ": " + e.what());
        }
        if (!j.is_object() || j.value("format", "") != "myobench-task-result") continue;
        out.push_back(task_result_from_json(j));
    }
    if (out.empty()) throw DataError("no task results found in '" + dir.string() + "'");
    return out;
}

std::string accuracy_csv(const std::vector<TaskResult>& results) {
    std::ostringstream os;
    os << "dataset,task,position_features,features,classifier,subjects,mean_percent,std_percent\n";
    char buf[64];
    for (const auto& r : results) {
        os << r.dataset << ',' << to_string(r.task) << ','
           << (r.position_features ? std::string(to_string(*r.position_features)) : "") << ',' << to_string(r.features)
           << ',' << r.classifier.label() << ',' << r.subjects.size();
        std::snprintf(buf, sizeof buf, ",%.6f,%.6f\n", 100.0 * r.mean, 100.0 * r.std);
        os << buf;
    }
    return os.str();
}

std::string subject_csv(const std::vector<TaskResult>& results) {
    std::ostringstream os;
    os << "dataset,task,position_features,features,classifier,subject,accuracy_percent\n";
    char buf[32];
    for (const auto& r : results)
        for (const auto& s : r.subjects) {
            os << r.dataset << ',' << to_string(r.task) << ','
               << (r.position_features ? std::string(to_string(*r.position_features)) : "") << ','
               << to_string(r.features) << ',' << r.classifier.label() << ',' << s.subject;
            std::snprintf(buf, sizeof buf, ",%.6f\n", 100.0 * s.mean_accuracy);
            os << buf;
        }
    return os.str();
}

}  // namespace myobench
