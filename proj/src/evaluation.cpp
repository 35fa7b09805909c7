#include "myobench/evaluation.hpp"

#include "myobench/error.hpp"
#include "myobench/parallel.hpp"
#include "myobench/rng.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <set>

namespace myobench {

using nlohmann::json;

std::string_view to_string(TaskKind t) {
    switch (t) {
        case TaskKind::Position: return "position";
        case TaskKind::WithinPosition: return "gesture";
        case TaskKind::Sequential: return "sequential";
    }
    return "?";
}

TaskKind parse_task(std::string_view text) {
    if (text == "position") return TaskKind::Position;
    if (text == "gesture" || text == "within-position") return TaskKind::WithinPosition;
    if (text == "sequential") return TaskKind::Sequential;
    throw ConfigError("unknown task '" + std::string(text) + "' (expected position|gesture|sequential)");
}

FoldPlan make_loto_folds(const FeatureMatrix& m, int subject) {
    std::map<int, std::vector<std::size_t>> by_rep;
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        if (m.labels[i].subject != subject) continue;
        rows.push_back(i);
        by_rep[m.labels[i].repetition].push_back(i);
    }
    if (by_rep.size() < 2)
        throw DataError("subject " + std::to_string(subject) + " has " + std::to_string(by_rep.size()) +
                        " repetition(s); leave-one-trial-out needs at least 2");
    FoldPlan plan;
    plan.subject = subject;
    for (const auto& [rep, test] : by_rep) {
        Fold f;
        f.held_out_repetition = rep;
        f.test = test;
        for (auto i : rows)
            if (m.labels[i].repetition != rep) f.train.push_back(i);
        plan.folds.push_back(std::move(f));
    }
    return plan;
}

ConfusionMatrix confusion_matrix(std::span<const int> truths, std::span<const int> predictions,
                                 std::span<const int> classes) {
    if (truths.size() != predictions.size())
        throw DataError("confusion matrix needs equal-length label sequences");
    ConfusionMatrix cm;
    cm.classes.assign(classes.begin(), classes.end());
    const std::size_t n = cm.classes.size();
    std::map<int, std::size_t> index;
    for (std::size_t i = 0; i < n; ++i) index.emplace(cm.classes[i], i);
    cm.counts.assign(n, std::vector<long>(n, 0));
    for (std::size_t i = 0; i < truths.size(); ++i) {
        const auto t = index.find(truths[i]);
        const auto p = index.find(predictions[i]);
        if (t == index.end() || p == index.end())
            throw DataError("label " + std::to_string(t == index.end() ? truths[i] : predictions[i]) +
                            " is outside the class list");
        ++cm.counts[t->second][p->second];
    }
    cm.percent.assign(n, std::vector<double>(n, 0.0));
    cm.empty_rows.assign(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        const long total = std::accumulate(cm.counts[i].begin(), cm.counts[i].end(), 0L);
        if (total == 0) {
            cm.empty_rows[i] = true;
            continue;
        }
        for (std::size_t j = 0; j < n; ++j) cm.percent[i][j] = 100.0 * static_cast<double>(cm.counts[i][j]) / static_cast<double>(total);
    }
    return cm;
}

std::vector<double> TaskResult::subject_means() const {
    std::vector<double> out;
    for (const auto& s : subjects) out.push_back(s.mean_accuracy);
    return out;
}

namespace {

using PositionKey = std::optional<int>;

int position_tag(const PositionKey& p) {
    return p ? *p : -1;
}

std::uint64_t gesture_stage_seed(std::uint64_t seed, int subject, int rep, const PositionKey& p) {
    return derive_seed(seed, {subject, rep, position_tag(p), 1});
}

std::uint64_t position_stage_seed(std::uint64_t seed, int subject, int rep) {
    return derive_seed(seed, {subject, rep, -2, 0});
}

RowMatrix gather(const FeatureMatrix& m, std::span<const std::size_t> rows) {
    RowMatrix X(static_cast<long>(rows.size()), m.values.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) X.row(static_cast<long>(i)) = m.values.row(static_cast<long>(rows[i]));
    return X;
}

std::vector<int> gesture_targets(const FeatureMatrix& m, std::span<const std::size_t> rows) {
    std::vector<int> y;
    for (auto i : rows) y.push_back(m.labels[i].gesture);
    return y;
}

std::vector<int> position_targets(const FeatureMatrix& m, std::span<const std::size_t> rows) {
    std::vector<int> y;
    for (auto i : rows) y.push_back(*m.labels[i].position);
    return y;
}

TrainedModel fit_rows(const ClassifierKind& kind, const FeatureMatrix& m, std::span<const std::size_t> rows,
                      const std::vector<int>& y, std::uint64_t seed, const FitOptions& fit_options) {
    return fit(kind, gather(m, rows), y, seed, fit_options);
}

std::map<PositionKey, std::vector<std::size_t>> group_by_position(const FeatureMatrix& m,
                                                                 std::span<const std::size_t> rows) {
    std::map<PositionKey, std::vector<std::size_t>> out;
    for (auto i : rows) out[m.labels[i].position].push_back(i);
    return out;
}

void finish_fold(FoldResult& f) {
    std::sort(f.outcomes.begin(), f.outcomes.end(), [](const auto& a, const auto& b) { return a.row < b.row; });
    const auto correct = std::count_if(f.outcomes.begin(), f.outcomes.end(),
                                       [](const WindowOutcome& o) { return o.truth == o.predicted; });
    f.accuracy = f.outcomes.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(f.outcomes.size());
}

using CellFn = std::function<FoldResult(int subject, const Fold& fold)>;

void require_positions(const FeatureSet& fs, TaskKind task) {
    if (!fs.has_positions())
        throw TaskUnavailable("no position labels: the " + std::string(to_string(task)) +
                              " task needs a dataset recorded in labelled limb positions");
}

TaskResult run_folds(const FeatureMatrix& table, const CellFn& cell, int jobs) {
    std::set<int> subjects;
    for (const auto& l : table.labels) subjects.insert(l.subject);
    if (subjects.empty()) throw DataError("feature table is empty");

    std::vector<FoldPlan> plans;
    std::vector<std::pair<std::size_t, std::size_t>> cells;
    for (int s : subjects) {
        plans.push_back(make_loto_folds(table, s));
        for (std::size_t f = 0; f < plans.back().folds.size(); ++f) cells.emplace_back(plans.size() - 1, f);
    }
    std::vector<FoldResult> results(cells.size());
    parallel_for(cells.size(), jobs, [&](std::size_t i) {
        const auto& plan = plans[cells[i].first];
        const auto& fold = plan.folds[cells[i].second];
        results[i] = cell(plan.subject, fold);
        results[i].held_out_repetition = fold.held_out_repetition;
        finish_fold(results[i]);
    });

    TaskResult r;
    std::size_t next = 0;
    double fold_sum = 0.0;
    std::size_t fold_count = 0;
    std::vector<int> truths, preds;
    std::set<int> classes;
    for (const auto& plan : plans) {
        SubjectResult sr;
        sr.subject = plan.subject;
        double sum = 0.0;
        for (std::size_t f = 0; f < plan.folds.size(); ++f, ++next) {
            auto& fr = results[next];
            sum += fr.accuracy;
            fold_sum += fr.accuracy;
            ++fold_count;
            r.fallbacks += fr.fallbacks;
            for (const auto& o : fr.outcomes) {
                truths.push_back(o.truth);
                preds.push_back(o.predicted);
                classes.insert(o.truth);
                classes.insert(o.predicted);
            }
            sr.folds.push_back(std::move(fr));
        }
        sr.mean_accuracy = sum / static_cast<double>(plan.folds.size());
        r.subjects.push_back(std::move(sr));
    }
    r.mean = fold_sum / static_cast<double>(fold_count);
    if (r.subjects.size() > 1) {
        double m = 0.0;
        for (const auto& s : r.subjects) m += s.mean_accuracy;
        m /= static_cast<double>(r.subjects.size());
        double ss = 0.0;
        for (const auto& s : r.subjects) ss += (s.mean_accuracy - m) * (s.mean_accuracy - m);
        r.std = std::sqrt(ss / static_cast<double>(r.subjects.size() - 1));
    }
    const std::vector<int> class_list(classes.begin(), classes.end());
    r.confusion = confusion_matrix(truths, preds, class_list);
    return r;
}

FoldResult within_position_fold(const FeatureMatrix& table, const ClassifierKind& classifier,
                                const TaskOptions& options, int subject, const Fold& fold) {
    FoldResult fr;
    const auto train_groups = group_by_position(table, fold.train);
    for (const auto& [pos, test_rows] : group_by_position(table, fold.test)) {
        const auto it = train_groups.find(pos);
        if (it == train_groups.end())
            throw DataError("subject " + std::to_string(subject) + " position " + std::to_string(position_tag(pos)) +
                            " has no training rows when repetition " + std::to_string(fold.held_out_repetition) +
                            " is held out");
        const auto model = fit_rows(classifier, table, it->second, gesture_targets(table, it->second),
                                    gesture_stage_seed(options.seed, subject, fold.held_out_repetition, pos), options.fit);
        for (auto i : test_rows)
            fr.outcomes.push_back({i, table.labels[i].gesture, predict(model, table.row(i))});
    }
    return fr;
}

void check_aligned(const FeatureMatrix& a, const FeatureMatrix& b) {
    if (a.rows() != b.rows())
        throw DataError("feature tables " + std::string(to_string(a.kind)) + " and " + std::string(to_string(b.kind)) +
                        " have different row counts");
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const auto& x = a.labels[i];
        const auto& y = b.labels[i];
        if (x.subject != y.subject || x.gesture != y.gesture || x.position != y.position ||
            x.repetition != y.repetition || x.window != y.window)
            throw DataError("feature tables are not frame-aligned at row " + std::to_string(i));
    }
}

json kind_json(const ClassifierKind& k) {
    return k.label();
}

}  // namespace

TaskResult run_position_task(const FeatureSet& fs, FeatureSetKind features, const ClassifierKind& classifier,
                             const TaskOptions& options) {
    require_positions(fs, TaskKind::Position);
    const FeatureMatrix& table = fs.table(features);
    TaskResult r = run_folds(
        table,
        [&](int subject, const Fold& fold) {
            FoldResult fr;
            const auto model = fit_rows(classifier, table, fold.train, position_targets(table, fold.train),
                                        position_stage_seed(options.seed, subject, fold.held_out_repetition),
                                        options.fit);
            for (auto i : fold.test) fr.outcomes.push_back({i, *table.labels[i].position, predict(model, table.row(i))});
            return fr;
        },
        options.jobs);
    r.task = TaskKind::Position;
    r.dataset = fs.dataset_name;
    r.features = features;
    r.classifier = classifier;
    for (int c : r.confusion.classes)
        r.class_names[c] = fs.position_names.contains(c) ? fs.position_names.at(c) : std::to_string(c);
    r.config = options.config;
    return r;
}

TaskResult run_within_position_task(const FeatureSet& fs, FeatureSetKind features, const ClassifierKind& classifier,
                                    const TaskOptions& options) {
    const FeatureMatrix& table = fs.table(features);
    TaskResult r = run_folds(
        table,
        [&](int subject, const Fold& fold) { return within_position_fold(table, classifier, options, subject, fold); },
        options.jobs);
    r.task = TaskKind::WithinPosition;
    r.dataset = fs.dataset_name;
    r.features = features;
    r.classifier = classifier;
    for (int c : r.confusion.classes)
        r.class_names[c] = fs.gesture_names.contains(c) ? fs.gesture_names.at(c) : std::to_string(c);
    r.config = options.config;
    return r;
}

TaskResult run_sequential_task(const FeatureSet& fs, FeatureSetKind position_features,
                               FeatureSetKind gesture_features, const ClassifierKind& classifier,
                               const TaskOptions& options) {
    require_positions(fs, TaskKind::Sequential);
    const FeatureMatrix& ptable = fs.table(position_features);
    const FeatureMatrix& gtable = fs.table(gesture_features);
    check_aligned(ptable, gtable);
    const ClassifierKind position_classifier = options.position_classifier.value_or(classifier);

    TaskResult r = run_folds(
        gtable,
        [&](int subject, const Fold& fold) {
            FoldResult fr;
            const int rep = fold.held_out_repetition;
            std::map<PositionKey, TrainedModel> gesture_models;
            std::map<int, std::size_t> position_counts;
            for (const auto& [pos, rows] : group_by_position(gtable, fold.train)) {
                gesture_models.emplace(pos, fit_rows(classifier, gtable, rows, gesture_targets(gtable, rows),
                                                     gesture_stage_seed(options.seed, subject, rep, pos), options.fit));
                position_counts[*pos] = rows.size();
            }
            // Most frequent training position, lowest id on ties.
            int fallback = position_counts.begin()->first;
            for (const auto& [p, n] : position_counts)
                if (n > position_counts[fallback]) fallback = p;

            std::optional<TrainedModel> position_model;
            if (options.router == PositionRouter::Classifier)
                position_model = fit_rows(position_classifier, ptable, fold.train, position_targets(ptable, fold.train),
                                          position_stage_seed(options.seed, subject, rep), options.fit);

            for (auto i : fold.test) {
                int routed = options.router == PositionRouter::GroundTruth ? *gtable.labels[i].position
                                                                          : predict(*position_model, ptable.row(i));
                auto it = gesture_models.find(routed);
                if (it == gesture_models.end()) {
                    ++fr.fallbacks;
                    it = gesture_models.find(fallback);
                }
                fr.outcomes.push_back({i, gtable.labels[i].gesture, predict(it->second, gtable.row(i))});
            }
            return fr;
        },
        options.jobs);
    r.task = TaskKind::Sequential;
    r.dataset = fs.dataset_name;
    r.features = gesture_features;
    r.position_features = position_features;
    r.classifier = classifier;
    r.position_classifier = position_classifier;
    for (int c : r.confusion.classes)
        r.class_names[c] = fs.gesture_names.contains(c) ? fs.gesture_names.at(c) : std::to_string(c);
    r.config = options.config;
    return r;
}

json to_json(const TaskResult& r) {
    json j;
    j["format"] = "myobench-task-result";
    j["version"] = 1;
    j["task"] = std::string(to_string(r.task));
    j["dataset"] = r.dataset;
    j["features"] = std::string(to_string(r.features));
    j["position_features"] = r.position_features ? json(std::string(to_string(*r.position_features))) : json(nullptr);
    j["classifier"] = kind_json(r.classifier);
    j["position_classifier"] = r.position_classifier ? kind_json(*r.position_classifier) : json(nullptr);
    j["mean_accuracy"] = r.mean;
    j["std_accuracy"] = r.std;
    j["fallbacks"] = r.fallbacks;
    json subjects = json::array();
    for (const auto& s : r.subjects) {
        json folds = json::array();
        for (const auto& f : s.folds) {
            json outcomes = json::array();
            for (const auto& o : f.outcomes) outcomes.push_back({o.row, o.truth, o.predicted});
            folds.push_back({{"held_out_repetition", f.held_out_repetition},
                             {"accuracy", f.accuracy},
                             {"fallbacks", f.fallbacks},
                             {"outcomes", outcomes}});
        }
        subjects.push_back({{"subject", s.subject}, {"mean_accuracy", s.mean_accuracy}, {"folds", folds}});
    }
    j["subjects"] = subjects;
    json names = json::object();
    for (const auto& [k, v] : r.class_names) names[std::to_string(k)] = v;
    j["confusion"] = {{"classes", r.confusion.classes},
                      {"class_names", names},
                      {"counts", r.confusion.counts},
                      {"percent", r.confusion.percent},
                      {"empty_rows", r.confusion.empty_rows}};
    j["config"] = r.config;
    return j;
}

TaskResult task_result_from_json(const json& j) {
    try {
        TaskResult r;
        r.task = parse_task(j.at("task").get<std::string>());
        r.dataset = j.at("dataset").get<std::string>();
        r.features = parse_feature_set(j.at("features").get<std::string>());
        if (!j.at("position_features").is_null())
            r.position_features = parse_feature_set(j.at("position_features").get<std::string>());
        r.classifier = ClassifierKind::parse(j.at("classifier").get<std::string>());
        if (!j.at("position_classifier").is_null())
            r.position_classifier = ClassifierKind::parse(j.at("position_classifier").get<std::string>());
        r.mean = j.at("mean_accuracy").get<double>();
        r.std = j.at("std_accuracy").get<double>();
        r.fallbacks = j.at("fallbacks").get<int>();
        for (const auto& js : j.at("subjects")) {
            SubjectResult s;
            s.subject = js.at("subject").get<int>();
            s.mean_accuracy = js.at("mean_accuracy").get<double>();
            for (const auto& jf : js.at("folds")) {
                FoldResult f;
                f.held_out_repetition = jf.at("held_out_repetition").get<int>();
                f.accuracy = jf.at("accuracy").get<double>();
                f.fallbacks = jf.at("fallbacks").get<int>();
                for (const auto& o : jf.at("outcomes"))
                    f.outcomes.push_back({o.at(0).get<std::size_t>(), o.at(1).get<int>(), o.at(2).get<int>()});
                s.folds.push_back(std::move(f));
            }
            r.subjects.push_back(std::move(s));
        }
        const auto& c = j.at("confusion");
        r.confusion.classes = c.at("classes").get<std::vector<int>>();
        r.confusion.counts = c.at("counts").get<std::vector<std::vector<long>>>();
        r.confusion.percent = c.at("percent").get<std::vector<std::vector<double>>>();
        r.confusion.empty_rows = c.at("empty_rows").get<std::vector<bool>>();
        for (const auto& [k, v] : c.at("class_names").items()) r.class_names[std::stoi(k)] = v.get<std::string>();
        r.config = j.value("config", json::object());
        return r;
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed task result: ") + e.what());
    }
}

}  // namespace myobench
