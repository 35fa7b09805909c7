#include "myobench/cli.hpp"

#include "myobench/bundle.hpp"
#include "myobench/config.hpp"
#include "myobench/error.hpp"
#include "myobench/evaluation.hpp"
#include "myobench/feature_store.hpp"
#include "myobench/parallel.hpp"
#include "myobench/pipeline.hpp"
#include "myobench/preprocessing.hpp"
#include "myobench/report.hpp"
#include "myobench/synthetic.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <optional>

namespace myobench {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Flags shared by the pipeline subcommands. Unset flags leave the config
// file (or built-in default) value in place.
struct CommonFlags {
    std::string config;
    std::optional<int> jobs;
    std::optional<std::uint64_t> seed;
    std::optional<double> notch;

    void add(CLI::App& app, bool with_seed) {
        app.add_option("--config", config, "TOML run configuration")->check(CLI::ExistingFile);
        app.add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
        if (with_seed) app.add_option("--seed", seed, "master seed");
        app.add_option("--notch", notch, "power-line frequency (50 or 60)");
    }

    RunConfig resolve() const {
        RunConfig c = config.empty() ? RunConfig{} : load_run_config(config);
        if (jobs) c.jobs = *jobs;
        if (seed) c.seed = *seed;
        if (notch) {
            if (*notch != 50.0 && *notch != 60.0) throw ConfigError("--notch must be 50 or 60");
            c.pipeline.filters.notch_hz = *notch;
        }
        c.pipeline.jobs = c.jobs;
        return c;
    }
};

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << text;
    if (!out) throw DataError("cannot write " + path.string());
}

json read_json_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("malformed JSON in " + path.string() + ": " + e.what());
    }
}

// Streams trials from `reader` through `transform` into `writer`,
// transforming `batch` trials at a time in parallel.
template <class Source, class Transform>
void stream_trials(std::size_t count, const Source& source, const Transform& transform, BundleWriter& writer,
                   int jobs) {
    const std::size_t batch = static_cast<std::size_t>(std::max(1, jobs)) * 4;
    std::vector<TrialRecord> buffer;
    for (std::size_t first = 0; first < count; first += batch) {
        const std::size_t n = std::min(batch, count - first);
        buffer.assign(n, {});
        parallel_for(n, jobs, [&](std::size_t i) { buffer[i] = transform(source(first + i)); });
        for (const auto& t : buffer) writer.write_trial(t);
    }
    writer.finish();
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

// ---------------------------------------------------------------- convert

struct ConvertCmd {
    std::string input, out, encoding = "f32le";

    void add(CLI::App& app) {
        auto* c = app.add_subcommand("convert", "validate a bundle and rewrite it in canonical form");
        c->add_option("--input", input, "source bundle directory")->required();
        c->add_option("--out", out, "destination bundle directory")->required();
        c->add_option("--encoding", encoding, "csv or f32le");
    }

    int operator()(std::ostream& os) const {
        const BundleReader reader(input);
        BundleWriteOptions o;
        o.encoding = parse_encoding(encoding);
        o.provenance = reader.provenance();
        BundleWriter writer(out, reader.header(), o);
        stream_trials(
            reader.size(), [&](std::size_t i) { return reader.read_trial(i); },
            [](TrialRecord t) { return t; }, writer, 1);
        os << "converted " << reader.size() << " trials to " << out << '\n';
        return 0;
    }
};

// ------------------------------------------------------------------ synth

struct SynthCmd {
    std::string preset_name, synthetic_config, out, encoding = "f32le";
    std::optional<double> scale, kappa;
    std::optional<std::uint64_t> seed;
    std::optional<int> jobs;
    std::string config, write_config;

    void add(CLI::App& app) {
        auto* c = app.add_subcommand("synth", "generate a synthetic dataset bundle");
        auto* p = c->add_option("--preset", preset_name, "bio-like or hci-like");
        auto* s = c->add_option("--synthetic-config", synthetic_config, "JSON generator configuration")
                      ->check(CLI::ExistingFile);
        p->excludes(s);
        c->add_option("--scale", scale, "subject and repetition scale factor");
        c->add_option("--seed", seed, "generator seed");
        c->add_option("--kappa", kappa, "positional coupling in [0, 1]");
        c->add_option("--out", out, "destination bundle directory")->required();
        c->add_option("--encoding", encoding, "csv or f32le");
        c->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
        c->add_option("--config", config, "TOML run configuration (seed, scale, jobs)")->check(CLI::ExistingFile);
        c->add_option("--write-config", write_config, "also write the resolved generator configuration as JSON");
    }

    int operator()(std::ostream& os) const {
        RunConfig rc = config.empty() ? RunConfig{} : load_run_config(config);
        if (scale) rc.scale = *scale;
        if (seed) rc.seed = *seed;
        if (jobs) rc.jobs = *jobs;
        SyntheticConfig sc;
        if (!synthetic_config.empty()) {
            sc = SyntheticConfig::from_json(read_json_file(synthetic_config));
            if (seed) sc.seed = *seed;
        } else {
            if (preset_name.empty()) throw ConfigError("synth needs --preset or --synthetic-config");
            sc = preset(preset_name, rc.scale, rc.seed);
        }
        if (kappa) sc.positional_coupling = *kappa;
        sc.check();
        if (!write_config.empty()) write_text(write_config, sc.to_json().dump(1) + "\n");

        BundleWriteOptions o;
        o.encoding = parse_encoding(encoding);
        o.provenance = {{"generator", "myobench-synthetic"}, {"synthetic_config", sc.to_json()},
                        {"run_config", rc.to_json()}};
        const auto keys = trial_keys(sc);
        BundleWriter writer(out, dataset_header(sc), o);
        stream_trials(
            keys.size(), [&](std::size_t i) { return generate_trial(sc, keys[i]); },
            [](TrialRecord t) { return t; }, writer, rc.jobs);
        if (sc.name == "hci-like") {
            fs::create_directories(fs::path(out) / "subsets");
            for (const auto& subset : hci_subsets()) save_subset(subset, fs::path(out) / "subsets" / (lower(subset.name) + ".json"));
        }
        os << "wrote " << keys.size() << " trials (" << sc.subjects << " subjects) to " << out << '\n';
        return 0;
    }
};

// ------------------------------------------------------------- preprocess

struct PreprocessCmd {
    CommonFlags flags;
    std::string bundle, out, encoding = "f32le";

    void add(CLI::App& app) {
        auto* c = app.add_subcommand("preprocess", "filter a bundle (notch + bandpass on EMG, lowpass on ACC)");
        c->add_option("--bundle", bundle, "source bundle directory");
        c->add_option("--out", out, "destination bundle directory")->required();
        c->add_option("--encoding", encoding, "csv or f32le");
        flags.add(*c, false);
    }

    int operator()(std::ostream& os) const {
        RunConfig rc = flags.resolve();
        if (!bundle.empty()) rc.bundle = bundle;
        if (!rc.bundle) throw ConfigError("no input bundle: pass --bundle or set 'bundle' in the config");
        const BundleReader reader(*rc.bundle);
        if (reader.provenance().value("preprocessed", false))
            throw ConfigError("bundle " + rc.bundle->string() + " is already preprocessed");
        BundleWriteOptions o;
        o.encoding = parse_encoding(encoding);
        o.provenance = {{"preprocessed", true},
                        {"preprocessing", rc.pipeline.filters.to_json()},
                        {"run_config", rc.to_json()},
                        {"source", reader.provenance()}};
        BundleWriter writer(out, reader.header(), o);
        stream_trials(
            reader.size(), [&](std::size_t i) { return reader.read_trial(i); },
            [&](const TrialRecord& t) { return preprocess_trial(t, rc.pipeline.filters); }, writer, rc.jobs);
        os << "preprocessed " << reader.size() << " trials to " << out << '\n';
        return 0;
    }
};

// --------------------------------------------------------------- features

FeatureSet features_from_bundle(const fs::path& dir, RunConfig& rc, json& provenance) {
    const BundleReader reader(dir);
    if (reader.provenance().value("preprocessed", false)) rc.pipeline.preprocess = false;
    provenance = {{"run_config", rc.to_json()}, {"bundle", reader.provenance()}};
    return compute_features(
        reader.size(), [&](std::size_t i) { return reader.read_trial(i); }, reader.header(), rc.pipeline);
}

struct FeaturesCmd {
    CommonFlags flags;
    std::string bundle, out;
    std::vector<std::string> kinds;
    bool no_preprocess = false;

    void add(CLI::App& app) {
        auto* c = app.add_subcommand("features", "segment a bundle and write a feature store");
        c->add_option("--bundle", bundle, "source bundle directory");
        c->add_option("--out", out, "feature store directory")->required();
        c->add_option("--kinds", kinds, "feature sets (acc-med, acc-rms, emg-td, emg-tdpsd)")->delimiter(',');
        c->add_flag("--no-preprocess", no_preprocess, "skip filtering (input already filtered)");
        flags.add(*c, false);
    }

    int operator()(std::ostream& os) const {
        RunConfig rc = flags.resolve();
        if (!bundle.empty()) rc.bundle = bundle;
        if (!rc.bundle) throw ConfigError("no input bundle: pass --bundle or set 'bundle' in the config");
        if (!kinds.empty()) {
            rc.pipeline.kinds.clear();
            for (const auto& k : kinds) rc.pipeline.kinds.push_back(parse_feature_set(k));
        }
        if (no_preprocess) rc.pipeline.preprocess = false;
        json provenance;
        const FeatureSet fset = features_from_bundle(*rc.bundle, rc, provenance);
        write_feature_store(fset, out, provenance);
        os << "wrote " << fset.tables.size() << " feature sets of " << fset.tables.begin()->second.rows()
           << " frames to " << out << '\n';
        return 0;
    }
};

// ------------------------------------------------------------------- eval

std::string file_token(std::string s) {
    std::replace(s.begin(), s.end(), ':', '-');
    std::replace(s.begin(), s.end(), '/', '-');
    std::replace(s.begin(), s.end(), ' ', '-');
    return s;
}

std::string confusion_csv(const TaskResult& r) {
    std::string s = "true\\predicted";
    const auto name = [&](int c) {
        std::string n = r.class_names.contains(c) ? r.class_names.at(c) : std::to_string(c);
        if (n.find_first_of(",\"") != std::string::npos) {
            std::string q = "\"";
            for (char ch : n) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
            n = q + "\"";
        }
        return n;
    };
    for (int c : r.confusion.classes) s += "," + name(c);
    s += '\n';
    char buf[32];
    for (std::size_t i = 0; i < r.confusion.classes.size(); ++i) {
        s += name(r.confusion.classes[i]);
        for (double v : r.confusion.percent[i]) {
            std::snprintf(buf, sizeof buf, ",%.6f", v);
            s += buf;
        }
        s += '\n';
    }
    return s;
}

struct EvalCmd {
    CommonFlags flags;
    std::string bundle, store, out = "results", subset, task, features, classifier, position_classifier;
    bool oracle_routing = false;
    std::optional<double> ridge;

    void add(CLI::App& app) {
        auto* c = app.add_subcommand("eval", "run leave-one-trial-out evaluation");
        auto* b = c->add_option("--bundle", bundle, "bundle directory (features computed on the fly)");
        auto* s = c->add_option("--store", store, "feature store directory");
        b->excludes(s);
        c->add_option("--task", task, "position, gesture, sequential or all");
        c->add_option("--features", features,
                      "feature set, 'all', or POSITION:GESTURE for sequential (e.g. acc-med:emg-td)");
        c->add_option("--classifier", classifier, "lda, qda, knn[:k], rf[:trees] or all");
        c->add_option("--position-classifier", position_classifier, "sequential position stage classifier");
        c->add_option("--subset", subset, "gesture subset JSON")->check(CLI::ExistingFile);
        c->add_option("--out", out, "results directory");
        c->add_option("--ridge", ridge, "covariance ridge gamma");
        c->add_flag("--oracle-routing", oracle_routing, "sequential: dispatch on the true position");
        flags.add(*c, true);
    }

    int operator()(std::ostream& os) const {
        RunConfig rc = flags.resolve();
        if (!bundle.empty()) rc.bundle = bundle;
        if (!subset.empty()) rc.subset = subset;
        if (ridge) rc.ridge_gamma = *ridge;
        if (!out.empty()) rc.output = out;

        std::vector<TaskKind> tasks = rc.tasks;
        if (!task.empty() && task != "all") tasks = {parse_task(task)};
        if (task == "all") tasks = {TaskKind::Position, TaskKind::WithinPosition, TaskKind::Sequential};

        std::vector<ClassifierKind> classifiers = rc.classifiers;
        if (classifier == "all")
            classifiers = {ClassifierKind::lda(), ClassifierKind::qda(), ClassifierKind::knn(), ClassifierKind::rf()};
        else if (!classifier.empty())
            classifiers = {ClassifierKind::parse(classifier)};

        std::vector<FeatureSetKind> single = rc.pipeline.kinds;
        std::vector<std::pair<FeatureSetKind, FeatureSetKind>> pairs{
            {rc.sequential_position_features, rc.sequential_gesture_features}};
        if (features == "all") {
            single.assign(kAllFeatureSets.begin(), kAllFeatureSets.end());
            pairs.clear();
            for (auto p : kAllFeatureSets)
                for (auto g : kAllFeatureSets) pairs.emplace_back(p, g);
        } else if (!features.empty()) {
            if (features.find(':') != std::string::npos) {
                pairs = {parse_feature_pair(features)};
                single = {pairs.front().second};
            } else {
                single = {parse_feature_set(features)};
                pairs = {{rc.sequential_position_features, single.front()}};
            }
        }

        // Everything the requested tasks need.
        std::vector<FeatureSetKind> needed;
        const auto need = [&](FeatureSetKind k) {
            if (std::find(needed.begin(), needed.end(), k) == needed.end()) needed.push_back(k);
        };
        for (auto t : tasks) {
            if (t == TaskKind::Sequential)
                for (const auto& [p, g] : pairs) need(p), need(g);
            else
                for (auto k : single) need(k);
        }
        std::sort(needed.begin(), needed.end());

        FeatureSet fset;
        json input;
        if (!store.empty()) {
            fset = read_feature_store(store);
            input = read_feature_store_provenance(store);
            for (auto k : needed)
                if (!fset.tables.contains(k))
                    throw DataError("feature store " + store + " lacks feature set " + std::string(to_string(k)));
        } else {
            if (!rc.bundle) throw ConfigError("no input: pass --bundle or --store, or set 'bundle' in the config");
            rc.pipeline.kinds = needed;
            fset = features_from_bundle(*rc.bundle, rc, input);
            input = input.at("bundle");
        }
        std::string prefix;
        if (rc.subset) {
            const GestureSubset gs = load_subset(*rc.subset);
            fset = filter_subset(fset, gs);
            prefix = lower(file_token(gs.name)) + "_";
        }
        const FeatureSet gesture_rows = exclude_gestures(fset, gestures_named(fset, rc.exclude_gestures));

        TaskOptions topt;
        topt.seed = rc.seed;
        topt.fit.ridge_gamma = rc.ridge_gamma;
        topt.fit.jobs = 1;
        topt.jobs = rc.jobs;
        topt.router = oracle_routing ? PositionRouter::GroundTruth : PositionRouter::Classifier;
        if (!position_classifier.empty()) topt.position_classifier = ClassifierKind::parse(position_classifier);
        topt.config = {{"run_config", rc.to_json()}, {"input", input}};

        const fs::path dir = rc.output;
        fs::create_directories(dir);
        const auto emit = [&](const TaskResult& r, const std::string& feature_token) {
            const std::string stem = prefix + std::string(to_string(r.task)) + "_" + feature_token + "_" +
                                     file_token(r.classifier.label());
            write_text(dir / (stem + ".json"), to_json(r).dump(1) + "\n");
            write_text(dir / (stem + "_confusion.csv"), confusion_csv(r));
            os << to_string(r.task) << ' ' << feature_token << ' ' << r.classifier.label() << ": "
               << format_cell(r.mean, r.std) << '\n';
        };

        for (auto t : tasks) {
            for (const auto& c : classifiers) {
                if (t == TaskKind::Sequential) {
                    for (const auto& [p, g] : pairs)
                        emit(run_sequential_task(gesture_rows, p, g, c, topt),
                             std::string(to_string(p)) + "+" + std::string(to_string(g)));
                } else {
                    for (auto k : single) {
                        const TaskResult r = t == TaskKind::Position ? run_position_task(fset, k, c, topt)
                                                                     : run_within_position_task(gesture_rows, k, c, topt);
                        emit(r, std::string(to_string(k)));
                    }
                }
            }
        }
        return 0;
    }
};

// ----------------------------------------------------------------- report

struct ReportCmd {
    std::string results, out, reference;
    bool csv = false, no_confusion = false;
    double tolerance = 3.0;

    void add(CLI::App& app) {
        auto* c = app.add_subcommand("report", "render Markdown tables from evaluation results");
        c->add_option("--results", results, "results directory")->required();
        c->add_option("--out", out, "Markdown output file")->required();
        c->add_flag("--csv", csv, "also write plot-ready CSV next to the Markdown file");
        c->add_option("--reference", reference, "compare with reference targets (biomedical, hci-a, hci-b, hci-c)");
        c->add_option("--tolerance", tolerance, "reference agreement tolerance in accuracy points");
        c->add_flag("--no-confusion", no_confusion, "omit confusion matrices");
    }

    int operator()(std::ostream& os) const {
        const auto loaded = load_results(results);
        ReportOptions o;
        if (!reference.empty()) o.reference = reference;
        o.tolerance_points = tolerance;
        o.confusion = !no_confusion;
        const Report rep = render_report(loaded, o);

        json configs = json::array();
        for (const auto& r : loaded)
            if (std::find(configs.begin(), configs.end(), r.config) == configs.end()) configs.push_back(r.config);
        const json provenance = {{"tdpsd_version", features::kTdpsdVersion}, {"configs", configs}};
        write_text(out, rep.markdown + "\n<!-- provenance: " + provenance.dump() + " -->\n");
        if (csv) {
            const fs::path base = fs::path(out).replace_extension();
            write_text(base.string() + "_accuracy.csv", "# " + provenance.dump() + "\n" + accuracy_csv(loaded));
            write_text(base.string() + "_subjects.csv", "# " + provenance.dump() + "\n" + subject_csv(loaded));
        }
        os << "rendered " << loaded.size() << " results to " << out << '\n';
        if (rep.comparison)
            os << "reference " << rep.comparison->reference << ": " << rep.comparison->within << "/"
               << rep.comparison->cells << " cells within " << rep.comparison->tolerance << " points\n";
        return 0;
    }
};

std::string one_line(std::string s) {
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"myobench: EMG/ACC gesture and limb-position benchmark", "myobench"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "myobench 1.0 (" + std::string(features::kTdpsdVersion) + ")");

    ConvertCmd convert;
    SynthCmd synth;
    PreprocessCmd pre;
    FeaturesCmd feat;
    EvalCmd eval;
    ReportCmd report;
    convert.add(app);
    synth.add(app);
    pre.add(app);
    feat.add(app);
    eval.add(app);
    report.add(app);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << app.version() << '\n';
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: usage: " << one_line(e.what()) << '\n';
        return 2;
    }

    try {
        const auto* sub = app.get_subcommands().front();
        const std::string name = sub->get_name();
        if (name == "convert") return convert(out);
        if (name == "synth") return synth(out);
        if (name == "preprocess") return pre(out);
        if (name == "features") return feat(out);
        if (name == "eval") return eval(out);
        if (name == "report") return report(out);
        err << "error: usage: unknown subcommand " << name << '\n';
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.category() << ": " << one_line(e.what()) << '\n';
    } catch (const fs::filesystem_error& e) {
        err << "error: io error: " << one_line(e.what()) << '\n';
    } catch (const std::exception& e) {
        err << "error: internal error: " << one_line(e.what()) << '\n';
    }
    return 1;
}

}  // namespace myobench
