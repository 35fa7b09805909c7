#include "myobench/config.hpp"

#include "myobench/error.hpp"

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace myobench {

nlohmann::json RunConfig::to_json() const {
    using nlohmann::json;
    json cls = json::array();
    for (const auto& c : classifiers) cls.push_back(c.label());
    json tks = json::array();
    for (auto t : tasks) tks.push_back(std::string(to_string(t)));
    return {{"bundle", bundle ? json(bundle->generic_string()) : json(nullptr)},
            {"output", output.generic_string()},
            {"seed", seed},
            {"scale", scale},
            {"jobs", jobs},
            {"pipeline", pipeline.to_json()},
            {"classifiers", {{"kinds", cls}, {"ridge_gamma", ridge_gamma}}},
            {"tasks",
             {{"kinds", tks},
              {"exclude_gestures", exclude_gestures},
              {"sequential", std::string(to_string(sequential_position_features)) + ":" +
                                 std::string(to_string(sequential_gesture_features))}}},
            {"subset", subset ? json(subset->generic_string()) : json(nullptr)},
            {"tdpsd_version", features::kTdpsdVersion}};
}

std::pair<FeatureSetKind, FeatureSetKind> parse_feature_pair(std::string_view text) {
    const auto colon = text.find(':');
    if (colon == std::string_view::npos)
        throw ConfigError("sequential features must be POSITION:GESTURE, e.g. acc-med:emg-td (got '" +
                          std::string(text) + "')");
    return {parse_feature_set(text.substr(0, colon)), parse_feature_set(text.substr(colon + 1))};
}

namespace {

class Reader {
public:
    Reader(const toml::table& t, std::string where) : t_(t), where_(std::move(where)) {}

    void finish(const std::set<std::string>& allowed) const {
        for (const auto& [k, _] : t_)
            if (!allowed.contains(std::string(k.str())))
                throw ConfigError("unknown key '" + path(std::string(k.str())) + "'");
    }

    template <class T>
    void get(const char* key, T& out) const {
        const toml::node* n = t_.get(key);
        if (!n) return;
        if constexpr (std::is_same_v<T, bool>) {
            if (auto v = n->value_exact<bool>()) out = *v;
            else fail(key, "a boolean");
        } else if constexpr (std::is_integral_v<T>) {
            if (auto v = n->value_exact<std::int64_t>()) {
                if constexpr (std::is_unsigned_v<T>)
                    if (*v < 0) fail(key, "a non-negative integer");
                out = static_cast<T>(*v);
            } else {
                fail(key, "an integer");
            }
        } else if constexpr (std::is_floating_point_v<T>) {
            if (auto v = n->value<double>()) out = *v;
            else fail(key, "a number");
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (auto v = n->value_exact<std::string>()) out = *v;
            else fail(key, "a string");
        } else if constexpr (std::is_same_v<T, std::vector<std::string>>) {
            const auto* arr = n->as_array();
            if (!arr) fail(key, "an array of strings");
            out.clear();
            for (const auto& e : *arr) {
                auto v = e.value_exact<std::string>();
                if (!v) fail(key, "an array of strings");
                out.push_back(*v);
            }
        }
    }

    const toml::table* sub(const char* key) const {
        const toml::node* n = t_.get(key);
        if (!n) return nullptr;
        if (!n->is_table()) throw ConfigError("'" + path(key) + "' must be a table");
        return n->as_table();
    }

    std::string path(const std::string& key) const { return where_.empty() ? key : where_ + "." + key; }

private:
    [[noreturn]] void fail(const char* key, const char* what) const {
        throw ConfigError("'" + path(key) + "' must be " + what);
    }

    const toml::table& t_;
    std::string where_;
};

}  // namespace

RunConfig parse_run_config(std::string_view toml_text, const std::string& source_name) {
    toml::table root;
    try {
        root = toml::parse(toml_text, source_name);
    } catch (const toml::parse_error& e) {
        std::ostringstream os;
        os << source_name << ":" << e.source().begin.line << ": " << e.description();
        throw ConfigError(os.str());
    }

    RunConfig c;
    Reader r(root, "");
    r.finish({"bundle", "output", "seed", "scale", "jobs", "notch_hz", "subset", "filters", "windows", "features",
              "classifiers", "tasks"});
    std::string s;
    if (s.clear(), r.get("bundle", s), !s.empty()) c.bundle = s;
    if (s.clear(), r.get("output", s), !s.empty()) c.output = s;
    if (s.clear(), r.get("subset", s), !s.empty()) c.subset = s;
    r.get("seed", c.seed);
    r.get("scale", c.scale);
    r.get("jobs", c.jobs);
    r.get("notch_hz", c.pipeline.filters.notch_hz);

    auto& f = c.pipeline.filters;
    if (const auto* t = r.sub("filters")) {
        Reader fr(*t, "filters");
        fr.finish({"preprocess", "notch_quality", "bandpass_low_hz", "bandpass_high_hz", "bandpass_order",
                   "lowpass_cutoff_hz", "lowpass_order", "zero_phase"});
        fr.get("preprocess", c.pipeline.preprocess);
        fr.get("notch_quality", f.notch_quality);
        fr.get("bandpass_low_hz", f.bandpass_low_hz);
        fr.get("bandpass_high_hz", f.bandpass_high_hz);
        fr.get("bandpass_order", f.bandpass_order);
        fr.get("lowpass_cutoff_hz", f.lowpass_cutoff_hz);
        fr.get("lowpass_order", f.lowpass_order);
        fr.get("zero_phase", f.zero_phase);
    }
    if (const auto* t = r.sub("windows")) {
        Reader wr(*t, "windows");
        wr.finish({"length_ms", "increment_ms", "anchor"});
        wr.get("length_ms", c.pipeline.windows.length_ms);
        wr.get("increment_ms", c.pipeline.windows.increment_ms);
        if (s.clear(), wr.get("anchor", s), !s.empty()) c.pipeline.windows.anchor = parse_window_anchor(s);
    }
    if (const auto* t = r.sub("features")) {
        Reader fr(*t, "features");
        fr.finish({"kinds", "zc_threshold", "ssc_threshold", "tdpsd_epsilon"});
        std::vector<std::string> kinds;
        fr.get("kinds", kinds);
        if (t->contains("kinds")) {
            c.pipeline.kinds.clear();
            for (const auto& k : kinds) c.pipeline.kinds.push_back(parse_feature_set(k));
            if (c.pipeline.kinds.empty()) throw ConfigError("'features.kinds' must not be empty");
        }
        fr.get("zc_threshold", c.pipeline.features.zc_threshold);
        fr.get("ssc_threshold", c.pipeline.features.ssc_threshold);
        fr.get("tdpsd_epsilon", c.pipeline.features.tdpsd_epsilon);
    }
    if (const auto* t = r.sub("classifiers")) {
        Reader cr(*t, "classifiers");
        cr.finish({"kinds", "ridge_gamma"});
        std::vector<std::string> kinds;
        cr.get("kinds", kinds);
        if (t->contains("kinds")) {
            c.classifiers.clear();
            for (const auto& k : kinds) c.classifiers.push_back(ClassifierKind::parse(k));
            if (c.classifiers.empty()) throw ConfigError("'classifiers.kinds' must not be empty");
        }
        cr.get("ridge_gamma", c.ridge_gamma);
    }
    if (const auto* t = r.sub("tasks")) {
        Reader tr(*t, "tasks");
        tr.finish({"kinds", "exclude_gestures", "sequential"});
        std::vector<std::string> kinds;
        tr.get("kinds", kinds);
        if (t->contains("kinds")) {
            c.tasks.clear();
            for (const auto& k : kinds) c.tasks.push_back(parse_task(k));
        }
        tr.get("exclude_gestures", c.exclude_gestures);
        if (s.clear(), tr.get("sequential", s), !s.empty()) {
            const auto [p, g] = parse_feature_pair(s);
            c.sequential_position_features = p;
            c.sequential_gesture_features = g;
        }
    }

    if (c.jobs < 1) throw ConfigError("'jobs' must be >= 1");
    if (!(c.scale > 0.0)) throw ConfigError("'scale' must be positive");
    if (f.notch_hz != 50.0 && f.notch_hz != 60.0) throw ConfigError("'notch_hz' must be 50 or 60");
    if (!(c.ridge_gamma >= 0.0)) throw ConfigError("'classifiers.ridge_gamma' must be >= 0");
    c.pipeline.windows.check();
    c.pipeline.jobs = c.jobs;
    return c;
}

RunConfig load_run_config(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file '" + file.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str(), file.string());
}

}  // namespace myobench
