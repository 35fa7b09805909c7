#include "myobench/dataset.hpp"

#include "myobench/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace myobench {

std::string_view to_string(Modality m) {
    return m == Modality::EMG ? "EMG" : "ACC";
}

Modality parse_modality(std::string_view text) {
    if (text == "EMG" || text == "emg") return Modality::EMG;
    if (text == "ACC" || text == "acc") return Modality::ACC;
    throw DataError("unknown modality '" + std::string(text) + "'");
}

std::string to_string(const TrialKey& key) {
    std::string s = "s" + std::to_string(key.subject) + "/g" + std::to_string(key.gesture) + "/p";
    s += key.position ? std::to_string(*key.position) : std::string("-");
    s += "/r" + std::to_string(key.repetition);
    return s;
}

bool Dataset::has_positions() const {
    return !trials.empty() &&
           std::all_of(trials.begin(), trials.end(), [](const TrialRecord& t) { return t.key.position.has_value(); });
}

std::set<int> Dataset::subjects() const {
    std::set<int> out;
    for (const auto& t : trials) out.insert(t.key.subject);
    return out;
}

std::set<int> Dataset::gestures() const {
    std::set<int> out;
    for (const auto& t : trials) out.insert(t.key.gesture);
    return out;
}

std::vector<Violation> validate_trial(const Dataset& header, const TrialRecord& t) {
    std::vector<Violation> out;
    const std::string id = to_string(t.key);
    if (t.key.repetition < 1) out.push_back({id, "repetition must be >= 1"});
    if (!header.gesture_names.contains(t.key.gesture)) out.push_back({id, "gesture id has no name entry"});
    if (t.key.position && !header.position_names.contains(*t.key.position))
        out.push_back({id, "position id has no name entry"});
    if (t.streams.empty()) {
        out.push_back({id, "trial has no streams"});
        return out;
    }

    double slowest_period = 0.0;
    double min_duration = std::numeric_limits<double>::infinity();
    double max_duration = 0.0;
    bool timing_ok = true;
    for (const auto& s : t.streams) {
        if (!(s.sample_rate_hz > 0.0) || !std::isfinite(s.sample_rate_hz)) {
            out.push_back({id, "sample rate must be positive"});
            timing_ok = false;
            continue;
        }
        if (s.channel_count() < 1 || s.sample_count() < 1) {
            out.push_back({id, "stream must have at least one channel and one sample"});
            timing_ok = false;
            continue;
        }
        if (!s.samples.allFinite()) out.push_back({id, "non-finite sample value"});
        slowest_period = std::max(slowest_period, 1.0 / s.sample_rate_hz);
        min_duration = std::min(min_duration, s.duration_s());
        max_duration = std::max(max_duration, s.duration_s());
    }
    if (timing_ok && max_duration - min_duration > slowest_period * (1.0 + 1e-9))
        out.push_back({id, "stream durations differ by more than one sample period"});
    return out;
}

std::vector<Violation> validate(const Dataset& d) {
    std::vector<Violation> out;
    std::set<TrialKey> seen;
    std::size_t with_position = 0;

    for (const auto& t : d.trials) {
        if (!seen.insert(t.key).second) out.push_back({to_string(t.key), "duplicate key"});
        if (t.key.position) ++with_position;
        auto v = validate_trial(d, t);
        out.insert(out.end(), v.begin(), v.end());
    }

    if (with_position != 0 && with_position != d.trials.size())
        out.push_back({"dataset", "position labels present on some trials but absent on others"});
    return out;
}

Dataset filter_subset(const Dataset& d, const GestureSubset& s) {
    if (s.gesture_ids.empty()) throw DataError("gesture subset '" + s.name + "' is empty");
    const auto present = d.gestures();
    for (int g : s.gesture_ids) {
        if (!present.contains(g))
            throw DataError("gesture subset '" + s.name + "' references gesture " + std::to_string(g) +
                            " absent from dataset '" + d.name + "'");
    }

    Dataset out;
    out.name = d.name;
    out.position_names = d.position_names;
    for (const auto& [id, name] : d.gesture_names)
        if (s.gesture_ids.contains(id)) out.gesture_names.emplace(id, name);
    for (const auto& t : d.trials)
        if (s.gesture_ids.contains(t.key.gesture)) out.trials.push_back(t);
    return out;
}

GestureSubset load_subset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open gesture subset file " + path.string());
    nlohmann::json j;
    try {
        in >> j;
        GestureSubset s;
        s.name = j.at("name").get<std::string>();
        for (const auto& id : j.at("gesture_ids")) s.gesture_ids.insert(id.get<int>());
        if (s.gesture_ids.empty()) throw DataError("gesture subset '" + s.name + "' is empty");
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed gesture subset " + path.string() + ": " + e.what());
    }
}

void save_subset(const GestureSubset& s, const std::filesystem::path& path) {
    nlohmann::json j;
    j["name"] = s.name;
    j["gesture_ids"] = s.gesture_ids;
    std::ofstream out(path);
    if (!out) throw DataError("cannot write gesture subset file " + path.string());
    out << j.dump(2) << '\n';
}

}  // namespace myobench
