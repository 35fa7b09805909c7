#include "myobench/feature_store.hpp"

#include "myobench/error.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace myobench {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void append_number(std::string& out, double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, ptr);
}

std::string file_name(int subject, FeatureSetKind kind) {
    return "subject" + std::to_string(subject) + "_" + std::string(to_string(kind)) + ".csv";
}

json names_json(const std::map<int, std::string>& m) {
    json j = json::object();
    for (const auto& [k, v] : m) j[std::to_string(k)] = v;
    return j;
}

std::map<int, std::string> names_from(const json& j) {
    std::map<int, std::string> m;
    for (const auto& [k, v] : j.items()) m.emplace(std::stoi(k), v.get<std::string>());
    return m;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

template <typename T>
T parse_number(std::string_view cell, const fs::path& file) {
    T v{};
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size())
        throw DataError("unparsable value '" + std::string(cell) + "' in " + file.string());
    return v;
}

constexpr std::size_t kLabelColumns = 5;

}  // namespace

void write_feature_store(const FeatureSet& set, const fs::path& dir, const json& provenance) {
    fs::create_directories(dir);
    json index;
    index["format"] = "myobench-feature-store";
    index["version"] = 1;
    index["dataset"] = set.dataset_name;
    index["gesture_names"] = names_json(set.gesture_names);
    index["position_names"] = names_json(set.position_names);
    index["provenance"] = provenance;
    json files = json::array();
    const std::string comment = "# " + provenance.dump() + "\n";

    for (const auto& [kind, m] : set.tables) {
        std::map<int, std::vector<std::size_t>> by_subject;
        for (std::size_t i = 0; i < m.rows(); ++i) by_subject[m.labels[i].subject].push_back(i);
        for (const auto& [subject, rows] : by_subject) {
            std::string out = comment + "gesture,position,repetition,window,window_start_s";
            for (const auto& c : m.columns) out += "," + c;
            out += "\n";
            for (auto i : rows) {
                const auto& l = m.labels[i];
                out += std::to_string(l.gesture) + "," + (l.position ? std::to_string(*l.position) : "") + "," +
                       std::to_string(l.repetition) + "," + std::to_string(l.window) + ",";
                append_number(out, l.start_time_s);
                for (double v : m.row(i)) {
                    out.push_back(',');
                    append_number(out, v);
                }
                out.push_back('\n');
            }
            const std::string name = file_name(subject, kind);
            std::ofstream f(dir / name, std::ios::binary);
            if (!f) throw DataError("cannot write " + (dir / name).string());
            f << out;
            files.push_back({{"subject", subject}, {"kind", std::string(to_string(kind))}, {"file", name},
                             {"rows", rows.size()}});
        }
    }
    index["files"] = std::move(files);
    std::ofstream f(dir / kStoreIndexName, std::ios::binary);
    if (!f) throw DataError("cannot write " + (dir / kStoreIndexName).string());
    f << index.dump(1) << '\n';
}

namespace {

json read_index(const fs::path& dir) {
    std::ifstream in(dir / kStoreIndexName);
    if (!in) throw DataError("missing feature store index " + (dir / kStoreIndexName).string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw DataError("malformed feature store index: " + std::string(e.what()));
    }
}

}  // namespace

json read_feature_store_provenance(const fs::path& dir) {
    return read_index(dir).value("provenance", json::object());
}

FeatureSet read_feature_store(const fs::path& dir) {
    const json index = read_index(dir);
    FeatureSet set;
    set.dataset_name = index.at("dataset").get<std::string>();
    set.gesture_names = names_from(index.at("gesture_names"));
    set.position_names = names_from(index.at("position_names"));

    // kind -> subject -> file
    std::map<FeatureSetKind, std::map<int, std::string>> files;
    for (const auto& f : index.at("files"))
        files[parse_feature_set(f.at("kind").get<std::string>())][f.at("subject").get<int>()] =
            f.at("file").get<std::string>();

    for (const auto& [kind, by_subject] : files) {
        FeatureMatrix m;
        m.kind = kind;
        std::vector<double> values;
        for (const auto& [subject, name] : by_subject) {
            const fs::path path = dir / name;
            std::ifstream in(path);
            if (!in) throw DataError("missing feature file " + path.string());
            std::string line;
            bool header_seen = false;
            while (std::getline(in, line)) {
                if (line.empty() || line.front() == '#') continue;
                const auto cells = split(line);
                if (!header_seen) {
                    header_seen = true;
                    std::vector<std::string> columns(cells.begin() + kLabelColumns, cells.end());
                    if (m.columns.empty())
                        m.columns = columns;
                    else if (m.columns != columns)
                        throw DataError("feature columns differ across subjects in " + path.string());
                    continue;
                }
                if (cells.size() != kLabelColumns + m.columns.size())
                    throw DataError("row with " + std::to_string(cells.size()) + " cells in " + path.string());
                RowLabel l;
                l.subject = subject;
                l.gesture = parse_number<int>(cells[0], path);
                if (!cells[1].empty()) l.position = parse_number<int>(cells[1], path);
                l.repetition = parse_number<int>(cells[2], path);
                l.window = parse_number<int>(cells[3], path);
                l.start_time_s = parse_number<double>(cells[4], path);
                for (std::size_t c = kLabelColumns; c < cells.size(); ++c)
                    values.push_back(parse_number<double>(cells[c], path));
                m.labels.push_back(l);
            }
        }
        m.values = Eigen::Map<const RowMatrix>(values.data(), static_cast<long>(m.labels.size()),
                                               static_cast<long>(m.columns.size()));
        set.tables.emplace(kind, std::move(m));
    }
    return set;
}

}  // namespace myobench
