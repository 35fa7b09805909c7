#include "myobench/bundle.hpp"

#include "myobench/error.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

namespace myobench {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(Encoding e) {
    return e == Encoding::Csv ? "csv" : "f32le";
}

Encoding parse_encoding(std::string_view text) {
    if (text == "csv") return Encoding::Csv;
    if (text == "f32le") return Encoding::F32le;
    throw DataError("unknown encoding '" + std::string(text) + "'");
}

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

SampleMatrix read_csv_stream(const fs::path& path, int channels, long samples) {
    const std::string text = read_file(path);
    SampleMatrix m(channels, samples);
    long row = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        std::string_view line(text.data() + pos, eol - pos);
        pos = eol + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;

        if (row >= samples)
            throw DataError("sample count mismatch in " + path.string() + ": manifest declares " +
                            std::to_string(samples) + " rows, file has more");
        int col = 0;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            std::string_view cell = line.substr(start, comma == std::string_view::npos ? line.size() - start
                                                                                        : comma - start);
            while (!cell.empty() && cell.front() == ' ') cell.remove_prefix(1);
            while (!cell.empty() && cell.back() == ' ') cell.remove_suffix(1);
            if (col >= channels)
                throw DataError("channel mismatch in " + path.string() + ": manifest declares " +
                                std::to_string(channels) + " channels, row " + std::to_string(row + 1) +
                                " has more columns");
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec != std::errc() || ptr != cell.data() + cell.size()) {
                // from_chars rejects "nan"/"inf" spellings only partially; classify them explicitly.
                if (cell == "nan" || cell == "NaN" || cell == "inf" || cell == "-inf" || cell == "Inf")
                    throw DataError("non-finite sample value in " + path.string() + " row " +
                                    std::to_string(row + 1));
                throw DataError("unparsable value '" + std::string(cell) + "' in " + path.string());
            }
            if (!std::isfinite(v))
                throw DataError("non-finite sample value in " + path.string() + " row " + std::to_string(row + 1));
            m(col, row) = v;
            ++col;
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (col != channels)
            throw DataError("channel mismatch in " + path.string() + ": manifest declares " +
                            std::to_string(channels) + " channels, row " + std::to_string(row + 1) + " has " +
                            std::to_string(col));
        ++row;
    }
    if (row != samples)
        throw DataError("sample count mismatch in " + path.string() + ": manifest declares " +
                        std::to_string(samples) + " rows, file has " + std::to_string(row));
    return m;
}

SampleMatrix read_f32_stream(const fs::path& path, int channels, long samples) {
    const std::string bytes = read_file(path);
    const std::size_t expected = static_cast<std::size_t>(channels) * static_cast<std::size_t>(samples) * 4;
    if (bytes.size() != expected) {
        // A raw stream cannot say which dimension is off; a byte count that
        // is a whole number of declared-length rows points at the channels.
        const bool channels_off = bytes.size() % (static_cast<std::size_t>(samples) * 4) == 0;
        throw DataError(std::string(channels_off ? "channel mismatch" : "sample count mismatch") + " in " +
                        path.string() + ": expected " + std::to_string(expected) + " bytes, found " +
                        std::to_string(bytes.size()));
    }
    SampleMatrix m(channels, samples);
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    for (long n = 0; n < samples; ++n) {
        for (int c = 0; c < channels; ++c, p += 4) {
            const std::uint32_t bits = std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) |
                                       (std::uint32_t(p[2]) << 16) | (std::uint32_t(p[3]) << 24);
            const float f = std::bit_cast<float>(bits);
            if (!std::isfinite(f))
                throw DataError("non-finite sample value in " + path.string() + " row " + std::to_string(n + 1));
            m(c, n) = f;
        }
    }
    return m;
}

void write_csv_stream(const fs::path& path, const SampleMatrix& m, int digits) {
    std::string out;
    out.reserve(static_cast<std::size_t>(m.size()) * 12);
    char buf[64];
    for (long n = 0; n < m.cols(); ++n) {
        for (long c = 0; c < m.rows(); ++c) {
            if (c) out.push_back(',');
            const auto [ptr, ec] =
                std::to_chars(buf, buf + sizeof buf, m(c, n), std::chars_format::general, digits);
            out.append(buf, ptr);
        }
        out.push_back('\n');
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot write " + path.string());
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

void write_f32_stream(const fs::path& path, const SampleMatrix& m) {
    std::string out(static_cast<std::size_t>(m.size()) * 4, '\0');
    auto* p = reinterpret_cast<unsigned char*>(out.data());
    for (long n = 0; n < m.cols(); ++n) {
        for (long c = 0; c < m.rows(); ++c, p += 4) {
            const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(m(c, n)));
            p[0] = bits & 0xFF;
            p[1] = (bits >> 8) & 0xFF;
            p[2] = (bits >> 16) & 0xFF;
            p[3] = (bits >> 24) & 0xFF;
        }
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot write " + path.string());
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

std::map<int, std::string> read_name_map(const json& j) {
    std::map<int, std::string> out;
    for (const auto& [k, v] : j.items()) out.emplace(std::stoi(k), v.get<std::string>());
    return out;
}

json write_name_map(const std::map<int, std::string>& names) {
    json j = json::object();
    for (const auto& [k, v] : names) j[std::to_string(k)] = v;
    return j;
}

json read_manifest(const fs::path& dir) {
    const fs::path manifest = dir / kManifestName;
    if (!fs::exists(manifest)) throw DataError("missing manifest: " + manifest.string());
    try {
        return json::parse(read_file(manifest));
    } catch (const json::parse_error& e) {
        throw DataError("malformed manifest " + manifest.string() + ": " + e.what());
    }
}

std::string stream_file_name(const TrialKey& k, std::size_t index, Modality m, Encoding e) {
    std::string name = "s" + std::to_string(k.subject) + "_g" + std::to_string(k.gesture) + "_p" +
                       (k.position ? std::to_string(*k.position) : std::string("x")) + "_r" +
                       std::to_string(k.repetition) + "_" + std::to_string(index) + "_" +
                       (m == Modality::EMG ? "emg" : "acc");
    return name + (e == Encoding::Csv ? ".csv" : ".f32");
}

}  // namespace

BundleReader::BundleReader(const fs::path& dir) : dir_(dir) {
    const json manifest = read_manifest(dir);
    std::set<TrialKey> keys;
    std::size_t with_position = 0;
    try {
        header_.name = manifest.at("name").get<std::string>();
        header_.gesture_names = read_name_map(manifest.at("gesture_names"));
        if (manifest.contains("position_names")) header_.position_names = read_name_map(manifest.at("position_names"));
        provenance_ = manifest.contains("provenance") ? manifest.at("provenance") : json::object();
        const Encoding default_encoding = parse_encoding(manifest.value("encoding", std::string("csv")));

        for (const auto& jt : manifest.at("trials")) {
            TrialEntry t;
            t.key.subject = jt.at("subject").get<int>();
            t.key.gesture = jt.at("gesture").get<int>();
            if (jt.contains("position") && !jt.at("position").is_null()) t.key.position = jt.at("position").get<int>();
            t.key.repetition = jt.at("repetition").get<int>();
            if (!keys.insert(t.key).second) throw DataError("duplicate trial key " + to_string(t.key));
            if (t.key.position) ++with_position;

            for (const auto& js : jt.at("streams")) {
                StreamEntry s;
                s.modality = parse_modality(js.at("modality").get<std::string>());
                s.sample_rate_hz = js.at("sample_rate_hz").get<double>();
                s.channels = js.at("channels").get<int>();
                s.samples = js.at("samples").get<long>();
                if (s.channels < 1 || s.samples < 1)
                    throw DataError("stream of " + to_string(t.key) + " declares an empty shape");
                s.encoding = js.contains("encoding") ? parse_encoding(js.at("encoding").get<std::string>())
                                                     : default_encoding;
                s.file = dir / js.at("file").get<std::string>();
                t.streams.push_back(std::move(s));
            }
            trials_.push_back(std::move(t));
        }
    } catch (const json::exception& e) {
        throw DataError("malformed manifest in " + dir.string() + ": " + e.what());
    }
    if (with_position != 0 && with_position != trials_.size())
        throw DataError("invalid bundle " + dir.string() +
                        ": position labels present on some trials but absent on others");
}

TrialRecord BundleReader::read_trial(std::size_t i) const {
    const TrialEntry& e = trials_.at(i);
    TrialRecord t;
    t.key = e.key;
    for (const auto& s : e.streams) {
        SignalStream out;
        out.modality = s.modality;
        out.sample_rate_hz = s.sample_rate_hz;
        out.samples = s.encoding == Encoding::Csv ? read_csv_stream(s.file, s.channels, s.samples)
                                                  : read_f32_stream(s.file, s.channels, s.samples);
        t.streams.push_back(std::move(out));
    }
    const auto violations = validate_trial(header_, t);
    if (!violations.empty())
        throw DataError("invalid bundle " + dir_.string() + ": " + violations.front().trial + ": " +
                        violations.front().reason);
    return t;
}

Dataset load_bundle(const fs::path& dir) {
    const BundleReader reader(dir);
    Dataset d = reader.header();
    d.trials.reserve(reader.size());
    for (std::size_t i = 0; i < reader.size(); ++i) d.trials.push_back(reader.read_trial(i));
    return d;
}

json load_bundle_provenance(const fs::path& dir) {
    const json manifest = read_manifest(dir);
    return manifest.contains("provenance") ? manifest.at("provenance") : json::object();
}

BundleWriter::BundleWriter(const fs::path& dir, const Dataset& header, const BundleWriteOptions& options)
    : dir_(dir), options_(options) {
    header_.name = header.name;
    header_.gesture_names = header.gesture_names;
    header_.position_names = header.position_names;
    fs::create_directories(dir / "trials");
}

void BundleWriter::write_trial(const TrialRecord& t) {
    if (finished_) throw DataError("bundle writer already finished");
    const auto violations = validate_trial(header_, t);
    if (!violations.empty())
        throw DataError("refusing to save invalid dataset: " + violations.front().trial + ": " +
                        violations.front().reason);
    if (!keys_.insert(t.key).second)
        throw DataError("refusing to save invalid dataset: " + to_string(t.key) + ": duplicate key");
    if (t.key.position) ++with_position_;

    json jt;
    jt["subject"] = t.key.subject;
    jt["gesture"] = t.key.gesture;
    jt["position"] = t.key.position ? json(*t.key.position) : json(nullptr);
    jt["repetition"] = t.key.repetition;
    json streams = json::array();
    for (std::size_t i = 0; i < t.streams.size(); ++i) {
        const auto& s = t.streams[i];
        const std::string rel = "trials/" + stream_file_name(t.key, i, s.modality, options_.encoding);
        if (options_.encoding == Encoding::Csv)
            write_csv_stream(dir_ / rel, s.samples, options_.csv_digits);
        else
            write_f32_stream(dir_ / rel, s.samples);
        streams.push_back({{"modality", std::string(to_string(s.modality))},
                           {"channels", s.channel_count()},
                           {"sample_rate_hz", s.sample_rate_hz},
                           {"file", rel},
                           {"samples", s.sample_count()}});
    }
    jt["streams"] = std::move(streams);
    trials_.push_back(std::move(jt));
}

void BundleWriter::finish() {
    if (finished_) return;
    if (with_position_ != 0 && with_position_ != keys_.size())
        throw DataError("refusing to save invalid dataset: position labels present on some trials but absent on others");
    json manifest;
    manifest["format"] = "myobench-bundle";
    manifest["version"] = 1;
    manifest["name"] = header_.name;
    manifest["encoding"] = std::string(to_string(options_.encoding));
    manifest["gesture_names"] = write_name_map(header_.gesture_names);
    manifest["position_names"] = write_name_map(header_.position_names);
    if (!options_.provenance.empty()) manifest["provenance"] = options_.provenance;
    manifest["trials"] = std::move(trials_);

    std::ofstream out(dir_ / kManifestName, std::ios::binary);
    if (!out) throw DataError("cannot write manifest in " + dir_.string());
    out << manifest.dump(1) << '\n';
    finished_ = true;
}

void save_bundle(const Dataset& d, const fs::path& dir, const BundleWriteOptions& options) {
    const auto violations = validate(d);
    if (!violations.empty())
        throw DataError("refusing to save invalid dataset: " + violations.front().trial + ": " +
                        violations.front().reason);
    BundleWriter w(dir, d, options);
    for (const auto& t : d.trials) w.write_trial(t);
    w.finish();
}

}  // namespace myobench
