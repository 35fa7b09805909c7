#pragma once

#include "myobench/dataset.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <set>

namespace myobench {

/// On-disk sample encoding of trial stream files.
enum class Encoding {
    Csv,    // headerless CSV, one row per sample, one column per channel
    F32le,  // raw little-endian float32, row-major sample x channel
};

std::string_view to_string(Encoding e);
Encoding parse_encoding(std::string_view text);

struct BundleWriteOptions {
    Encoding encoding = Encoding::F32le;
    int csv_digits = 17;  // max_digits10 for double: exact round trip
    /// Arbitrary JSON echoed into the manifest under "provenance".
    nlohmann::json provenance = nlohmann::json::object();
};

inline constexpr const char* kManifestName = "manifest.json";

/// Random access to the trials of a bundle without loading all samples.
/// The constructor parses and checks the manifest (keys, names, declared
/// shapes); read_trial() loads and validates one trial's samples.
class BundleReader {
public:
    explicit BundleReader(const std::filesystem::path& dir);

    /// Names and dataset name; `trials` is empty.
    const Dataset& header() const { return header_; }
    std::size_t size() const { return trials_.size(); }
    const TrialKey& key(std::size_t i) const { return trials_.at(i).key; }
    const nlohmann::json& provenance() const { return provenance_; }

    /// Thread-safe.
    TrialRecord read_trial(std::size_t i) const;

private:
    struct StreamEntry {
        Modality modality;
        double sample_rate_hz;
        int channels;
        long samples;
        Encoding encoding;
        std::filesystem::path file;
    };
    struct TrialEntry {
        TrialKey key;
        std::vector<StreamEntry> streams;
    };

    std::filesystem::path dir_;
    Dataset header_;
    nlohmann::json provenance_;
    std::vector<TrialEntry> trials_;
};

/// Writes a bundle one trial at a time; the manifest is written by
/// finish(). Trials appear in the manifest in write order.
class BundleWriter {
public:
    BundleWriter(const std::filesystem::path& dir, const Dataset& header, const BundleWriteOptions& options = {});

    /// Throws DataError for an invalid trial or a repeated key.
    void write_trial(const TrialRecord& t);
    void finish();

private:
    std::filesystem::path dir_;
    Dataset header_;
    BundleWriteOptions options_;
    std::set<TrialKey> keys_;
    std::size_t with_position_ = 0;
    nlohmann::json trials_ = nlohmann::json::array();
    bool finished_ = false;
};

/// Reads a bundle directory (manifest.json plus one file per trial stream).
/// Throws DataError on missing manifest, declared/actual shape mismatch,
/// duplicate trial keys, non-finite samples, or any other invalid content.
Dataset load_bundle(const std::filesystem::path& dir);

/// The "provenance" object of a bundle manifest (empty object if absent).
nlohmann::json load_bundle_provenance(const std::filesystem::path& dir);

/// Writes a bundle. Output is byte-identical for identical inputs.
void save_bundle(const Dataset& d, const std::filesystem::path& dir, const BundleWriteOptions& options = {});

}  // namespace myobench
