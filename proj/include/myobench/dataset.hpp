#pragma once

#include <Eigen/Core>

#include <compare>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace myobench {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Channel-by-sample storage. Row-major so each channel is contiguous.
using SampleMatrix = RowMatrix;

enum class Modality { EMG, ACC };

std::string_view to_string(Modality m);
Modality parse_modality(std::string_view text);

struct SignalStream {
    Modality modality = Modality::EMG;
    double sample_rate_hz = 0.0;
    SampleMatrix samples;  // channels x N

    int channel_count() const { return static_cast<int>(samples.rows()); }
    long sample_count() const { return static_cast<long>(samples.cols()); }
    double duration_s() const { return static_cast<double>(samples.cols()) / sample_rate_hz; }
};

/// Identifies one repetition of one gesture by one subject. An absent
/// position means the recording protocol did not fix a limb position.
struct TrialKey {
    int subject = 0;
    int gesture = 0;
    std::optional<int> position;
    int repetition = 1;

    auto operator<=>(const TrialKey&) const = default;
};

std::string to_string(const TrialKey& key);

struct TrialRecord {
    TrialKey key;
    std::vector<SignalStream> streams;
};

struct Dataset {
    std::string name;
    std::vector<TrialRecord> trials;
    std::map<int, std::string> gesture_names;
    std::map<int, std::string> position_names;

    bool has_positions() const;
    std::set<int> subjects() const;
    std::set<int> gestures() const;
};

struct GestureSubset {
    std::string name;
    std::set<int> gesture_ids;
};

struct Violation {
    std::string trial;   // to_string(TrialKey), or "dataset" for dataset-level issues
    std::string reason;

    bool operator==(const Violation&) const = default;
};

/// The per-trial subset of validate(): labels against the name tables of
/// `header`, stream shapes, rates, finiteness, and duration agreement.
std::vector<Violation> validate_trial(const Dataset& header, const TrialRecord& t);

/// Checks every structural invariant; an empty result means the dataset is well formed.
std::vector<Violation> validate(const Dataset& d);

/// Keeps only trials whose gesture is in the subset. Throws DataError when
/// the subset names a gesture the dataset does not contain.
Dataset filter_subset(const Dataset& d, const GestureSubset& s);

GestureSubset load_subset(const std::filesystem::path& path);
void save_subset(const GestureSubset& s, const std::filesystem::path& path);

}  // namespace myobench
