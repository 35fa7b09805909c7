#pragma once

#include "myobench/dataset.hpp"
#include "myobench/windowing.hpp"

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace myobench {

/// Per-window descriptors. Every function takes one channel of one window.
namespace features {

/// Mean absolute value. Throws FeatureError on empty input.
double mav(std::span<const double> x);

/// Adjacent pairs whose signs differ and whose step is at least `threshold`.
/// sign() is three-valued, so entering or leaving an exact zero counts.
int zero_crossings(std::span<const double> x, double threshold = 0.0);

/// Interior samples that are strict local extrema with at least one side
/// step of `threshold` or more.
int slope_sign_changes(std::span<const double> x, double threshold = 0.0);

/// Sum of absolute first differences.
double waveform_length(std::span<const double> x);

/// Time-domain power spectral descriptors (six values in [-1, 1]).
///
/// Root moments m0 = sqrt(sum x^2), m2 = sqrt(sum dx^2), m4 = sqrt(sum ddx^2)
/// are power-normalized as m^l / l with l = 0.1. From them:
///   f1 = ln m0
///   f2 = ln(|m0 - m2| + eps)
///   f3 = ln(|m0 - m4| + eps)
///   f4 = ln(m0 / sqrt(|(m0 - m2)(m0 - m4)| + eps))
///   f5 = ln(m2 / sqrt(m0 m4 + eps))
///   f6 = ln((sum|dx| + eps) / (sum|ddx| + eps))
/// The same six are computed on y = ln(x^2 + eps), and fused as
/// F = -2 f(x) f(y) / (f(x)^2 + f(y)^2 + eps). Every logarithm argument is
/// floored at eps so degenerate windows stay finite.
std::array<double, 6> tdpsd(std::span<const double> x, double eps = 1e-10);

inline constexpr const char* kTdpsdVersion = "tdpsd-v1(lambda=0.1,eps=1e-10,log-floor=max(arg,eps))";

/// Middle order statistic; mean of the two middle values for even lengths.
double median(std::span<const double> x);

double rms(std::span<const double> x);

}  // namespace features

enum class FeatureSetKind { TD, TDPSD, MED, RMS };

/// CLI names: emg-td, emg-tdpsd, acc-med, acc-rms.
std::string_view to_string(FeatureSetKind k);
FeatureSetKind parse_feature_set(std::string_view text);
Modality modality_of(FeatureSetKind k);
std::vector<std::string> feature_names(FeatureSetKind k);
inline const std::array<FeatureSetKind, 4> kAllFeatureSets{FeatureSetKind::MED, FeatureSetKind::RMS,
                                                            FeatureSetKind::TD, FeatureSetKind::TDPSD};

struct FeatureOptions {
    double zc_threshold = 0.0;
    double ssc_threshold = 0.0;
    double tdpsd_epsilon = 1e-10;
    /// Permit e.g. TD on ACC windows.
    bool allow_modality_override = false;
};

struct RowLabel {
    int subject = 0;
    int gesture = 0;
    std::optional<int> position;
    int repetition = 1;
    int window = 0;
    double start_time_s = 0.0;

    bool operator==(const RowLabel&) const = default;
};

struct FeatureMatrix {
    FeatureSetKind kind = FeatureSetKind::TD;
    std::vector<std::string> columns;  // "ch{c}_{feature}", channel-major
    std::vector<RowLabel> labels;
    RowMatrix values;                   // rows x columns

    std::size_t rows() const { return labels.size(); }
    std::size_t dimension() const { return columns.size(); }
    std::span<const double> row(std::size_t i) const {
        return {values.data() + static_cast<long>(i) * values.cols(), static_cast<std::size_t>(values.cols())};
    }
    /// Rows at the given indices, in order.
    FeatureMatrix select(std::span<const std::size_t> indices) const;
};

/// Features of one window, channel-major.
std::vector<double> extract_window(const Window& w, FeatureSetKind kind, const FeatureOptions& options = {});

/// One row per window, in window order. `channel_offset` shifts column
/// names when several streams are concatenated. Throws FeatureError on
/// modality mismatch or heterogeneous channel counts.
FeatureMatrix extract(std::span<const Window> windows, FeatureSetKind kind, const FeatureOptions& options = {});

std::vector<std::string> column_names(FeatureSetKind kind, int channels, int channel_offset = 0);

}  // namespace myobench
