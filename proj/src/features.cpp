#include "myobench/features.hpp"

#include "myobench/error.hpp"

#include <algorithm>
#include <cmath>

namespace myobench {

namespace features {

namespace {

void require_length(std::span<const double> x, std::size_t n, const char* what) {
    if (x.size() < n)
        throw FeatureError(std::string(what) + " needs at least " + std::to_string(n) + " samples, got " +
                           std::to_string(x.size()));
}

int sign(double v) {
    return (v > 0.0) - (v < 0.0);
}

struct Moments {
    double m0, m2, m4;
    double sum_abs_d1, sum_abs_d2;
};

Moments root_moments(std::span<const double> x) {
    double s0 = 0.0, s2 = 0.0, s4 = 0.0, a1 = 0.0, a2 = 0.0;
    for (double v : x) s0 += v * v;
    for (std::size_t n = 1; n < x.size(); ++n) {
        const double d = x[n] - x[n - 1];
        s2 += d * d;
        a1 += std::abs(d);
    }
    for (std::size_t n = 2; n < x.size(); ++n) {
        // second difference of x: d1[n] - d1[n-1]
        const double dd = x[n] - 2.0 * x[n - 1] + x[n - 2];
        s4 += dd * dd;
        a2 += std::abs(dd);
    }
    return {std::sqrt(s0), std::sqrt(s2), std::sqrt(s4), a1, a2};
}

std::array<double, 6> descriptors(std::span<const double> x, double eps) {
    constexpr double lambda = 0.1;
    const Moments m = root_moments(x);
    const auto norm = [](double v) { return std::pow(v, lambda) / lambda; };
    const double m0 = norm(m.m0), m2 = norm(m.m2), m4 = norm(m.m4);
    const auto ln = [eps](double v) { return std::log(std::max(v, eps)); };
    return {ln(m0),
            ln(std::abs(m0 - m2) + eps),
            ln(std::abs(m0 - m4) + eps),
            ln(m0 / std::sqrt(std::abs((m0 - m2) * (m0 - m4)) + eps)),
            ln(m2 / std::sqrt(m0 * m4 + eps)),
            ln((m.sum_abs_d1 + eps) / (m.sum_abs_d2 + eps))};
}

}  // namespace

double mav(std::span<const double> x) {
    require_length(x, 1, "mav");
    double s = 0.0;
    for (double v : x) s += std::abs(v);
    return s / static_cast<double>(x.size());
}

int zero_crossings(std::span<const double> x, double threshold) {
    require_length(x, 2, "zero_crossings");
    int count = 0;
    for (std::size_t n = 0; n + 1 < x.size(); ++n)
        if (sign(x[n]) != sign(x[n + 1]) && std::abs(x[n] - x[n + 1]) >= threshold) ++count;
    return count;
}

int slope_sign_changes(std::span<const double> x, double threshold) {
    require_length(x, 3, "slope_sign_changes");
    int count = 0;
    for (std::size_t n = 1; n + 1 < x.size(); ++n) {
        const double left = x[n] - x[n - 1];
        const double right = x[n] - x[n + 1];
        if (left * right > 0.0 && std::max(std::abs(left), std::abs(right)) >= threshold) ++count;
    }
    return count;
}

double waveform_length(std::span<const double> x) {
    require_length(x, 2, "waveform_length");
    double s = 0.0;
    for (std::size_t n = 1; n < x.size(); ++n) s += std::abs(x[n] - x[n - 1]);
    return s;
}

std::array<double, 6> tdpsd(std::span<const double> x, double eps) {
    require_length(x, 3, "tdpsd");
    std::vector<double> y(x.size());
    std::transform(x.begin(), x.end(), y.begin(), [eps](double v) { return std::log(v * v + eps); });
    const auto fx = descriptors(x, eps);
    const auto fy = descriptors(y, eps);
    std::array<double, 6> out{};
    for (std::size_t i = 0; i < 6; ++i) out[i] = -2.0 * fx[i] * fy[i] / (fx[i] * fx[i] + fy[i] * fy[i] + eps);
    return out;
}

double median(std::span<const double> x) {
    require_length(x, 1, "median");
    std::vector<double> v(x.begin(), x.end());
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<long>(mid), v.end());
    if (v.size() % 2 == 1) return v[mid];
    const double upper = v[mid];
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<long>(mid));
    return 0.5 * (lower + upper);
}

double rms(std::span<const double> x) {
    require_length(x, 1, "rms");
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s / static_cast<double>(x.size()));
}

}  // namespace features

std::string_view to_string(FeatureSetKind k) {
    switch (k) {
        case FeatureSetKind::TD: return "emg-td";
        case FeatureSetKind::TDPSD: return "emg-tdpsd";
        case FeatureSetKind::MED: return "acc-med";
        case FeatureSetKind::RMS: return "acc-rms";
    }
    return "?";
}

FeatureSetKind parse_feature_set(std::string_view text) {
    for (auto k : kAllFeatureSets) {
        const auto name = to_string(k);
        if (text == name || text == name.substr(4)) return k;
    }
    throw ConfigError("unknown feature set '" + std::string(text) + "' (expected emg-td|emg-tdpsd|acc-med|acc-rms)");
}

Modality modality_of(FeatureSetKind k) {
    return (k == FeatureSetKind::TD || k == FeatureSetKind::TDPSD) ? Modality::EMG : Modality::ACC;
}

std::vector<std::string> feature_names(FeatureSetKind k) {
    switch (k) {
        case FeatureSetKind::TD: return {"mav", "zc", "ssc", "wl"};
        case FeatureSetKind::TDPSD: return {"psd1", "psd2", "psd3", "psd4", "psd5", "psd6"};
        case FeatureSetKind::MED: return {"med"};
        case FeatureSetKind::RMS: return {"rms"};
    }
    return {};
}

std::vector<std::string> column_names(FeatureSetKind kind, int channels, int channel_offset) {
    std::vector<std::string> out;
    const auto names = feature_names(kind);
    for (int c = 0; c < channels; ++c)
        for (const auto& f : names) out.push_back("ch" + std::to_string(c + channel_offset) + "_" + f);
    return out;
}

FeatureMatrix FeatureMatrix::select(std::span<const std::size_t> indices) const {
    FeatureMatrix out;
    out.kind = kind;
    out.columns = columns;
    out.values.resize(static_cast<long>(indices.size()), values.cols());
    out.labels.reserve(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        out.values.row(static_cast<long>(i)) = values.row(static_cast<long>(indices[i]));
        out.labels.push_back(labels[indices[i]]);
    }
    return out;
}

std::vector<double> extract_window(const Window& w, FeatureSetKind kind, const FeatureOptions& options) {
    if (w.modality != modality_of(kind) && !options.allow_modality_override)
        throw FeatureError(std::string(to_string(kind)) + " features requested for a " +
                           std::string(to_string(w.modality)) + " window");
    std::vector<double> out;
    for (long c = 0; c < w.samples.rows(); ++c) {
        const auto row = w.samples.row(c);
        const std::span<const double> x(row.data(), static_cast<std::size_t>(row.size()));
        switch (kind) {
            case FeatureSetKind::TD:
                out.push_back(features::mav(x));
                out.push_back(features::zero_crossings(x, options.zc_threshold));
                out.push_back(features::slope_sign_changes(x, options.ssc_threshold));
                out.push_back(features::waveform_length(x));
                break;
            case FeatureSetKind::TDPSD: {
                const auto f = features::tdpsd(x, options.tdpsd_epsilon);
                out.insert(out.end(), f.begin(), f.end());
                break;
            }
            case FeatureSetKind::MED: out.push_back(features::median(x)); break;
            case FeatureSetKind::RMS: out.push_back(features::rms(x)); break;
        }
    }
    for (double v : out)
        if (!std::isfinite(v)) throw FeatureError("non-finite feature value in window of " + to_string(w.key));
    return out;
}

FeatureMatrix extract(std::span<const Window> windows, FeatureSetKind kind, const FeatureOptions& options) {
    FeatureMatrix m;
    m.kind = kind;
    if (windows.empty()) return m;
    const long channels = windows.front().samples.rows();
    m.columns = column_names(kind, static_cast<int>(channels));
    m.values.resize(static_cast<long>(windows.size()), static_cast<long>(m.columns.size()));
    for (std::size_t i = 0; i < windows.size(); ++i) {
        const auto& w = windows[i];
        if (w.samples.rows() != channels)
            throw FeatureError("heterogeneous channel counts: " + std::to_string(channels) + " vs " +
                               std::to_string(w.samples.rows()));
        if (w.modality != windows.front().modality) throw FeatureError("windows mix modalities");
        const auto row = extract_window(w, kind, options);
        for (std::size_t j = 0; j < row.size(); ++j) m.values(static_cast<long>(i), static_cast<long>(j)) = row[j];
        m.labels.push_back({w.key.subject, w.key.gesture, w.key.position, w.key.repetition,
                            static_cast<int>(w.index), w.start_time_s});
    }
    return m;
}

}  // namespace myobench
