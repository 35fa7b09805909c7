#include "myobench/windowing.hpp"

#include "myobench/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace myobench {

namespace {

long guarded_floor(double x) {
    return static_cast<long>(std::floor(x + 1e-9 * std::max(1.0, std::abs(x))));
}

}  // namespace

std::string_view to_string(WindowAnchor a) {
    return a == WindowAnchor::Time ? "time" : "sample";
}

WindowAnchor parse_window_anchor(std::string_view text) {
    if (text == "time") return WindowAnchor::Time;
    if (text == "sample") return WindowAnchor::Sample;
    throw ConfigError("unknown window anchor '" + std::string(text) + "' (expected time|sample)");
}

void WindowSpec::check() const {
    if (!(length_ms > 0.0)) throw ConfigError("window length must be positive");
    if (!(increment_ms > 0.0)) throw ConfigError("window increment must be positive");
    if (increment_ms > length_ms) throw ConfigError("window increment must not exceed window length");
}

long samples_for_ms(double ms, double sample_rate_hz) {
    return guarded_floor(ms * sample_rate_hz / 1000.0);
}

long window_count(long n, long length, long increment) {
    if (length < 1 || increment < 1 || n < length) return 0;
    return (n - length) / increment + 1;
}

std::vector<long> window_starts(long n, double sample_rate_hz, const WindowSpec& spec) {
    spec.check();
    const long length = samples_for_ms(spec.length_ms, sample_rate_hz);
    const long increment = samples_for_ms(spec.increment_ms, sample_rate_hz);
    if (length < 1 || increment < 1)
        throw DataError("window of " + std::to_string(spec.length_ms) + "/" + std::to_string(spec.increment_ms) +
                        " ms is shorter than one sample at " + std::to_string(sample_rate_hz) + " Hz");

    std::vector<long> starts;
    if (spec.anchor == WindowAnchor::Sample) {
        const long count = window_count(n, length, increment);
        for (long k = 0; k < count; ++k) starts.push_back(k * increment);
    } else {
        const double step = spec.increment_ms * sample_rate_hz / 1000.0;
        for (long k = 0;; ++k) {
            const long start = guarded_floor(static_cast<double>(k) * step);
            if (start + length > n) break;
            starts.push_back(start);
        }
    }
    return starts;
}

std::vector<Window> segment_stream(const TrialKey& key, const SignalStream& s, const WindowSpec& spec) {
    const long length = samples_for_ms(spec.length_ms, s.sample_rate_hz);
    const auto starts = window_starts(s.sample_count(), s.sample_rate_hz, spec);
    if (starts.empty())
        throw DataError("stream of " + to_string(key) + " (" + std::to_string(s.sample_count()) +
                        " samples) is shorter than one " + std::to_string(spec.length_ms) + " ms window");

    std::vector<Window> out;
    out.reserve(starts.size());
    for (std::size_t k = 0; k < starts.size(); ++k) {
        Window w;
        w.key = key;
        w.modality = s.modality;
        w.index = k;
        w.start_sample = starts[k];
        w.start_time_s = static_cast<double>(starts[k]) / s.sample_rate_hz;
        w.sample_rate_hz = s.sample_rate_hz;
        w.samples = s.samples.middleCols(starts[k], length);
        out.push_back(std::move(w));
    }
    return out;
}

TrialWindows segment_windows(const TrialRecord& t, const WindowSpec& spec) {
    TrialWindows out;
    out.key = t.key;
    std::size_t paired = std::numeric_limits<std::size_t>::max();
    for (const auto& s : t.streams) {
        out.per_stream.push_back(segment_stream(t.key, s, spec));
        paired = std::min(paired, out.per_stream.back().size());
    }
    out.paired_count = t.streams.empty() ? 0 : paired;
    return out;
}

}  // namespace myobench
