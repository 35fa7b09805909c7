#pragma once

#include "myobench/dataset.hpp"

#include <vector>

namespace myobench {

/// How window start samples are placed on a stream.
///  - Sample: window k starts at k * floor(increment_ms * fs / 1000).
///  - Time:   window k starts at floor(k * increment_ms * fs / 1000), so
///            streams of different rates stay aligned in wall-clock time
///            even when the increment is a fractional number of samples.
/// Both coincide whenever increment_ms * fs / 1000 is an integer.
enum class WindowAnchor { Time, Sample };

std::string_view to_string(WindowAnchor a);
WindowAnchor parse_window_anchor(std::string_view text);

struct WindowSpec {
    double length_ms = 200.0;
    double increment_ms = 100.0;
    WindowAnchor anchor = WindowAnchor::Time;

    /// Throws ConfigError unless 0 < increment_ms <= length_ms.
    void check() const;
};

/// floor(ms * fs / 1000), tolerant of binary rounding just below an integer.
long samples_for_ms(double ms, double sample_rate_hz);

/// floor((n - length) / increment) + 1, or 0 when n < length.
long window_count(long n, long length, long increment);

/// Start sample of every window that fits in a stream of n samples.
std::vector<long> window_starts(long n, double sample_rate_hz, const WindowSpec& spec);

struct Window {
    TrialKey key;
    Modality modality = Modality::EMG;
    std::size_t index = 0;       // position in the trial's window sequence
    long start_sample = 0;
    double start_time_s = 0.0;
    double sample_rate_hz = 0.0;
    SampleMatrix samples;        // channels x L
};

struct TrialWindows {
    TrialKey key;
    /// Windows of each stream, aligned with TrialRecord::streams.
    std::vector<std::vector<Window>> per_stream;
    /// Number of windows shared by every stream; window k of each stream
    /// belongs to the same analysis frame.
    std::size_t paired_count = 0;
};

/// Segments one stream. Throws DataError when shorter than one window.
std::vector<Window> segment_stream(const TrialKey& key, const SignalStream& s, const WindowSpec& spec);

/// Segments every stream of a trial and pairs windows across streams by index.
TrialWindows segment_windows(const TrialRecord& t, const WindowSpec& spec = {});

}  // namespace myobench
