#pragma once

#include "myobench/dataset.hpp"

#include <complex>
#include <span>
#include <string>
#include <vector>

namespace myobench {

enum class FilterKind { Notch, Bandpass, Lowpass };

std::string_view to_string(FilterKind k);

struct FilterSpec {
    FilterKind kind = FilterKind::Lowpass;
    double sample_rate_hz = 0.0;
    int order = 2;            // Butterworth prototype order; the notch is always second order
    double center_hz = 0.0;   // notch
    double quality = 30.0;    // notch
    double low_hz = 0.0;      // bandpass
    double high_hz = 0.0;     // bandpass
    double cutoff_hz = 0.0;   // lowpass

    static FilterSpec notch(double center_hz, double quality, double sample_rate_hz);
    static FilterSpec bandpass(double low_hz, double high_hz, int order, double sample_rate_hz);
    static FilterSpec lowpass(double cutoff_hz, int order, double sample_rate_hz);
};

/// Bandpass high corners at or above Nyquist are moved to 0.45 * fs.
/// Other kinds are returned unchanged.
FilterSpec apply_nyquist_clamp(FilterSpec spec);

/// One second-order section, a0 normalized to 1. First-order sections
/// have b2 = a2 = 0.
struct Biquad {
    double b0 = 1.0, b1 = 0.0, b2 = 0.0;
    double a1 = 0.0, a2 = 0.0;

    int order() const { return (b2 != 0.0 || a2 != 0.0) ? 2 : ((b1 != 0.0 || a1 != 0.0) ? 1 : 0); }
    std::complex<double> response(double omega) const;
};

struct BiquadCascade {
    std::vector<Biquad> sections;
    int order = 0;  // sum of section orders

    /// Complex frequency response at `freq_hz`.
    std::complex<double> response(double freq_hz, double sample_rate_hz) const;
    double magnitude(double freq_hz, double sample_rate_hz) const { return std::abs(response(freq_hz, sample_rate_hz)); }
    /// Largest pole radius across sections.
    double max_pole_radius() const;
    /// Edge padding used by zero-phase application: 3x total order.
    int pad_length() const { return 3 * order; }
};

/// Realizes a Butterworth lowpass/bandpass (bilinear transform with
/// prewarping) or a second-order notch. Throws FilterError when a corner
/// lies outside (0, fs/2) after clamping, or order < 1.
BiquadCascade design_filter(const FilterSpec& spec);

/// Forward-backward filtering of one channel with odd-reflection padding
/// of pad_length() samples at both ends and steady-state section
/// initialization. Requires x.size() > pad_length().
std::vector<double> filtfilt(const BiquadCascade& c, std::span<const double> x);

/// Single causal pass starting from rest.
std::vector<double> lfilter(const BiquadCascade& c, std::span<const double> x);

/// Channel-wise filtfilt; throws FilterError when the stream is too short.
SignalStream apply_zero_phase(const BiquadCascade& c, const SignalStream& stream);

/// Channel-wise causal pass.
SignalStream apply_causal(const BiquadCascade& c, const SignalStream& stream);

}  // namespace myobench
