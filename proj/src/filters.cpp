#include "myobench/filters.hpp"

#include "myobench/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace myobench {

using cplx = std::complex<double>;

std::string_view to_string(FilterKind k) {
    switch (k) {
        case FilterKind::Notch: return "notch";
        case FilterKind::Bandpass: return "bandpass";
        case FilterKind::Lowpass: return "lowpass";
    }
    return "?";
}

FilterSpec FilterSpec::notch(double center_hz, double quality, double sample_rate_hz) {
    FilterSpec s;
    s.kind = FilterKind::Notch;
    s.order = 2;
    s.center_hz = center_hz;
    s.quality = quality;
    s.sample_rate_hz = sample_rate_hz;
    return s;
}

FilterSpec FilterSpec::bandpass(double low_hz, double high_hz, int order, double sample_rate_hz) {
    FilterSpec s;
    s.kind = FilterKind::Bandpass;
    s.order = order;
    s.low_hz = low_hz;
    s.high_hz = high_hz;
    s.sample_rate_hz = sample_rate_hz;
    return s;
}

FilterSpec FilterSpec::lowpass(double cutoff_hz, int order, double sample_rate_hz) {
    FilterSpec s;
    s.kind = FilterKind::Lowpass;
    s.order = order;
    s.cutoff_hz = cutoff_hz;
    s.sample_rate_hz = sample_rate_hz;
    return s;
}

FilterSpec apply_nyquist_clamp(FilterSpec spec) {
    if (spec.kind == FilterKind::Bandpass && spec.high_hz >= spec.sample_rate_hz / 2.0)
        spec.high_hz = 0.45 * spec.sample_rate_hz;
    return spec;
}

cplx Biquad::response(double omega) const {
    const cplx z1 = std::polar(1.0, -omega);
    const cplx z2 = z1 * z1;
    return (b0 + b1 * z1 + b2 * z2) / (1.0 + a1 * z1 + a2 * z2);
}

cplx BiquadCascade::response(double freq_hz, double sample_rate_hz) const {
    const double omega = 2.0 * std::numbers::pi * freq_hz / sample_rate_hz;
    cplx h = 1.0;
    for (const auto& s : sections) h *= s.response(omega);
    return h;
}

double BiquadCascade::max_pole_radius() const {
    double r = 0.0;
    for (const auto& s : sections) {
        // roots of z^2 + a1 z + a2
        const cplx disc = std::sqrt(cplx(s.a1 * s.a1 - 4.0 * s.a2, 0.0));
        r = std::max({r, std::abs((-s.a1 + disc) / 2.0), std::abs((-s.a1 - disc) / 2.0)});
    }
    return r;
}

namespace {

void require_inside_nyquist(double f, double fs, const char* what) {
    if (!(f > 0.0) || !(f < fs / 2.0))
        throw FilterError(std::string(what) + " " + std::to_string(f) + " Hz is outside (0, " +
                          std::to_string(fs / 2.0) + ") Hz");
}

double prewarp(double f, double fs) {
    return 2.0 * fs * std::tan(std::numbers::pi * f / fs);
}

cplx bilinear(cplx s, double fs) {
    return (2.0 * fs + s) / (2.0 * fs - s);
}

std::vector<cplx> butterworth_prototype(int n) {
    std::vector<cplx> poles;
    for (int k = 0; k < n; ++k)
        poles.push_back(std::polar(1.0, std::numbers::pi * (2.0 * k + n + 1) / (2.0 * n)));
    return poles;
}

/// Groups digital poles into denominator sections: conjugate pairs first
/// (ordered by angle), then real poles two at a time.
std::vector<std::pair<double, double>> pole_sections(const std::vector<cplx>& poles) {
    std::vector<cplx> upper;
    std::vector<double> reals;
    for (const auto& p : poles) {
        if (std::abs(p.imag()) <= 1e-12 * std::max(1.0, std::abs(p)))
            reals.push_back(p.real());
        else if (p.imag() > 0)
            upper.push_back(p);
    }
    std::sort(upper.begin(), upper.end(), [](cplx a, cplx b) { return std::arg(a) < std::arg(b); });
    std::sort(reals.begin(), reals.end());

    std::vector<std::pair<double, double>> out;
    for (const auto& p : upper) out.emplace_back(-2.0 * p.real(), std::norm(p));
    for (std::size_t i = 0; i + 1 < reals.size(); i += 2)
        out.emplace_back(-(reals[i] + reals[i + 1]), reals[i] * reals[i + 1]);
    if (reals.size() % 2 == 1) out.emplace_back(-reals.back(), 0.0);
    return out;
}

BiquadCascade design_lowpass(const FilterSpec& spec) {
    const double fs = spec.sample_rate_hz;
    require_inside_nyquist(spec.cutoff_hz, fs, "lowpass cutoff");
    const double wc = prewarp(spec.cutoff_hz, fs);

    std::vector<cplx> poles;
    for (const auto& p : butterworth_prototype(spec.order)) poles.push_back(bilinear(p * wc, fs));

    BiquadCascade c;
    for (const auto& [a1, a2] : pole_sections(poles)) {
        Biquad s;
        s.a1 = a1;
        s.a2 = a2;
        if (a2 == 0.0) {
            s.b0 = 1.0, s.b1 = 1.0, s.b2 = 0.0;  // zero at z = -1
        } else {
            s.b0 = 1.0, s.b1 = 2.0, s.b2 = 1.0;  // double zero at z = -1
        }
        const double g = (1.0 + s.a1 + s.a2) / (s.b0 + s.b1 + s.b2);
        s.b0 *= g, s.b1 *= g, s.b2 *= g;
        c.order += s.order();
        c.sections.push_back(s);
    }
    return c;
}

BiquadCascade design_bandpass(const FilterSpec& spec) {
    const double fs = spec.sample_rate_hz;
    require_inside_nyquist(spec.low_hz, fs, "bandpass low corner");
    require_inside_nyquist(spec.high_hz, fs, "bandpass high corner");
    if (!(spec.low_hz < spec.high_hz))
        throw FilterError("bandpass low corner " + std::to_string(spec.low_hz) + " Hz must be below high corner " +
                          std::to_string(spec.high_hz) + " Hz");
    const double wl = prewarp(spec.low_hz, fs);
    const double wh = prewarp(spec.high_hz, fs);
    const double bw = wh - wl;
    const double w0 = std::sqrt(wl * wh);

    std::vector<cplx> poles;
    for (const auto& p : butterworth_prototype(spec.order)) {
        const cplx half = p * bw / 2.0;
        const cplx root = std::sqrt(half * half - w0 * w0);
        poles.push_back(bilinear(half + root, fs));
        poles.push_back(bilinear(half - root, fs));
    }

    // The analog prototype has unit gain at w0; bilinear maps it here.
    const double omega_center = 2.0 * std::atan(w0 / (2.0 * fs));
    BiquadCascade c;
    for (const auto& [a1, a2] : pole_sections(poles)) {
        Biquad s;
        s.a1 = a1;
        s.a2 = a2;
        s.b0 = 1.0, s.b1 = 0.0, s.b2 = -1.0;  // zeros at z = +1 and z = -1
        const double g = 1.0 / std::abs(s.response(omega_center));
        s.b0 *= g, s.b2 *= g;
        c.order += s.order();
        c.sections.push_back(s);
    }
    return c;
}

BiquadCascade design_notch(const FilterSpec& spec) {
    const double fs = spec.sample_rate_hz;
    require_inside_nyquist(spec.center_hz, fs, "notch center");
    if (!(spec.quality > 0.0)) throw FilterError("notch quality factor must be positive");
    const double w0 = 2.0 * std::numbers::pi * spec.center_hz / fs;
    const double bw = w0 / spec.quality;
    const double beta = std::tan(bw / 2.0);
    const double gain = 1.0 / (1.0 + beta);

    Biquad s;
    s.b0 = gain;
    s.b1 = -2.0 * gain * std::cos(w0);
    s.b2 = gain;
    s.a1 = -2.0 * gain * std::cos(w0);
    s.a2 = 2.0 * gain - 1.0;
    BiquadCascade c;
    c.sections.push_back(s);
    c.order = 2;
    return c;
}

/// Steady-state DF2T state per unit input, chained through the cascade.
std::vector<std::pair<double, double>> steady_state(const BiquadCascade& c) {
    std::vector<std::pair<double, double>> zi;
    double scale = 1.0;
    for (const auto& s : c.sections) {
        const double g = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
        zi.emplace_back(scale * (g - s.b0), scale * (s.b2 - s.a2 * g));
        scale *= g;
    }
    return zi;
}

void run_cascade(const BiquadCascade& c, std::vector<double>& x, const std::vector<std::pair<double, double>>* zi,
                 double x0) {
    for (std::size_t k = 0; k < c.sections.size(); ++k) {
        const auto& s = c.sections[k];
        double s1 = zi ? (*zi)[k].first * x0 : 0.0;
        double s2 = zi ? (*zi)[k].second * x0 : 0.0;
        for (double& v : x) {
            const double in = v;
            const double out = s.b0 * in + s1;
            s1 = s.b1 * in - s.a1 * out + s2;
            s2 = s.b2 * in - s.a2 * out;
            v = out;
        }
    }
}

}  // namespace

BiquadCascade design_filter(const FilterSpec& raw) {
    if (!(raw.sample_rate_hz > 0.0)) throw FilterError("sample rate must be positive");
    if (raw.order < 1) throw FilterError("filter order must be >= 1");
    const FilterSpec spec = apply_nyquist_clamp(raw);

    BiquadCascade c;
    switch (spec.kind) {
        case FilterKind::Notch: c = design_notch(spec); break;
        case FilterKind::Bandpass: c = design_bandpass(spec); break;
        case FilterKind::Lowpass: c = design_lowpass(spec); break;
    }
    if (!(c.max_pole_radius() < 1.0))
        throw FilterError(std::string(to_string(spec.kind)) + " design is unstable (pole radius " +
                          std::to_string(c.max_pole_radius()) + ")");
    return c;
}

std::vector<double> lfilter(const BiquadCascade& c, std::span<const double> x) {
    std::vector<double> y(x.begin(), x.end());
    run_cascade(c, y, nullptr, 0.0);
    return y;
}

std::vector<double> filtfilt(const BiquadCascade& c, std::span<const double> x) {
    const auto n = static_cast<long>(x.size());
    const long pad = c.pad_length();
    if (n <= pad)
        throw FilterError("stream of " + std::to_string(n) + " samples is too short for zero-phase padding of " +
                          std::to_string(pad) + " samples");

    std::vector<double> ext;
    ext.reserve(static_cast<std::size_t>(n + 2 * pad));
    for (long i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[static_cast<std::size_t>(i)]);
    ext.insert(ext.end(), x.begin(), x.end());
    for (long i = n - 2; i >= n - 1 - pad; --i) ext.push_back(2.0 * x[static_cast<std::size_t>(n - 1)] - x[static_cast<std::size_t>(i)]);

    const auto zi = steady_state(c);
    run_cascade(c, ext, &zi, ext.front());
    std::reverse(ext.begin(), ext.end());
    run_cascade(c, ext, &zi, ext.front());
    std::reverse(ext.begin(), ext.end());
    return {ext.begin() + pad, ext.begin() + pad + n};
}

namespace {

template <typename Fn>
SignalStream map_channels(const SignalStream& in, Fn&& fn) {
    SignalStream out = in;
    for (long ch = 0; ch < in.samples.rows(); ++ch) {
        const auto row = in.samples.row(ch);
        const std::vector<double> y = fn(std::span<const double>(row.data(), static_cast<std::size_t>(row.size())));
        for (long n = 0; n < in.samples.cols(); ++n) out.samples(ch, n) = y[static_cast<std::size_t>(n)];
    }
    return out;
}

}  // namespace

SignalStream apply_zero_phase(const BiquadCascade& c, const SignalStream& stream) {
    return map_channels(stream, [&](std::span<const double> x) { return filtfilt(c, x); });
}

SignalStream apply_causal(const BiquadCascade& c, const SignalStream& stream) {
    return map_channels(stream, [&](std::span<const double> x) { return lfilter(c, x); });
}

}  // namespace myobench
