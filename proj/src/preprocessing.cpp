#include "myobench/preprocessing.hpp"

#include "myobench/parallel.hpp"

namespace myobench {

nlohmann::json PreprocessOptions::to_json() const {
    return {{"notch_hz", notch_hz},
            {"notch_quality", notch_quality},
            {"bandpass_low_hz", bandpass_low_hz},
            {"bandpass_high_hz", bandpass_high_hz},
            {"bandpass_order", bandpass_order},
            {"lowpass_cutoff_hz", lowpass_cutoff_hz},
            {"lowpass_order", lowpass_order},
            {"zero_phase", zero_phase},
            {"padding", "odd reflection, 3x total order"},
            {"nyquist_clamp", "bandpass high corner -> 0.45 fs when >= fs/2"}};
}

std::vector<FilterSpec> filter_chain(Modality modality, double sample_rate_hz, const PreprocessOptions& o) {
    if (modality == Modality::EMG) {
        return {FilterSpec::notch(o.notch_hz, o.notch_quality, sample_rate_hz),
                apply_nyquist_clamp(
                    FilterSpec::bandpass(o.bandpass_low_hz, o.bandpass_high_hz, o.bandpass_order, sample_rate_hz))};
    }
    return {FilterSpec::lowpass(o.lowpass_cutoff_hz, o.lowpass_order, sample_rate_hz)};
}

TrialRecord preprocess_trial(const TrialRecord& t, const PreprocessOptions& options) {
    TrialRecord out;
    out.key = t.key;
    out.streams.reserve(t.streams.size());
    for (const auto& stream : t.streams) {
        SignalStream s = stream;
        for (const auto& spec : filter_chain(stream.modality, stream.sample_rate_hz, options)) {
            const auto cascade = design_filter(spec);
            s = options.zero_phase ? apply_zero_phase(cascade, s) : apply_causal(cascade, s);
        }
        out.streams.push_back(std::move(s));
    }
    return out;
}

Dataset preprocess_dataset(const Dataset& d, const PreprocessOptions& options, int jobs) {
    Dataset out;
    out.name = d.name;
    out.gesture_names = d.gesture_names;
    out.position_names = d.position_names;
    out.trials.resize(d.trials.size());
    parallel_for(d.trials.size(), jobs, [&](std::size_t i) { out.trials[i] = preprocess_trial(d.trials[i], options); });
    return out;
}

}  // namespace myobench
