#pragma once

#include "myobench/dataset.hpp"
#include "myobench/filters.hpp"

#include <nlohmann/json.hpp>

namespace myobench {

struct PreprocessOptions {
    double notch_hz = 60.0;  // power-line frequency of the recording region, 50 or 60
    double notch_quality = 30.0;
    double bandpass_low_hz = 20.0;
    double bandpass_high_hz = 450.0;
    int bandpass_order = 4;
    double lowpass_cutoff_hz = 1.0;
    int lowpass_order = 2;
    bool zero_phase = true;  // false: single causal pass

    nlohmann::json to_json() const;
};

/// The filter chain applied to a stream of the given modality and rate,
/// after the Nyquist clamping rule.
std::vector<FilterSpec> filter_chain(Modality modality, double sample_rate_hz, const PreprocessOptions& options);

/// EMG: notch then bandpass. ACC: lowpass. Labels are untouched.
TrialRecord preprocess_trial(const TrialRecord& t, const PreprocessOptions& options = {});

/// Applies preprocess_trial to every trial, `jobs` trials at a time.
Dataset preprocess_dataset(const Dataset& d, const PreprocessOptions& options = {}, int jobs = 1);

}  // namespace myobench
