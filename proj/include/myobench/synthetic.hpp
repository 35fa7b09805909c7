#pragma once

#include "myobench/dataset.hpp"

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace myobench {

/// Gesture-specific change of limb orientation over a trial. The trial
/// reaches `angle_rad` about `axis` (sensor frame) after the onset ramp.
struct OrientationTrajectory {
    Eigen::Vector3d axis = Eigen::Vector3d::UnitX();
    double angle_rad = 0.0;
};

/// Parameters of a synthetic multi-modal gesture dataset.
///
/// EMG gesture information lives only in the per-channel amplitude
/// profile `activation`. ACC information lives only in orientation: the
/// gravity vector of the limb position, rotated by the gesture trajectory
/// scaled by `positional_coupling` (kappa). kappa = 0 makes ACC
/// gesture-agnostic; kappa = 1 gives every gesture its own orientation.
struct SyntheticConfig {
    std::string name = "synthetic";
    int subjects = 12;
    int repetitions = 10;
    double duration_s = 2.0;

    std::vector<std::string> gesture_names;   // gesture id = index
    std::vector<std::string> position_names;  // position id = index + 1
    bool label_positions = true;              // false: position_id ABSENT on every trial

    int emg_channels = 8;
    double emg_rate_hz = 2000.0;
    int acc_sensors = 2;  // tri-axis each
    double acc_rate_hz = 148.0;

    /// gestures x emg_channels, entries in [0, 1], rows distinct.
    Eigen::MatrixXd activation;
    /// positions x acc_sensors unit gravity directions in sensor frames.
    std::vector<std::vector<Eigen::Vector3d>> position_gravity;
    /// gestures x acc_sensors orientation trajectories.
    std::vector<std::vector<OrientationTrajectory>> gesture_trajectories;
    double positional_coupling = 0.0;

    double emg_band_low_hz = 30.0;
    double emg_band_high_hz = 300.0;
    double emg_baseline = 0.02;
    double emg_subject_variability = 0.25;   // uniform relative spread of each subject's profile
    double emg_position_perturbation = 0.10;  // uniform relative spread per (subject, position, channel)
    double emg_trial_variability = 0.12;      // log-normal sigma per (trial, channel)
    double emg_intensity_variability = 0.10;  // log-normal sigma per trial, shared by channels
    double powerline_hz = 60.0;
    double powerline_amplitude = 0.05;

    double acc_subject_jitter_deg = 4.0;
    double acc_trial_jitter_deg = 2.0;
    double acc_vibration_g = 0.01;
    double acc_sway_deg = 2.0;  // RMS of a slow (< 1 Hz) within-trial orientation wobble
    double acc_drift_g = 0.0;   // RMS of slow independent per-axis sensor drift
    double onset_s = 0.3;

    std::uint64_t seed = 0;

    int gestures() const { return static_cast<int>(gesture_names.size()); }
    int positions() const { return static_cast<int>(position_names.size()); }
    int acc_axes() const { return 3 * acc_sensors; }

    /// Throws ConfigError when an invariant fails.
    void check() const;
    nlohmann::json to_json() const;
    static SyntheticConfig from_json(const nlohmann::json& j);
};

/// "bio-like": 12 subjects, rest + 6 gestures, 5 positions, 10 repetitions,
/// 8 EMG @ 2 kHz, 6 ACC axes @ 148 Hz, kappa 0.
/// "hci-like": 20 subjects, 40 gestures, one unlabelled position, 6
/// repetitions, 12 EMG, 36 ACC axes, kappa 1.
/// `scale` multiplies subject and repetition counts (floor, minimum 2).
SyntheticConfig preset(std::string_view name, double scale = 1.0, std::uint64_t seed = 0);

/// HCI-A/B/C gesture subsets of the hci-like preset.
std::vector<GestureSubset> hci_subsets();

/// Every trial key of the configuration in generation order
/// (subject, position, gesture, repetition).
std::vector<TrialKey> trial_keys(const SyntheticConfig& c);

/// Deterministic function of (config, key).
TrialRecord generate_trial(const SyntheticConfig& c, const TrialKey& key);

/// Dataset skeleton (names only, no trials).
Dataset dataset_header(const SyntheticConfig& c);

Dataset generate(const SyntheticConfig& c, int jobs = 1);

}  // namespace myobench
