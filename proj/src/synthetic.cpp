#include "myobench/synthetic.hpp"

#include "myobench/error.hpp"
#include "myobench/filters.hpp"
#include "myobench/parallel.hpp"
#include "myobench/rng.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace myobench {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

Eigen::Vector3d random_unit(CounterRng& rng) {
    Eigen::Vector3d v(rng.normal(), rng.normal(), rng.normal());
    while (v.norm() < 1e-6) v = Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
    return v.normalized();
}

Eigen::Matrix3d small_rotation(CounterRng& rng, double sigma_deg) {
    const Eigen::Vector3d axis = random_unit(rng);
    return Eigen::AngleAxisd(sigma_deg * kDeg * rng.normal(), axis).toRotationMatrix();
}

double smoothstep(double x) {
    x = std::clamp(x, 0.0, 1.0);
    return x * x * (3.0 - 2.0 * x);
}

struct SubjectProfile {
    Eigen::MatrixXd activation;                       // gestures x channels
    Eigen::MatrixXd position_gain;                    // positions x channels
    std::vector<std::vector<Eigen::Matrix3d>> mount;  // positions x sensors
};

SubjectProfile subject_profile(const SyntheticConfig& c, int subject) {
    CounterRng rng(derive_seed(c.seed, {1000, subject}));
    SubjectProfile p;
    p.activation = c.activation;
    for (long g = 0; g < p.activation.rows(); ++g)
        for (long ch = 0; ch < p.activation.cols(); ++ch)
            p.activation(g, ch) =
                std::clamp(c.activation(g, ch) * (1.0 + c.emg_subject_variability * rng.uniform(-1.0, 1.0)), 0.0, 1.0);
    const int positions = std::max(1, c.positions());
    p.position_gain.resize(positions, c.emg_channels);
    for (int pos = 0; pos < positions; ++pos)
        for (int ch = 0; ch < c.emg_channels; ++ch)
            p.position_gain(pos, ch) = 1.0 + c.emg_position_perturbation * rng.uniform(-1.0, 1.0);
    p.mount.resize(static_cast<std::size_t>(positions));
    for (auto& sensors : p.mount)
        for (int s = 0; s < c.acc_sensors; ++s) sensors.push_back(small_rotation(rng, c.acc_subject_jitter_deg));
    return p;
}

double power_gain(const BiquadCascade& cascade) {
    std::vector<double> impulse(16384, 0.0);
    impulse[0] = 1.0;
    const auto h = lfilter(cascade, impulse);
    double s = 0.0;
    for (double v : h) s += v * v;
    return s;
}

}  // namespace

void SyntheticConfig::check() const {
    const auto fail = [](const std::string& m) { throw ConfigError("synthetic config: " + m); };
    if (subjects < 1) fail("subjects must be >= 1");
    if (repetitions < 1) fail("repetitions must be >= 1");
    if (gestures() < 2) fail("need at least 2 gestures");
    if (positions() < 1) fail("need at least 1 position");
    if (!(duration_s > 0.0)) fail("duration must be positive");
    if (emg_channels < 1 || acc_sensors < 1) fail("need at least one EMG channel and one ACC sensor");
    if (!(emg_rate_hz > 0.0) || !(acc_rate_hz > 0.0)) fail("sample rates must be positive");
    if (activation.rows() != gestures() || activation.cols() != emg_channels)
        fail("activation matrix must be gestures x emg_channels");
    if ((activation.array() < 0.0).any() || (activation.array() > 1.0).any())
        fail("activation entries must lie in [0, 1]");
    for (int a = 0; a < gestures(); ++a)
        for (int b = a + 1; b < gestures(); ++b)
            if (activation.row(a) == activation.row(b))
                fail("activation rows of gestures " + std::to_string(a) + " and " + std::to_string(b) + " coincide");
    if (static_cast<int>(position_gravity.size()) != positions()) fail("position_gravity must have one entry per position");
    for (const auto& sensors : position_gravity) {
        if (static_cast<int>(sensors.size()) != acc_sensors) fail("position_gravity needs one vector per ACC sensor");
        for (const auto& v : sensors)
            if (std::abs(v.norm() - 1.0) > 1e-9) fail("gravity orientation vectors must be unit norm");
    }
    if (static_cast<int>(gesture_trajectories.size()) != gestures())
        fail("gesture_trajectories must have one entry per gesture");
    for (const auto& sensors : gesture_trajectories) {
        if (static_cast<int>(sensors.size()) != acc_sensors) fail("gesture_trajectories need one entry per ACC sensor");
        for (const auto& t : sensors)
            if (std::abs(t.axis.norm() - 1.0) > 1e-9) fail("trajectory axes must be unit norm");
    }
    if (positional_coupling < 0.0 || positional_coupling > 1.0) fail("positional_coupling must lie in [0, 1]");
    if (!(emg_band_low_hz > 0.0) || !(emg_band_high_hz > emg_band_low_hz) || !(emg_band_high_hz < emg_rate_hz / 2.0))
        fail("EMG generation band must satisfy 0 < low < high < fs/2");
    if (!(onset_s >= 0.0)) fail("onset must be >= 0");
}

nlohmann::json SyntheticConfig::to_json() const {
    using nlohmann::json;
    json act = json::array();
    for (long g = 0; g < activation.rows(); ++g) {
        std::vector<double> row(static_cast<std::size_t>(activation.cols()));
        for (long c = 0; c < activation.cols(); ++c) row[static_cast<std::size_t>(c)] = activation(g, c);
        act.push_back(row);
    }
    json grav = json::array();
    for (const auto& sensors : position_gravity) {
        json js = json::array();
        for (const auto& v : sensors) js.push_back({v.x(), v.y(), v.z()});
        grav.push_back(js);
    }
    json traj = json::array();
    for (const auto& sensors : gesture_trajectories) {
        json js = json::array();
        for (const auto& t : sensors) js.push_back({{"axis", {t.axis.x(), t.axis.y(), t.axis.z()}}, {"angle_rad", t.angle_rad}});
        traj.push_back(js);
    }
    return {{"name", name},
            {"subjects", subjects},
            {"repetitions", repetitions},
            {"duration_s", duration_s},
            {"gesture_names", gesture_names},
            {"position_names", position_names},
            {"label_positions", label_positions},
            {"emg_channels", emg_channels},
            {"emg_rate_hz", emg_rate_hz},
            {"acc_sensors", acc_sensors},
            {"acc_rate_hz", acc_rate_hz},
            {"activation", act},
            {"position_gravity", grav},
            {"gesture_trajectories", traj},
            {"positional_coupling", positional_coupling},
            {"emg_band_low_hz", emg_band_low_hz},
            {"emg_band_high_hz", emg_band_high_hz},
            {"emg_baseline", emg_baseline},
            {"emg_subject_variability", emg_subject_variability},
            {"emg_position_perturbation", emg_position_perturbation},
            {"emg_trial_variability", emg_trial_variability},
            {"emg_intensity_variability", emg_intensity_variability},
            {"powerline_hz", powerline_hz},
            {"powerline_amplitude", powerline_amplitude},
            {"acc_subject_jitter_deg", acc_subject_jitter_deg},
            {"acc_trial_jitter_deg", acc_trial_jitter_deg},
            {"acc_vibration_g", acc_vibration_g},
            {"acc_sway_deg", acc_sway_deg},
            {"acc_drift_g", acc_drift_g},
            {"onset_s", onset_s},
            {"seed", seed}};
}

SyntheticConfig SyntheticConfig::from_json(const nlohmann::json& j) {
    SyntheticConfig c;
    try {
        c.name = j.at("name").get<std::string>();
        c.subjects = j.at("subjects").get<int>();
        c.repetitions = j.at("repetitions").get<int>();
        c.duration_s = j.at("duration_s").get<double>();
        c.gesture_names = j.at("gesture_names").get<std::vector<std::string>>();
        c.position_names = j.at("position_names").get<std::vector<std::string>>();
        c.label_positions = j.at("label_positions").get<bool>();
        c.emg_channels = j.at("emg_channels").get<int>();
        c.emg_rate_hz = j.at("emg_rate_hz").get<double>();
        c.acc_sensors = j.at("acc_sensors").get<int>();
        c.acc_rate_hz = j.at("acc_rate_hz").get<double>();
        const auto& act = j.at("activation");
        c.activation.resize(static_cast<long>(act.size()), act.empty() ? 0 : static_cast<long>(act.at(0).size()));
        for (std::size_t g = 0; g < act.size(); ++g)
            for (std::size_t ch = 0; ch < act.at(g).size(); ++ch)
                c.activation(static_cast<long>(g), static_cast<long>(ch)) = act.at(g).at(ch).get<double>();
        for (const auto& js : j.at("position_gravity")) {
            std::vector<Eigen::Vector3d> sensors;
            for (const auto& v : js) sensors.emplace_back(v.at(0).get<double>(), v.at(1).get<double>(), v.at(2).get<double>());
            c.position_gravity.push_back(std::move(sensors));
        }
        for (const auto& js : j.at("gesture_trajectories")) {
            std::vector<OrientationTrajectory> sensors;
            for (const auto& t : js) {
                const auto& a = t.at("axis");
                sensors.push_back({Eigen::Vector3d(a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>()),
                                   t.at("angle_rad").get<double>()});
            }
            c.gesture_trajectories.push_back(std::move(sensors));
        }
        c.positional_coupling = j.at("positional_coupling").get<double>();
        c.emg_band_low_hz = j.value("emg_band_low_hz", c.emg_band_low_hz);
        c.emg_band_high_hz = j.value("emg_band_high_hz", c.emg_band_high_hz);
        c.emg_baseline = j.value("emg_baseline", c.emg_baseline);
        c.emg_subject_variability = j.value("emg_subject_variability", c.emg_subject_variability);
        c.emg_position_perturbation = j.value("emg_position_perturbation", c.emg_position_perturbation);
        c.emg_trial_variability = j.value("emg_trial_variability", c.emg_trial_variability);
        c.emg_intensity_variability = j.value("emg_intensity_variability", c.emg_intensity_variability);
        c.powerline_hz = j.value("powerline_hz", c.powerline_hz);
        c.powerline_amplitude = j.value("powerline_amplitude", c.powerline_amplitude);
        c.acc_subject_jitter_deg = j.value("acc_subject_jitter_deg", c.acc_subject_jitter_deg);
        c.acc_trial_jitter_deg = j.value("acc_trial_jitter_deg", c.acc_trial_jitter_deg);
        c.acc_vibration_g = j.value("acc_vibration_g", c.acc_vibration_g);
        c.acc_sway_deg = j.value("acc_sway_deg", c.acc_sway_deg);
        c.acc_drift_g = j.value("acc_drift_g", c.acc_drift_g);
        c.onset_s = j.value("onset_s", c.onset_s);
        c.seed = j.value("seed", c.seed);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed synthetic config: ") + e.what());
    }
    c.check();
    return c;
}

namespace {

int scaled(int full, double scale) {
    return std::max(2, static_cast<int>(std::floor(full * scale + 1e-9)));
}

std::vector<std::vector<OrientationTrajectory>> random_trajectories(CounterRng& rng, int gestures, int sensors,
                                                                    double min_deg, double max_deg,
                                                                    const std::vector<double>& sensor_weight,
                                                                    bool first_is_rest, bool shared_axis) {
    std::vector<std::vector<OrientationTrajectory>> out(static_cast<std::size_t>(gestures));
    for (int g = 0; g < gestures; ++g) {
        const double angle = rng.uniform(min_deg, max_deg) * kDeg;
        const Eigen::Vector3d common = random_unit(rng);
        for (int s = 0; s < sensors; ++s) {
            OrientationTrajectory t;
            t.axis = shared_axis ? common : random_unit(rng);
            t.angle_rad = (first_is_rest && g == 0) ? 0.0 : angle * sensor_weight[static_cast<std::size_t>(s)];
            out[static_cast<std::size_t>(g)].push_back(t);
        }
    }
    return out;
}

SyntheticConfig bio_like(double scale, std::uint64_t seed) {
    SyntheticConfig c;
    c.name = "bio-like";
    c.subjects = scaled(12, scale);
    c.repetitions = scaled(10, scale);
    c.gesture_names = {"rest", "WF", "WE", "WP", "WS", "PO", "PI"};
    c.position_names = {"P1", "P2", "P3", "P4", "P5"};
    c.label_positions = true;
    c.emg_channels = 8;
    c.emg_rate_hz = 2000.0;
    c.acc_sensors = 2;  // forearm, upper arm
    c.acc_rate_hz = 148.0;
    c.seed = seed;

    CounterRng rng(derive_seed(seed, {-1}));
    c.activation.resize(c.gestures(), c.emg_channels);
    for (int ch = 0; ch < c.emg_channels; ++ch) c.activation(0, ch) = 0.03;
    for (int g = 1; g < c.gestures(); ++g)
        for (int ch = 0; ch < c.emg_channels; ++ch) c.activation(g, ch) = rng.uniform(0.1, 1.0);

    // (upper-arm angle, elbow flexion) in the sagittal plane, degrees.
    const double postures[5][2] = {{0, 0}, {0, 90}, {90, 0}, {45, 45}, {135, 0}};
    for (const auto& p : postures) {
        const double upper = p[0] * kDeg;
        const double fore = (p[0] + p[1]) * kDeg;
        c.position_gravity.push_back({Eigen::Vector3d(std::sin(fore), 0.0, -std::cos(fore)),
                                      Eigen::Vector3d(0.0, std::sin(upper), -std::cos(upper))});
    }
    c.gesture_trajectories = random_trajectories(rng, c.gestures(), c.acc_sensors, 20.0, 45.0, {1.0, 0.5}, true, false);
    c.positional_coupling = 0.0;
    return c;
}

SyntheticConfig hci_like(double scale, std::uint64_t seed) {
    SyntheticConfig c;
    c.name = "hci-like";
    c.subjects = scaled(20, scale);
    c.repetitions = scaled(6, scale);
    c.gesture_names = {
        // finger gestures
        "thumb up", "index and middle extension", "ring and little flexion", "thumb opposition",
        "finger abduction", "hand close (PO)", "index pointing", "finger adduction",
        // wrist gestures
        "wrist supination (WS)", "wrist pronation (WP)", "wrist supination, little finger axis",
        "wrist pronation, little finger axis", "wrist flexion (WF)", "wrist extension (WE)", "wrist radial deviation",
        "wrist ulnar deviation", "wrist extension with closed hand",
        // grasps
        "large diameter grasp", "small diameter grasp", "fixed hook grasp", "index finger extension grasp",
        "medium wrap", "ring grasp", "prismatic four finger grasp", "stick grasp", "writing tripod grasp",
        "power sphere grasp", "three finger sphere grasp", "precision sphere grasp", "tripod grasp",
        "prismatic pinch grasp", "tip pinch grasp (PI)", "quadpod grasp", "lateral grasp", "parallel extension grasp",
        "extension type grasp", "power disk grasp", "open a bottle", "turn a screw", "cut something"};
    c.gesture_names.insert(c.gesture_names.begin(), "unused");
    c.position_names = {"nominal"};
    c.label_positions = false;
    c.emg_channels = 12;
    c.emg_rate_hz = 2000.0;
    c.acc_sensors = 12;
    c.acc_rate_hz = 148.0;
    c.duration_s = 5.0;  // dynamic gestures held longer than the onset transient
    c.onset_s = 0.15;
    c.emg_trial_variability = 0.40;
    c.emg_intensity_variability = 0.20;
    c.seed = seed;

    CounterRng rng(derive_seed(seed, {-2}));
    c.activation.resize(c.gestures(), c.emg_channels);
    for (int g = 0; g < c.gestures(); ++g)
        for (int ch = 0; ch < c.emg_channels; ++ch) c.activation(g, ch) = rng.uniform(0.1, 1.0);

    // Sensors spaced around the forearm; gravity seen in each frame.
    std::vector<Eigen::Vector3d> sensors;
    for (int s = 0; s < c.acc_sensors; ++s) {
        const double a = s * 2.0 * std::numbers::pi / c.acc_sensors;
        sensors.emplace_back(0.0, std::sin(a), -std::cos(a));
    }
    c.position_gravity.push_back(sensors);
    c.gesture_trajectories = random_trajectories(rng, c.gestures(), c.acc_sensors, 25.0, 60.0,
                                                 std::vector<double>(12, 1.0), false, true);
    c.positional_coupling = 1.0;
    return c;
}

}  // namespace

SyntheticConfig preset(std::string_view name, double scale, std::uint64_t seed) {
    if (!(scale > 0.0)) throw ConfigError("scale must be positive");
    SyntheticConfig c;
    if (name == "bio-like")
        c = bio_like(scale, seed);
    else if (name == "hci-like")
        c = hci_like(scale, seed);
    else
        throw ConfigError("unknown preset '" + std::string(name) + "' (expected bio-like|hci-like)");
    c.check();
    return c;
}

std::vector<GestureSubset> hci_subsets() {
    GestureSubset a{"HCI-A", {13, 14, 10, 9, 6, 32}};
    GestureSubset b{"HCI-B", {}};
    for (int g = 1; g <= 8; ++g) b.gesture_ids.insert(g);
    GestureSubset c{"HCI-C", {}};
    for (int g = 18; g <= 40; ++g) c.gesture_ids.insert(g);
    return {a, b, c};
}

namespace {

int first_gesture(const SyntheticConfig& c) {
    return c.name == "hci-like" && !c.gesture_names.empty() && c.gesture_names.front() == "unused" ? 1 : 0;
}

}  // namespace

std::vector<TrialKey> trial_keys(const SyntheticConfig& c) {
    std::vector<TrialKey> keys;
    for (int s = 1; s <= c.subjects; ++s)
        for (int p = 1; p <= c.positions(); ++p)
            for (int g = first_gesture(c); g < c.gestures(); ++g)
                for (int r = 1; r <= c.repetitions; ++r)
                    keys.push_back({s, g, c.label_positions ? std::optional<int>(p) : std::nullopt, r});
    return keys;
}

Dataset dataset_header(const SyntheticConfig& c) {
    Dataset d;
    d.name = c.name;
    for (int g = first_gesture(c); g < c.gestures(); ++g) d.gesture_names.emplace(g, c.gesture_names[static_cast<std::size_t>(g)]);
    if (c.label_positions)
        for (int p = 1; p <= c.positions(); ++p) d.position_names.emplace(p, c.position_names[static_cast<std::size_t>(p - 1)]);
    return d;
}

TrialRecord generate_trial(const SyntheticConfig& c, const TrialKey& key) {
    const SubjectProfile profile = subject_profile(c, key.subject);
    const int pos_index = key.position ? *key.position - 1 : 0;
    if (pos_index < 0 || pos_index >= c.positions()) throw ConfigError("trial position outside the configuration");
    if (key.gesture < 0 || key.gesture >= c.gestures()) throw ConfigError("trial gesture outside the configuration");
    CounterRng rng(derive_seed(c.seed, {key.subject, key.gesture, key.position.value_or(0), key.repetition}));

    TrialRecord t;
    t.key = key;

    // EMG: band-limited Gaussian noise scaled by the gesture's amplitude profile.
    {
        const auto n = static_cast<long>(std::llround(c.duration_s * c.emg_rate_hz));
        const auto warmup = static_cast<long>(std::llround(0.25 * c.emg_rate_hz));
        const auto band = design_filter(FilterSpec::bandpass(c.emg_band_low_hz, c.emg_band_high_hz, 4, c.emg_rate_hz));
        const double unit = 1.0 / std::sqrt(power_gain(band));
        const double intensity = std::exp(c.emg_intensity_variability * rng.normal());
        const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);

        SignalStream emg;
        emg.modality = Modality::EMG;
        emg.sample_rate_hz = c.emg_rate_hz;
        emg.samples.resize(c.emg_channels, n);
        std::vector<double> white(static_cast<std::size_t>(n + warmup));
        for (int ch = 0; ch < c.emg_channels; ++ch) {
            const double a = profile.activation(key.gesture, ch) * profile.position_gain(pos_index, ch) * intensity *
                             std::exp(c.emg_trial_variability * rng.normal());
            const double sigma = std::sqrt(a * a + c.emg_baseline * c.emg_baseline) * unit;
            for (auto& v : white) v = sigma * rng.normal();
            const auto colored = lfilter(band, white);
            for (long i = 0; i < n; ++i) {
                const double time = static_cast<double>(i) / c.emg_rate_hz;
                emg.samples(ch, i) = colored[static_cast<std::size_t>(i + warmup)] +
                                     c.powerline_amplitude * std::sin(2.0 * std::numbers::pi * c.powerline_hz * time + phase);
            }
        }
        t.streams.push_back(std::move(emg));
    }

    // ACC: gravity of the limb position, rotated by the gesture trajectory
    // (scaled by kappa), plus trial jitter and vibration noise.
    {
        const auto n = static_cast<long>(std::llround(c.duration_s * c.acc_rate_hz));
        SignalStream acc;
        acc.modality = Modality::ACC;
        acc.sample_rate_hz = c.acc_rate_hz;
        acc.samples.resize(c.acc_axes(), n);
        for (int s = 0; s < c.acc_sensors; ++s) {
            const Eigen::Matrix3d jitter = small_rotation(rng, c.acc_trial_jitter_deg);
            const Eigen::Vector3d g0 = jitter * profile.mount[static_cast<std::size_t>(pos_index)][static_cast<std::size_t>(s)] *
                                       c.position_gravity[static_cast<std::size_t>(pos_index)][static_cast<std::size_t>(s)];
            // Sway: rotation vector made of a few random sinusoids between 0.2 and 0.8 Hz.
            constexpr int kSwayTerms = 3;
            Eigen::Vector3d sway_amp[kSwayTerms];
            double sway_freq[kSwayTerms], sway_phase[kSwayTerms];
            for (int k = 0; k < kSwayTerms; ++k) {
                sway_amp[k] = Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal()) *
                              (c.acc_sway_deg * kDeg * std::sqrt(2.0 / (3.0 * kSwayTerms)));
                sway_freq[k] = rng.uniform(0.2, 0.8);
                sway_phase[k] = rng.uniform(0.0, 2.0 * std::numbers::pi);
            }
            double drift_amp[3][kSwayTerms], drift_freq[3][kSwayTerms], drift_phase[3][kSwayTerms];
            for (int axis = 0; axis < 3; ++axis)
                for (int k = 0; k < kSwayTerms; ++k) {
                    drift_amp[axis][k] = rng.normal() * c.acc_drift_g * std::sqrt(2.0 / kSwayTerms);
                    drift_freq[axis][k] = rng.uniform(0.1, 0.8);
                    drift_phase[axis][k] = rng.uniform(0.0, 2.0 * std::numbers::pi);
                }
            const auto& traj = c.gesture_trajectories[static_cast<std::size_t>(key.gesture)][static_cast<std::size_t>(s)];
            for (long i = 0; i < n; ++i) {
                const double time = static_cast<double>(i) / c.acc_rate_hz;
                const double ramp = c.onset_s > 0.0 ? smoothstep(time / c.onset_s) : 1.0;
                const double angle = c.positional_coupling * traj.angle_rad * ramp;
                Eigen::Vector3d w = Eigen::Vector3d::Zero();
                for (int k = 0; k < kSwayTerms; ++k)
                    w += sway_amp[k] * std::sin(2.0 * std::numbers::pi * sway_freq[k] * time + sway_phase[k]);
                Eigen::Vector3d g = Eigen::AngleAxisd(angle, traj.axis) * g0;
                if (w.norm() > 0.0) g = Eigen::AngleAxisd(w.norm(), w.normalized()) * g;
                for (int axis = 0; axis < 3; ++axis) {
                    double drift = 0.0;
                    for (int k = 0; k < kSwayTerms; ++k)
                        drift += drift_amp[axis][k] *
                                 std::sin(2.0 * std::numbers::pi * drift_freq[axis][k] * time + drift_phase[axis][k]);
                    acc.samples(3 * s + axis, i) = g(axis) + drift + c.acc_vibration_g * rng.normal();
                }
            }
        }
        t.streams.push_back(std::move(acc));
    }
    return t;
}

Dataset generate(const SyntheticConfig& c, int jobs) {
    c.check();
    Dataset d = dataset_header(c);
    const auto keys = trial_keys(c);
    d.trials.resize(keys.size());
    parallel_for(keys.size(), jobs, [&](std::size_t i) { d.trials[i] = generate_trial(c, keys[i]); });
    return d;
}

}  // namespace myobench
