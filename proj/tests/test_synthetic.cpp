#include "myobench/bundle.hpp"
#include "myobench/error.hpp"
#include "myobench/evaluation.hpp"
#include "myobench/pipeline.hpp"
#include "myobench/synthetic.hpp"
#include "support.hpp"

#include <doctest.h>

#include <complex>

using namespace myobench;

namespace {

FeatureSet features_of(const SyntheticConfig& c, std::vector<FeatureSetKind> kinds) {
    FeaturePipelineOptions o;
    o.kinds = std::move(kinds);
    return compute_features(generate(c), o);
}

// tr(S_between) / tr(S_within) over position classes.
double fisher_ratio(const FeatureMatrix& m) {
    std::map<int, std::vector<long>> by;
    for (std::size_t i = 0; i < m.rows(); ++i) by[*m.labels[i].position].push_back(static_cast<long>(i));
    const Eigen::RowVectorXd grand = m.values.colwise().mean();
    double between = 0.0, within = 0.0;
    for (const auto& [p, rows] : by) {
        Eigen::RowVectorXd mu = Eigen::RowVectorXd::Zero(m.values.cols());
        for (long r : rows) mu += m.values.row(r);
        mu /= static_cast<double>(rows.size());
        between += static_cast<double>(rows.size()) * (mu - grand).squaredNorm();
        for (long r : rows) within += (m.values.row(r) - mu).squaredNorm();
    }
    return between / within;
}

// Plug-in I(feature bin; gesture | position) in bits, quantile bins per
// position, maximised over feature columns.
double max_conditional_mi(const FeatureMatrix& m, int bins) {
    std::map<int, std::vector<std::size_t>> by;
    for (std::size_t i = 0; i < m.rows(); ++i) by[*m.labels[i].position].push_back(i);
    double worst = 0.0;
    for (long col = 0; col < m.values.cols(); ++col) {
        double mi = 0.0;
        for (const auto& [p, rows] : by) {
            std::vector<double> v;
            for (auto r : rows) v.push_back(m.values(static_cast<long>(r), col));
            std::vector<double> sorted = v;
            std::sort(sorted.begin(), sorted.end());
            std::map<std::pair<int, int>, double> joint;
            std::map<int, double> pb, pg;
            for (std::size_t k = 0; k < rows.size(); ++k) {
                const auto rank = std::lower_bound(sorted.begin(), sorted.end(), v[k]) - sorted.begin();
                const int b = static_cast<int>(rank * bins / static_cast<long>(sorted.size()));
                const int g = m.labels[rows[k]].gesture;
                joint[{b, g}] += 1;
                pb[b] += 1;
                pg[g] += 1;
            }
            const double n = static_cast<double>(rows.size());
            double local = 0.0;
            for (const auto& [bg, c] : joint) local += c / n * std::log2(c * n / (pb[bg.first] * pg[bg.second]));
            mi += local * n / static_cast<double>(m.rows());
        }
        worst = std::max(worst, mi);
    }
    return worst;
}

// Mean MI after shuffling gesture labels between the trials of each
// (subject, position, repetition) cell. Windows of one trial are strongly
// correlated, so this null carries the estimator's small-sample bias.
double permutation_null_mi(const FeatureMatrix& m, int gestures, int bins, int draws, std::uint64_t seed) {
    CounterRng rng(seed);
    double sum = 0.0;
    for (int d = 0; d < draws; ++d) {
        std::map<std::tuple<int, int, int>, std::vector<int>> perm;
        for (const auto& l : m.labels) {
            auto& v = perm[{l.subject, *l.position, l.repetition}];
            if (!v.empty()) continue;
            for (int g = 0; g < gestures; ++g) v.push_back(g);
            for (int i = gestures - 1; i > 0; --i) std::swap(v[static_cast<std::size_t>(i)], v[rng.below(static_cast<std::uint64_t>(i) + 1)]);
        }
        FeatureMatrix shuffled = m;
        for (auto& l : shuffled.labels) l.gesture = perm[{l.subject, *l.position, l.repetition}][static_cast<std::size_t>(l.gesture)];
        sum += max_conditional_mi(shuffled, bins);
    }
    return sum / draws;
}

// Fraction of periodogram power outside [lo, hi] Hz.
double out_of_band_fraction(const std::vector<double>& x, double fs, double lo, double hi) {
    const std::size_t n = x.size();
    double inside = 0.0, total = 0.0;
    for (std::size_t k = 1; k <= n / 2; ++k) {
        std::complex<double> acc = 0.0;
        const double w = -2.0 * M_PI * static_cast<double>(k) / static_cast<double>(n);
        const std::complex<double> step = std::polar(1.0, w);
        std::complex<double> rot = 1.0;
        for (std::size_t t = 0; t < n; ++t) {
            acc += x[t] * rot;
            rot *= step;
        }
        const double pw = std::norm(acc);
        const double f = static_cast<double>(k) * fs / static_cast<double>(n);
        total += pw;
        if (f >= lo && f <= hi) inside += pw;
    }
    return 1.0 - inside / total;
}

}  // namespace

TEST_CASE("preset shapes") {
    const auto bio = preset("bio-like", 1.0, 1);
    CHECK(bio.subjects == 12);
    CHECK(bio.gestures() == 7);
    CHECK(bio.positions() == 5);
    CHECK(bio.repetitions == 10);
    CHECK(bio.emg_channels == 8);
    CHECK(bio.emg_rate_hz == 2000.0);
    CHECK(bio.acc_axes() == 6);
    CHECK(bio.acc_rate_hz == 148.0);
    CHECK(bio.positional_coupling == 0.0);

    const auto hci = preset("hci-like", 1.0, 1);
    CHECK(hci.subjects == 20);
    CHECK(hci.repetitions == 6);
    CHECK(hci.emg_channels == 12);
    CHECK(hci.acc_axes() == 36);
    CHECK(hci.positional_coupling == 1.0);
    CHECK_FALSE(hci.label_positions);
    CHECK(dataset_header(hci).gesture_names.size() == 40);

    const auto q = preset("bio-like", 0.25);
    CHECK(q.subjects == 3);
    CHECK(q.repetitions == 2);
    const auto h = preset("hci-like", 0.25);
    CHECK(h.subjects == 5);
    CHECK(h.repetitions == 2);
    const auto tiny = preset("hci-like", 0.01);
    CHECK(tiny.subjects == 2);
    CHECK(tiny.repetitions == 2);
    CHECK(trial_keys(preset("bio-like", 0.25)).size() == 3u * 7 * 5 * 2);

    CHECK_THROWS_AS(preset("emg-like"), ConfigError);
    CHECK_THROWS_AS(preset("bio-like", 0.0), ConfigError);
}

TEST_CASE("generated datasets validate") {
    for (const char* name : {"bio-like", "hci-like"}) {
        auto c = preset(name, 0.05, 9);
        c.duration_s = 1.0;
        const auto d = generate(c);
        CHECK(validate(d).empty());
        CHECK(d.trials.size() == trial_keys(c).size());
        CHECK(d.has_positions() == (std::string(name) == "bio-like"));
        const auto& t = d.trials.front();
        REQUIRE(t.streams.size() == 2);
        CHECK(t.streams[0].modality == Modality::EMG);
        CHECK(t.streams[0].channel_count() == c.emg_channels);
        CHECK(t.streams[1].channel_count() == c.acc_axes());
        CHECK(t.streams[0].duration_s() == doctest::Approx(1.0));
    }
}

TEST_CASE("generation is deterministic and schedule independent") {
    auto c = preset("bio-like", 0.05, 4);
    c.duration_s = 0.5;
    testsupport::TempDir a("ga"), b("gb"), j("gj");
    save_bundle(generate(c), a.path());
    save_bundle(generate(c), b.path());
    save_bundle(generate(c, 3), j.path());
    const auto sa = testsupport::snapshot(a.path());
    CHECK(sa == testsupport::snapshot(b.path()));
    CHECK(sa == testsupport::snapshot(j.path()));

    c.seed = 5;
    testsupport::TempDir d("gd");
    save_bundle(generate(c), d.path());
    CHECK_FALSE(sa == testsupport::snapshot(d.path()));
}

TEST_CASE("a trial depends only on the seed and its own key") {
    auto c = preset("bio-like", 0.25, 11);
    c.duration_s = 0.5;
    const TrialKey key{2, 3, 4, 1};
    const auto t = generate_trial(c, key);
    auto bigger = c;
    bigger.subjects = 7;
    bigger.repetitions = 5;
    const auto u = generate_trial(bigger, key);
    for (std::size_t s = 0; s < t.streams.size(); ++s) CHECK(t.streams[s].samples == u.streams[s].samples);
    const auto other = generate_trial(c, TrialKey{1, 3, 4, 1});
    CHECK_FALSE(t.streams[0].samples == other.streams[0].samples);
}

TEST_CASE("position separation and gesture independence of ACC MED at zero coupling") {
    const auto c = preset("bio-like", 0.25, 7);
    const auto fs = features_of(c, {FeatureSetKind::MED});
    const auto& med = fs.table(FeatureSetKind::MED);
    const double fisher = fisher_ratio(med);
    const double mi2 = max_conditional_mi(med, 2);
    const double mi3 = max_conditional_mi(med, 3);
    const double null3 = permutation_null_mi(med, c.gestures(), 3, 20, 99);
    MESSAGE("fisher ratio " << fisher << ", conditional MI " << mi2 << " bits (2 bins), " << mi3
                            << " bits (3 bins) against a shuffled-label null of " << null3);
    CHECK(fisher > 10.0);
    CHECK(mi2 < 0.05);
    // the residual above the shuffle null is the dependence itself
    CHECK(mi3 - null3 < 0.05);

    // positive control: coupled trajectories make the same estimator light up
    auto coupled = c;
    coupled.positional_coupling = 1.0;
    const auto cm = features_of(coupled, {FeatureSetKind::MED});
    const double mi_coupled = max_conditional_mi(cm.table(FeatureSetKind::MED), 2);
    MESSAGE("conditional MI at coupling 1: " << mi_coupled);
    CHECK(mi_coupled > 0.2);
}

TEST_CASE("EMG spectral mass stays inside 20-450 Hz") {
    auto c = preset("bio-like", 0.25, 3);
    c.duration_s = 1.0;
    double worst = 0.0;
    for (int g = 0; g < c.gestures(); g += 3) {
        const auto t = generate_trial(c, TrialKey{1, g, 1, 1});
        const auto& emg = t.streams[0].samples;
        for (long ch = 0; ch < emg.rows(); ch += 3) {
            std::vector<double> x(emg.row(ch).data(), emg.row(ch).data() + emg.cols());
            worst = std::max(worst, out_of_band_fraction(x, c.emg_rate_hz, 20.0, 450.0));
        }
    }
    MESSAGE("worst out-of-band fraction " << worst);
    CHECK(worst < 0.05);
}

TEST_CASE("ACC MED gesture accuracy does not fall as coupling grows") {
    std::vector<double> acc;
    for (double kappa : {0.0, 0.5, 1.0}) {
        auto c = preset("bio-like", 0.25, 7);
        c.positional_coupling = kappa;
        const auto fs = exclude_gestures(features_of(c, {FeatureSetKind::MED}), {0});
        acc.push_back(run_within_position_task(fs, FeatureSetKind::MED, ClassifierKind::lda()).mean);
    }
    MESSAGE("ACC MED accuracy at kappa 0, 0.5, 1: " << acc[0] << ", " << acc[1] << ", " << acc[2]);
    CHECK(acc[1] >= acc[0]);
    CHECK(acc[2] >= acc[1]);
}

TEST_CASE("config checks") {
    const auto good = preset("bio-like", 0.25, 1);
    auto bad = good;
    bad.positional_coupling = 1.5;
    CHECK_THROWS_AS(bad.check(), ConfigError);
    bad = good;
    bad.activation(1, 2) = 1.2;
    CHECK_THROWS_AS(bad.check(), ConfigError);
    bad = good;
    bad.position_gravity[0][0] = Eigen::Vector3d(0, 0, 2);
    CHECK_THROWS_AS(bad.check(), ConfigError);
    bad = good;
    bad.emg_band_high_hz = 1500.0;
    CHECK_THROWS_AS(bad.check(), ConfigError);
    bad = good;
    bad.activation.row(2) = bad.activation.row(1);
    CHECK_THROWS_AS(bad.check(), ConfigError);
    CHECK_THROWS_AS(generate_trial(good, TrialKey{1, 9, 1, 1}), ConfigError);
}

TEST_CASE("config JSON round trip") {
    const auto c = preset("hci-like", 0.1, 42);
    const auto j = c.to_json();
    const auto back = SyntheticConfig::from_json(j);
    CHECK(back.to_json() == j);
    CHECK(back.seed == 42);
    auto broken = j;
    broken["positional_coupling"] = -1.0;
    CHECK_THROWS_AS(SyntheticConfig::from_json(broken), ConfigError);
}
