#include "myobench/bundle.hpp"
#include "myobench/error.hpp"
#include "myobench/synthetic.hpp"
#include "support.hpp"

#include <doctest.h>

#include <nlohmann/json.hpp>

using namespace myobench;
using testsupport::TempDir;

namespace {

Dataset small_dataset(std::uint64_t seed = 1, bool positions = true) {
    CounterRng rng(seed);
    Dataset d;
    d.name = "small";
    d.gesture_names = {{1, "open"}, {2, "close"}, {3, "pinch"}};
    if (positions) d.position_names = {{1, "P1"}, {2, "P2"}};
    for (int s = 1; s <= 2; ++s)
        for (int g = 1; g <= 3; ++g)
            for (int p = 1; p <= (positions ? 2 : 1); ++p)
                for (int r = 1; r <= 2; ++r) {
                    TrialKey k{s, g, positions ? std::optional<int>(p) : std::nullopt, r};
                    d.trials.push_back(testsupport::make_trial(rng, k, 2, 300, 1000.0, 3, 30, 100.0));
                }
    return d;
}

bool same_data(const Dataset& a, const Dataset& b, double tol) {
    if (a.name != b.name || a.gesture_names != b.gesture_names || a.position_names != b.position_names) return false;
    if (a.trials.size() != b.trials.size()) return false;
    for (std::size_t i = 0; i < a.trials.size(); ++i) {
        const auto &x = a.trials[i], &y = b.trials[i];
        if (!(x.key == y.key) || x.streams.size() != y.streams.size()) return false;
        for (std::size_t s = 0; s < x.streams.size(); ++s) {
            const auto &p = x.streams[s], &q = y.streams[s];
            if (p.modality != q.modality || p.sample_rate_hz != q.sample_rate_hz) return false;
            if (p.samples.rows() != q.samples.rows() || p.samples.cols() != q.samples.cols()) return false;
            if ((p.samples - q.samples).cwiseAbs().maxCoeff() > tol) return false;
        }
    }
    return true;
}

// First stream file of the first trial, as named in the manifest.
std::filesystem::path first_stream_file(const std::filesystem::path& dir, nlohmann::json* manifest = nullptr) {
    const auto j = nlohmann::json::parse(testsupport::read_file(dir / kManifestName));
    if (manifest) *manifest = j;
    return dir / j["trials"][0]["streams"][0]["file"].get<std::string>();
}

}  // namespace

TEST_CASE("bundle with 1 subject, 2 gestures, 1 repetition loads 2 trials") {
    CounterRng rng(4);
    Dataset d;
    d.name = "tiny";
    d.gesture_names = {{1, "a"}, {2, "b"}};
    for (int g = 1; g <= 2; ++g) d.trials.push_back(testsupport::make_trial(rng, {1, g, std::nullopt, 1}));
    TempDir dir("tiny");
    save_bundle(d, dir.path());
    const auto back = load_bundle(dir.path());
    CHECK(back.trials.size() == 2);
    CHECK(back.trials[0].streams[0].channel_count() == 2);
    CHECK(back.trials[0].streams[1].sample_rate_hz == 100.0);
    CHECK_FALSE(back.has_positions());
}

TEST_CASE("csv round trip is exact at 17 digits") {
    const auto d = small_dataset();
    TempDir dir("csv");
    BundleWriteOptions o;
    o.encoding = Encoding::Csv;
    save_bundle(d, dir.path(), o);
    CHECK(same_data(d, load_bundle(dir.path()), 0.0));
}

TEST_CASE("f32 round trip within single precision") {
    const auto d = small_dataset(2, false);
    TempDir dir("f32");
    save_bundle(d, dir.path());
    const auto back = load_bundle(dir.path());
    CHECK(same_data(d, back, 1e-6 * 8.0));
    // re-saving the f32 copy is lossless
    TempDir dir2("f32b");
    save_bundle(back, dir2.path());
    CHECK(same_data(back, load_bundle(dir2.path()), 0.0));
}

TEST_CASE("bundle reader streams trials and keeps provenance") {
    const auto d = small_dataset();
    TempDir dir("reader");
    BundleWriteOptions o;
    o.provenance = {{"generator", "test"}};
    save_bundle(d, dir.path(), o);
    BundleReader r(dir.path());
    CHECK(r.size() == d.trials.size());
    CHECK(r.header().trials.empty());
    CHECK(r.provenance()["generator"] == "test");
    CHECK(r.key(5) == d.trials[5].key);
    CHECK(same_data(Dataset{d.name, {r.read_trial(5)}, d.gesture_names, d.position_names},
                    Dataset{d.name, {d.trials[5]}, d.gesture_names, d.position_names}, 1e-5));
}

TEST_CASE("channel mismatch is reported") {
    const auto d = small_dataset();
    TempDir dir("chan");
    BundleWriteOptions o;
    o.encoding = Encoding::Csv;
    save_bundle(d, dir.path(), o);
    const auto file = first_stream_file(dir.path());
    // drop the last column of every row
    std::istringstream in(testsupport::read_file(file));
    std::string line, out;
    while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + "\n";
    testsupport::write_file(file, out);
    try {
        load_bundle(dir.path());
        FAIL("expected an error");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("channel mismatch") != std::string::npos);
    }
}

TEST_CASE("manifest declaring 8 channels over a 7-column file") {
    CounterRng rng(8);
    Dataset d;
    d.name = "eight";
    d.gesture_names = {{1, "a"}};
    d.trials.push_back(testsupport::make_trial(rng, {1, 1, std::nullopt, 1}, 7, 400, 1000.0, 3, 40, 100.0));
    TempDir dir("eight");
    BundleWriteOptions o;
    o.encoding = Encoding::Csv;
    save_bundle(d, dir.path(), o);
    nlohmann::json m;
    first_stream_file(dir.path(), &m);
    m["trials"][0]["streams"][0]["channels"] = 8;
    testsupport::write_file(dir / kManifestName, m.dump());
    CHECK_THROWS_WITH_AS(load_bundle(dir.path()), doctest::Contains("channel mismatch"), DataError);

    // same story for the binary encoding
    TempDir bin("eightb");
    save_bundle(d, bin.path());
    first_stream_file(bin.path(), &m);
    m["trials"][0]["streams"][0]["channels"] = 8;
    testsupport::write_file(bin / kManifestName, m.dump());
    CHECK_THROWS_WITH_AS(load_bundle(bin.path()), doctest::Contains("channel mismatch"), DataError);
}

TEST_CASE("load errors") {
    TempDir empty("empty");
    CHECK_THROWS_WITH_AS(load_bundle(empty.path()), doctest::Contains("missing manifest"), DataError);

    const auto d = small_dataset();
    TempDir dir("dup");
    save_bundle(d, dir.path());
    nlohmann::json m;
    first_stream_file(dir.path(), &m);
    m["trials"].push_back(m["trials"][0]);
    testsupport::write_file(dir / kManifestName, m.dump());
    CHECK_THROWS_WITH_AS(load_bundle(dir.path()), doctest::Contains("duplicate"), DataError);

    TempDir nan("nan");
    BundleWriteOptions o;
    o.encoding = Encoding::Csv;
    save_bundle(d, nan.path(), o);
    const auto file = first_stream_file(nan.path());
    auto text = testsupport::read_file(file);
    text.replace(0, text.find(','), "nan");
    testsupport::write_file(file, text);
    CHECK_THROWS_WITH_AS(load_bundle(nan.path()), doctest::Contains("non-finite"), DataError);

    TempDir bad("bad");
    testsupport::write_file(bad / kManifestName, "{not json");
    CHECK_THROWS_WITH_AS(load_bundle(bad.path()), doctest::Contains("malformed manifest"), DataError);
}

TEST_CASE("validate examples") {
    auto d = small_dataset();
    CHECK(validate(d).empty());

    auto dup = d;
    dup.trials.push_back(dup.trials[0]);
    const auto v = validate(dup);
    REQUIRE(v.size() == 1);
    CHECK(v[0].reason == "duplicate key");
    CHECK(v[0].trial == to_string(d.trials[0].key));

    auto nan = d;
    nan.trials[3].streams[0].samples(1, 17) = std::numeric_limits<double>::quiet_NaN();
    const auto w = validate(nan);
    REQUIRE(w.size() == 1);
    CHECK(w[0].reason == "non-finite sample value");

    auto mixed = d;
    mixed.trials[0].key.position.reset();
    bool flagged = false;
    for (const auto& x : validate(mixed)) flagged |= x.trial == "dataset";
    CHECK(flagged);

    auto unnamed = d;
    unnamed.trials[0].key.gesture = 9;
    CHECK(validate(unnamed).size() == 1);

    auto skew = d;
    skew.trials[0].streams[1].samples.conservativeResize(3, 20);
    CHECK(validate(skew).size() == 1);

    CHECK_THROWS_AS(save_bundle(dup, TempDir("refuse").path()), DataError);
}

TEST_CASE("filter_subset identity, idempotence, cardinality") {
    const auto d = small_dataset();
    const GestureSubset all{"all", {1, 2, 3}};
    CHECK(same_data(filter_subset(d, all), d, 0.0));

    const GestureSubset two{"two", {1, 3}};
    const auto once = filter_subset(d, two);
    CHECK(same_data(filter_subset(once, two), once, 0.0));
    std::size_t expect = 0;
    for (const auto& t : d.trials) expect += two.gesture_ids.contains(t.key.gesture);
    CHECK(once.trials.size() == expect);
    CHECK(once.gesture_names.size() == 2);

    CHECK_THROWS_AS(filter_subset(d, GestureSubset{"none", {}}), DataError);
    CHECK_THROWS_AS(filter_subset(d, GestureSubset{"ghost", {42}}), DataError);
}

TEST_CASE("gesture subset files") {
    TempDir dir("subset");
    const GestureSubset s{"HCI-B", {1, 2, 3, 4, 5, 6, 7, 8}};
    save_subset(s, dir / "b.json");
    const auto back = load_subset(dir / "b.json");
    CHECK(back.name == s.name);
    CHECK(back.gesture_ids == s.gesture_ids);
    testsupport::write_file(dir / "e.json", R"({"name":"x","gesture_ids":[]})");
    CHECK_THROWS_AS(load_subset(dir / "e.json"), DataError);
}

TEST_CASE("hci subsets against the hci-like header") {
    const auto c = preset("hci-like", 0.05, 3);
    const auto header = dataset_header(c);
    const auto subsets = hci_subsets();
    REQUIRE(subsets.size() == 3);
    CHECK(subsets[0].gesture_ids.size() == 6);
    CHECK(subsets[1].gesture_ids.size() == 8);
    CHECK(subsets[2].gesture_ids.size() == 23);
    for (const auto& s : subsets)
        for (int g : s.gesture_ids) CHECK(header.gesture_names.contains(g));

    // cardinality on key lists, no signal generation needed
    std::size_t in_c = 0;
    const auto keys = trial_keys(c);
    for (const auto& k : keys) in_c += subsets[2].gesture_ids.contains(k.gesture);
    CHECK(in_c * 40 == keys.size() * 23);
}

TEST_CASE("full-scale preset trial counts") {
    CHECK(trial_keys(preset("bio-like", 1.0)).size() == 4200);
    CHECK(trial_keys(preset("hci-like", 1.0)).size() == 4800);
}
