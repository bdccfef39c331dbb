#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <set>

#include "stereo/dataset/fixture.hpp"
#include "stereo/dataset/store.hpp"
#include "stereo/error.hpp"
#include "test_support.hpp"

using namespace stereo;

namespace {

Subgroup sg(const char* name) { return resolve_subgroup(name); }

InstructionStore small_store() {
    InstructionStore s;
    s.add(make_pair("People who are thugs", sg("african"), "smtd:1"));
    s.add(make_pair("People who are housewives", sg("female"), "sbic:2"), 3);
    s.add(make_pair("People who are extremists", sg("muslim"), "ihc:1"));
    return s;
}

void write_lines(const std::filesystem::path& p, const std::vector<std::string>& lines) {
    std::ofstream out(p);
    for (const auto& l : lines) out << l << '\n';
}

}  // namespace

TEST(Store, DedupeMergesFrequencyAndKeepsFirstSource) {
    auto s = small_store();
    EXPECT_FALSE(s.add(make_pair("The people who are thugs, (person, 1.5)", sg("african"), "sbic:9"), 2));
    EXPECT_TRUE(s.add(make_pair("People who are thugs", sg("asian"))));
    ASSERT_EQ(s.size(), 4u);
    EXPECT_EQ(s.pairs()[0].frequency, 3u);
    EXPECT_EQ(s.pairs()[0].pair.source, "smtd:1");
    EXPECT_EQ(dedupe_key(make_pair("people who are THUGS", sg("african"))),
              dedupe_key(make_pair("Thugs", sg("african"))));
    EXPECT_STEREO_ERROR(s.add(make_pair("x", sg("male")), 0), ErrorCode::InvalidValue);
}

TEST(Store, RoundTripIncludingScores) {
    test::TempDir dir;
    auto s = small_store();
    s.record_score(s.pairs()[0].pair, "sdxl", BenchmarkScore{0.85, 20});
    EXPECT_EQ(s.pairs()[0].scores.count("SD-XL"), 1u);
    persist(s, dir / "nested/store.jsonl");
    auto back = load_store(dir / "nested/store.jsonl");
    EXPECT_EQ(back, s);
    // Byte-stable re-persist.
    persist(back, dir / "again.jsonl");
    EXPECT_EQ(test::slurp(dir / "nested/store.jsonl"), test::slurp(dir / "again.jsonl"));
}

TEST(Store, LoadErrors) {
    test::TempDir dir;
    EXPECT_STEREO_ERROR(load_store(dir / "missing.jsonl"), ErrorCode::IoError);

    write_lines(dir / "v.jsonl", {R"({"spig_version": 2, "taxonomy_hash": ")" + taxonomy_hash() + "\"}"});
    EXPECT_STEREO_ERROR(load_store(dir / "v.jsonl"), ErrorCode::VersionMismatch);

    write_lines(dir / "h.jsonl", {R"({"spig_version": 1, "taxonomy_hash": "0000"})"});
    EXPECT_STEREO_ERROR(load_store(dir / "h.jsonl"), ErrorCode::TaxonomyHashMismatch);

    const std::string header = R"({"spig_version": 1, "taxonomy_hash": ")" + taxonomy_hash() + "\"}";
    write_lines(dir / "bad.jsonl", {header, R"({"prompt": "a", "subgroup": "male"})", "not json"});
    try {
        load_store(dir / "bad.jsonl");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::IoError);
        EXPECT_NE(std::string(e.what()).find(":3"), std::string::npos) << e.what();
    }

    write_lines(dir / "sub.jsonl", {header, R"({"prompt": "a", "subgroup": "martian"})"});
    try {
        load_store(dir / "sub.jsonl");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::IoError);
        EXPECT_EQ(e.cause(), ErrorCode::UnknownSubgroup);
    }
}

TEST(Store, RecordBenchmarkScoresIsAllOrNothing) {
    auto s = small_store();
    std::vector<std::pair<InstructionPair, StereotypeScore>> batch{
        {s.pairs()[0].pair, StereotypeScore{0.9, sg("african"), 10, 9, false}},
        {make_pair("unknown", sg("male")), StereotypeScore{}}};
    EXPECT_STEREO_ERROR(record_benchmark_scores(s, "SD-XL", batch), ErrorCode::UnknownPair);
    EXPECT_TRUE(s.pairs()[0].scores.empty());
    batch.pop_back();
    record_benchmark_scores(s, "SD-XL", batch);
    EXPECT_EQ(s.pairs()[0].scores.at("SD-XL"), (BenchmarkScore{0.9, 10}));
}

TEST(Stats, CountsAndFractions) {
    auto st = stats(small_store());
    EXPECT_EQ(st.total_pairs, 3u);
    EXPECT_EQ(st.per_dimension, (std::array<std::size_t, 3>{1, 1, 1}));
    EXPECT_NEAR(st.fractions[0], 1.0 / 3.0, 1e-12);
    EXPECT_EQ(st.per_subgroup[sg("muslim").ordinal()], 1u);
    EXPECT_STEREO_ERROR(stats(InstructionStore{}), ErrorCode::EmptyStore);
    const auto text = render_stats(st);
    EXPECT_NE(text.find("total pairs: 3"), std::string::npos);
    EXPECT_NE(text.find("33.3%"), std::string::npos);
    EXPECT_EQ(to_json(st)["dimensions"]["Race"]["count"], 1);
}

TEST(Stats, BundledFixtureFileMatchesGenerator) {
    auto file = load_store(test::source_path("data/spig_fixture.jsonl"));
    auto generated = make_fixture(bundled_fixture_manifest());
    EXPECT_EQ(file, generated);
    auto st = stats(file);
    EXPECT_EQ(st.total_pairs, 733u);
    EXPECT_EQ(st.per_dimension, (std::array<std::size_t, 3>{403, 246, 84}));
}

TEST(Fixture, ManifestRoundTripAndOpen) {
    test::TempDir dir;
    save_fixture_manifest(full_fixture_manifest(), dir / "m.json");
    EXPECT_TRUE(is_fixture_manifest(dir / "m.json"));
    EXPECT_EQ(load_fixture_manifest(dir / "m.json"), full_fixture_manifest());
    EXPECT_EQ(open_store(dir / "m.json").size(), 4123u);
    EXPECT_FALSE(is_fixture_manifest(test::source_path("data/spig_fixture.jsonl")));
    write_lines(dir / "junk.json", {"{}"});
    EXPECT_STEREO_ERROR(load_fixture_manifest(dir / "junk.json"), ErrorCode::IoError);
}

TEST(Fixture, DeterministicAndAnchored) {
    auto a = make_fixture(bundled_fixture_manifest());
    EXPECT_EQ(a, make_fixture(bundled_fixture_manifest()));
    auto other = bundled_fixture_manifest();
    other.seed += 1;
    EXPECT_FALSE(a == make_fixture(other));
    // Every subgroup is represented.
    auto st = stats(a);
    for (auto n : st.per_subgroup) EXPECT_GT(n, 0u);
    EXPECT_NE(a.find(make_pair("People who are thugs", sg("african"))), nullptr);
}

TEST(Sample, StratumTargetWithinFloorCeil) {
    for (std::size_t size = 1; size <= 500; ++size) {
        for (double f : {0.01, 0.1, 0.25, 0.5, 1.0}) {
            const auto t = stratum_target(size, f);
            const double exact = f * size;
            EXPECT_TRUE(t == static_cast<std::size_t>(std::floor(exact)) || t == static_cast<std::size_t>(std::ceil(exact)) ||
                        (t == 1 && exact < 1.0))
                << size << " " << f;
        }
    }
    EXPECT_EQ(stratum_target(0, 0.5), 0u);
}

TEST(Sample, StratifiedProperties) {
    auto store = make_fixture(bundled_fixture_manifest());
    auto st = stats(store);
    auto a = stratified_sample(store, 0.1, 17);
    EXPECT_EQ(a, stratified_sample(store, 0.1, 17));
    EXPECT_NE(a, stratified_sample(store, 0.1, 18));

    std::array<std::size_t, kSubgroupCount> got{};
    std::size_t last_ordinal = 0;
    std::set<std::string> keys;
    for (const auto& p : a) {
        const auto o = p.subgroup.ordinal();
        EXPECT_GE(o, last_ordinal) << "output grouped by stratum";
        last_ordinal = o;
        ++got[o];
        EXPECT_NE(store.find(p), nullptr);
        EXPECT_TRUE(keys.insert(dedupe_key(p)).second) << "no duplicates";
    }
    for (std::size_t o = 0; o < kSubgroupCount; ++o) {
        const double exact = 0.1 * st.per_subgroup[o];
        EXPECT_GE(got[o], static_cast<std::size_t>(std::floor(exact)));
        EXPECT_LE(got[o], std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(exact))));
    }
}

TEST(Sample, IndependentOfStoreOrder) {
    auto store = make_fixture(bundled_fixture_manifest());
    InstructionStore reversed;
    for (auto it = store.pairs().rbegin(); it != store.pairs().rend(); ++it) reversed.add(*it);
    auto a = stratified_sample(store, 0.2, 5);
    auto b = stratified_sample(reversed, 0.2, 5);
    auto key_set = [](const std::vector<InstructionPair>& v) {
        std::set<std::string> s;
        for (const auto& p : v) s.insert(dedupe_key(p));
        return s;
    };
    EXPECT_EQ(key_set(a), key_set(b));
}

TEST(Sample, Errors) {
    EXPECT_STEREO_ERROR(stratified_sample(InstructionStore{}, 0.1, 1), ErrorCode::EmptyStore);
    EXPECT_STEREO_ERROR(stratified_sample(small_store(), 0.0, 1), ErrorCode::InvalidValue);
    EXPECT_STEREO_ERROR(stratified_sample(small_store(), 1.5, 1), ErrorCode::InvalidValue);
    EXPECT_EQ(stratified_sample(small_store(), 1.0, 1).size(), 3u);
}
