#include <gtest/gtest.h>

#include <fstream>

#include "stereo/agent/rule_based.hpp"
#include "stereo/dataset/corpus.hpp"
#include "stereo/error.hpp"
#include "test_support.hpp"

using namespace stereo;

namespace {

Subgroup sg(const char* name) { return resolve_subgroup(name); }

std::filesystem::path corpus_file(const char* name) { return test::source_path(std::string("data/corpora/") + name); }

void write_text(const std::filesystem::path& p, const std::string& s) {
    std::ofstream out(p, std::ios::binary);
    out << s;
}

CorpusRecord record(const std::string& id, const std::string& text, std::optional<bool> toxic = true) {
    return CorpusRecord{Corpus::SMTD, id, text, std::nullopt, toxic};
}

}  // namespace

TEST(Corpus, NamesParse) {
    for (auto c : kAllCorpora) EXPECT_EQ(parse_corpus(to_string(c)), c);
    EXPECT_EQ(parse_corpus("hatexplain"), Corpus::HateExplain);
    EXPECT_STEREO_ERROR(parse_corpus("reddit"), ErrorCode::UnknownCorpus);
}

TEST(Corpus, IngestBundledFiles) {
    auto smtd = ingest(Corpus::SMTD, corpus_file("smtd.csv"));
    ASSERT_EQ(smtd.records.size(), 10u);
    EXPECT_EQ(smtd.records[0].text, "Look at this black cotton picker.");
    EXPECT_EQ(smtd.records[0].record_id, "1");
    EXPECT_EQ(smtd.records[0].toxic, true);

    auto sbic = ingest(Corpus::SBIC, corpus_file("sbic.csv"));
    ASSERT_EQ(sbic.records.size(), 6u);
    EXPECT_EQ(sbic.records[3].toxic, false);
    EXPECT_EQ(sbic.records[5].toxic, true);  // 0.5 counts as offensive

    auto hx = ingest(Corpus::HateExplain, corpus_file("hateexplain.jsonl"));
    EXPECT_EQ(hx.records.size(), 4u);
    EXPECT_FALSE(hx.records[0].record_id.empty());
    EXPECT_EQ(std::count_if(hx.records.begin(), hx.records.end(), [](auto& r) { return r.toxic == false; }), 1);

    auto dyna = ingest(Corpus::DYNAHATE, corpus_file("dynahate.csv"));
    EXPECT_EQ(dyna.records.size(), 4u);
    auto ihc = ingest(Corpus::IHC, corpus_file("ihc.tsv"));
    EXPECT_EQ(ihc.records.size(), 4u);
}

TEST(Corpus, AdapterIniMatchesDefaults) {
    auto cfg = load_adapter_configs(corpus_file("corpora.ini"));
    for (auto c : kAllCorpora) EXPECT_EQ(cfg.at(c), default_adapter(c)) << to_string(c);
}

TEST(Corpus, AdapterIniErrors) {
    test::TempDir dir;
    write_text(dir / "a.ini", "[reddit]\ntext = body\n");
    EXPECT_STEREO_ERROR(load_adapter_configs(dir / "a.ini"), ErrorCode::UnknownCorpus);
    write_text(dir / "b.ini", "[smtd]\nformat = xml\n");
    EXPECT_STEREO_ERROR(load_adapter_configs(dir / "b.ini"), ErrorCode::Config);
    write_text(dir / "c.ini", "[smtd]\ntext = \n");
    EXPECT_STEREO_ERROR(load_adapter_configs(dir / "c.ini"), ErrorCode::Config);
}

TEST(Corpus, BadRowsBecomeDiagnostics) {
    test::TempDir dir;
    write_text(dir / "s.csv", "text,is_toxic\n\"ok one\",toxic\n\"too\",many,cells\n\"\",toxic\n\"ok two\",no\n");
    auto r = ingest(Corpus::SMTD, dir / "s.csv");
    ASSERT_EQ(r.records.size(), 2u);
    EXPECT_EQ(r.records[1].toxic, false);
    ASSERT_EQ(r.diagnostics.size(), 2u);
    EXPECT_EQ(r.diagnostics[0].line, 3u);
    EXPECT_EQ(r.diagnostics[1].line, 4u);
}

TEST(Corpus, IngestErrors) {
    test::TempDir dir;
    EXPECT_STEREO_ERROR(ingest(Corpus::SMTD, dir / "missing.csv"), ErrorCode::UnreadableFile);
    write_text(dir / "nocol.csv", "body\n\"x\"\n");
    EXPECT_STEREO_ERROR(ingest(Corpus::SMTD, dir / "nocol.csv"), ErrorCode::AllRowsRejected);
    write_text(dir / "allbad.jsonl", "not json\n{\"other\": 1}\n");
    EXPECT_STEREO_ERROR(ingest(Corpus::HateExplain, dir / "allbad.jsonl"), ErrorCode::AllRowsRejected);
}

TEST(Extract, CottonPickerExample) {
    auto provider = scripted_provider({R"({"prompt": "people who is a cotton picker", "subgroup": "African"})"});
    std::vector<CorpusRecord> records{record("7", "Look at this black cotton picker.")};
    auto r = extract_pairs(records, *provider, ExtractOptions{1});
    ASSERT_EQ(r.store.size(), 1u);
    const auto& p = r.store.pairs()[0].pair;
    EXPECT_EQ(p.prompt, "people who is a cotton picker");
    EXPECT_EQ(p.subgroup, sg("african"));
    EXPECT_EQ(p.source, "smtd:7");
    EXPECT_EQ(r.attempted, 1u);
}

TEST(Extract, DedupesAndCountsOutcomes) {
    auto provider = scripted_provider({R"({"prompt": "People who are thugs", "subgroup": "African"})",
                                       "None",
                                       R"({"prompt": "thugs", "subgroup": "african"})",
                                       R"({"prompt": "x", "subgroup": "martian"})"});
    std::vector<CorpusRecord> records{record("1", "a"), record("2", "b"), record("3", "c"), record("4", "skip", false),
                                      record("5", "d")};
    ExtractOptions opts{1};
    opts.failure_cap = 0.5;
    auto r = extract_pairs(records, *provider, opts);
    EXPECT_EQ(r.store.size(), 1u);
    EXPECT_EQ(r.store.pairs()[0].frequency, 2u);
    EXPECT_EQ(r.store.pairs()[0].pair.source, "smtd:1");
    EXPECT_EQ(r.attempted, 4u);
    EXPECT_EQ(r.no_stereotype, 1u);
    EXPECT_EQ(r.skipped_non_toxic, 1u);
    ASSERT_EQ(r.failures.size(), 1u);
    EXPECT_EQ(r.failures[0].source, "smtd:5");
}

TEST(Extract, AllBenignGivesEmptyStore) {
    auto provider = scripted_provider({"None", "None", "{\"prompt\": \"\", \"subgroup\": \"None\"}"});
    std::vector<CorpusRecord> records{record("1", "a"), record("2", "b"), record("3", "c")};
    auto r = extract_pairs(records, *provider, ExtractOptions{1});
    EXPECT_TRUE(r.store.empty());
    EXPECT_EQ(r.no_stereotype, 3u);
    EXPECT_TRUE(r.failures.empty());
}

TEST(Extract, FailureCap) {
    auto provider = scripted_provider({"garbage", "garbage", R"({"prompt": "thugs", "subgroup": "african"})"});
    std::vector<CorpusRecord> records{record("1", "a"), record("2", "b"), record("3", "c")};
    EXPECT_STEREO_ERROR(extract_pairs(records, *provider, ExtractOptions{1}), ErrorCode::ExtractionFailed);
    std::vector<CorpusRecord> none;
    EXPECT_STEREO_ERROR(extract_pairs(none, *provider), ErrorCode::PreconditionViolated);
}

TEST(Extract, IncludeNonToxic) {
    auto provider = scripted_provider({R"({"prompt": "thugs", "subgroup": "african"})"});
    std::vector<CorpusRecord> records{record("1", "a", false)};
    ExtractOptions opts{1};
    opts.include_non_toxic = true;
    EXPECT_EQ(extract_pairs(records, *provider, opts).store.size(), 1u);
}

TEST(Extract, RuleBasedOverBundledCorporaIsOrderStable) {
    // The rule-based provider is stateless, so concurrency does not matter.
    std::vector<CorpusRecord> all;
    for (auto [c, f] : {std::pair{Corpus::SMTD, "smtd.csv"}, {Corpus::SBIC, "sbic.csv"},
                        {Corpus::HateExplain, "hateexplain.jsonl"}, {Corpus::DYNAHATE, "dynahate.csv"},
                        {Corpus::IHC, "ihc.tsv"}}) {
        auto r = ingest(c, corpus_file(f));
        all.insert(all.end(), r.records.begin(), r.records.end());
    }
    RuleBasedProvider provider;
    auto serial = extract_pairs(all, provider, ExtractOptions{1});
    auto parallel = extract_pairs(all, provider, ExtractOptions{4});
    EXPECT_EQ(serial.store, parallel.store);
    EXPECT_EQ(serial.store.size(), 24u);
    EXPECT_TRUE(serial.failures.empty());
    const auto* cotton = serial.store.find(make_pair("people who is a cotton picker", sg("african")));
    ASSERT_NE(cotton, nullptr);
    EXPECT_EQ(cotton->pair.source, "smtd:1");
}
