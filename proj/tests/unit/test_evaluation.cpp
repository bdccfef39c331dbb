#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "stereo/agent/rule_based.hpp"
#include "stereo/backends/synthetic.hpp"
#include "stereo/dataset/fixture.hpp"
#include "stereo/error.hpp"
#include "stereo/evaluation/accuracy.hpp"
#include "stereo/evaluation/agreement.hpp"
#include "stereo/evaluation/benchmark.hpp"
#include "test_support.hpp"

using namespace stereo;

namespace {

Subgroup sg(const char* name) { return resolve_subgroup(name); }

AnnotationFile parse(const std::string& csv) {
    std::istringstream in(csv);
    return parse_annotations(in, "ann.csv");
}

StereotypeReport report_of(const std::string& query, const InstructionPair& pair, std::vector<LabeledImage> labels,
                           const DecisionRule& rule) {
    StereotypeReport r{query, {}, pair};
    r.intent.model = "SD-1.5";
    r.intent.dimension = pair.dimension();
    r.labels = std::move(labels);
    std::vector<Label> ls;
    for (const auto& l : r.labels) ls.push_back(l.label);
    r.score = score_calculate(ls);
    r.verdict = decide_verdict(r.score, pair.dimension(), rule);
    return r;
}

/// Reports whose labels are exactly the human ones, for two dimensions.
std::vector<StereotypeReport> sample_reports(const DecisionRule& rule, const std::string& prefix = "") {
    std::vector<LabeledImage> race, gender;
    for (int i = 0; i < 8; ++i) race.push_back({prefix + "r" + std::to_string(i), i < 6 ? Label(sg("african")) : Label(sg("asian"))});
    for (int i = 0; i < 6; ++i) gender.push_back({prefix + "g" + std::to_string(i), i % 2 ? Label(sg("male")) : Label(sg("female"))});
    return {report_of("q1", make_pair("People who are thugs", sg("african")), race, rule),
            report_of("q2", make_pair("People who are nurses", sg("female")), gender, rule)};
}

HumanLabels human_from(const std::vector<StereotypeReport>& reports) {
    HumanLabels out;
    for (const auto& r : reports) {
        for (const auto& l : r.labels) out[l.image_ref] = AggregatedLabel{l.label, 1, false};
    }
    return out;
}

std::string intent_reply(const DetectionIntent& i, bool omit_model) {
    Json j;
    j["model"] = omit_model ? Json(nullptr) : Json(i.model);
    j["dimension"] = i.dimension ? Json(std::string(to_string(*i.dimension))) : Json(nullptr);
    j["subgroup"] = i.requested_subgroup ? Json(std::string(i.requested_subgroup->name())) : Json(nullptr);
    j["text"] = i.open_text ? Json(*i.open_text) : Json(nullptr);
    return j.dump();
}

}  // namespace

TEST(Annotations, ParseAndAggregate) {
    auto file = parse(
        "image_ref,annotator_id,label\n"
        "a.png,1,African\n"
        "a.png,2,african\n"
        "a.png,3,None\n"
        "b.png,1,Male\n"
        "b.png,2,Female\n"
        "c.png,1,\n"
        "c.png,2,none\n"
        "c.png,3,Asian\n"
        "\n"
        "\"d,1.png\",1,Jew\n");
    ASSERT_EQ(file.entries.size(), 9u);
    EXPECT_EQ(file.entries.back().image_ref, "d,1.png");
    const auto h = aggregate_annotations(file);
    EXPECT_EQ(h.at("a.png").label, Label(sg("african")));
    EXPECT_EQ(h.at("a.png").annotators, 3u);
    EXPECT_FALSE(h.at("a.png").tied);
    // A tie for first place gives the None-marker.
    EXPECT_TRUE(h.at("b.png").tied);
    EXPECT_FALSE(h.at("b.png").label);
    // None votes count like any other label.
    EXPECT_FALSE(h.at("c.png").tied);
    EXPECT_FALSE(h.at("c.png").label);
    EXPECT_EQ(h.at("d,1.png").label, Label(sg("jew")));

    std::ostringstream out;
    write_annotations(out, file);
    EXPECT_EQ(aggregate_annotations(parse(out.str())), h);
}

TEST(Annotations, ParseErrorsCarryLineNumbers) {
    try {
        parse("image_ref,annotator_id,label\na.png,1,African\nb.png,1,Martian\n");
        FAIL() << "expected MalformedFile";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MalformedFile);
        EXPECT_NE(std::string(e.what()).find("ann.csv:3"), std::string::npos) << e.what();
    }
    EXPECT_STEREO_ERROR(parse("ref,who,label\n"), ErrorCode::MalformedFile);
    EXPECT_STEREO_ERROR(parse("image_ref,annotator_id,label\na.png,1\n"), ErrorCode::MalformedFile);
    EXPECT_STEREO_ERROR(parse(""), ErrorCode::MalformedFile);
    EXPECT_STEREO_ERROR(aggregate_annotations(parse("image_ref,annotator_id,label\n")), ErrorCode::MalformedFile);
}

TEST(Agreement, IdenticalLabelsAgreeFully) {
    const auto rule = DecisionRule::fixed_threshold(0.7);
    const auto reports = sample_reports(rule);
    const auto a = compare(reports, human_from(reports), rule);
    ASSERT_EQ(a.rows.size(), 2u);
    EXPECT_DOUBLE_EQ(a.verdict_accuracy, 1.0);
    for (const auto& row : a.rows) EXPECT_DOUBLE_EQ(row.gap(), 0.0);
    EXPECT_EQ(a.prompts_per_dimension[static_cast<std::size_t>(SocialDimension::Race)], 1u);
    EXPECT_FALSE(a.mean_gap[static_cast<std::size_t>(SocialDimension::Religion)]);
    EXPECT_EQ(a.rows[0].agent_verdict, Verdict::Stereotyped);
    EXPECT_EQ(a.rows[1].agent_verdict, Verdict::NotStereotyped);
}

TEST(Agreement, GapAndVerdictMismatch) {
    const auto rule = DecisionRule::fixed_threshold(0.7);
    const auto reports = sample_reports(rule);
    auto human = human_from(reports);
    // Humans see two of the African images as European: 4/8 against 6/8.
    human["r0"].label = sg("european");
    human["r1"].label = sg("european");
    // A label from another dimension counts as None on the human side.
    human["g0"].label = sg("muslim");
    const auto a = compare(reports, human, rule);
    EXPECT_DOUBLE_EQ(a.rows[0].agent.value, 0.75);
    EXPECT_DOUBLE_EQ(a.rows[0].human.value, 0.5);
    EXPECT_DOUBLE_EQ(a.rows[0].gap(), 0.25);
    EXPECT_EQ(a.rows[0].agent_verdict, Verdict::Stereotyped);
    EXPECT_EQ(a.rows[0].human_verdict, Verdict::NotStereotyped);
    EXPECT_EQ(a.rows[1].human.majority, Label(sg("male")));
    EXPECT_FALSE(a.rows[1].human.tied);
    EXPECT_EQ(a.rows[1].human.n_total, 6u);
    EXPECT_DOUBLE_EQ(*a.verdict_accuracy_per_dimension[static_cast<std::size_t>(SocialDimension::Race)], 0.0);
    EXPECT_DOUBLE_EQ(a.verdict_accuracy, 0.5);
}

TEST(Agreement, InvariantUnderImageRenaming) {
    const auto rule = DecisionRule::binomial(0.05);
    const auto a_reports = sample_reports(rule);
    const auto b_reports = sample_reports(rule, "renamed/");
    auto a_human = human_from(a_reports);
    a_human["r0"].label = std::nullopt;
    auto b_human = human_from(b_reports);
    b_human["renamed/r0"].label = std::nullopt;
    const auto a = compare(a_reports, a_human, rule);
    const auto b = compare(b_reports, b_human, rule);
    EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
}

TEST(Agreement, Preconditions) {
    const auto rule = DecisionRule::binomial(0.05);
    const auto reports = sample_reports(rule);
    auto human = human_from(reports);
    human.erase("g3");
    EXPECT_EQ(missing_images(reports, human), std::vector<std::string>{"g3"});
    EXPECT_STEREO_ERROR(compare(reports, human, rule), ErrorCode::CoverageGap);
    EXPECT_STEREO_ERROR(compare({}, human, rule), ErrorCode::PreconditionViolated);
    auto empty = reports;
    empty[0].labels.clear();
    EXPECT_STEREO_ERROR(compare(empty, human_from(reports), rule), ErrorCode::PreconditionViolated);
}

TEST(IntentAccuracy, GoldenSetWithFaithfulAndFaultyProviders) {
    const auto golden = load_golden_intents(test::source_path("data/golden_intents.jsonl"));
    ASSERT_EQ(golden.size(), 20u);

    std::vector<std::string> faithful, faulty;
    for (std::size_t i = 0; i < golden.size(); ++i) {
        faithful.push_back(intent_reply(golden[i].expected, false));
        faulty.push_back(intent_reply(golden[i].expected, i == 2));
    }
    ScriptedProvider good(faithful);
    auto acc = intent_accuracy(golden, good);
    EXPECT_EQ(acc.correct, 20u);
    EXPECT_DOUBLE_EQ(acc.fraction(), 1.0);

    // Row 2 names ChilloutMix; without a model the default SD-1.5 is used.
    ScriptedProvider bad(faulty);
    acc = intent_accuracy(golden, bad);
    EXPECT_DOUBLE_EQ(acc.fraction(), 0.95);
    ASSERT_EQ(acc.failures.size(), 1u);
    EXPECT_EQ(acc.failures[0].index, 2u);
    ASSERT_TRUE(acc.failures[0].got);
    EXPECT_EQ(acc.failures[0].got->model, "SD-1.5");
    EXPECT_EQ(to_json(acc)["failures"][0]["index"], 2);

    RuleBasedProvider heuristic;
    EXPECT_DOUBLE_EQ(intent_accuracy(golden, heuristic).fraction(), 1.0);
    EXPECT_STEREO_ERROR(intent_accuracy({}, heuristic), ErrorCode::PreconditionViolated);
}

TEST(IntentAccuracy, ExtractionErrorsAreMismatches) {
    std::vector<GoldenIntent> golden{{"Is SD-XL racist?", DetectionIntent{"SD-XL", SocialDimension::Race, {}, {}}}};
    ScriptedProvider none({"None", "None", "None"});
    const auto acc = intent_accuracy(golden, none);
    EXPECT_EQ(acc.correct, 0u);
    ASSERT_EQ(acc.failures.size(), 1u);
    EXPECT_FALSE(acc.failures[0].got);
}

TEST(ClassifierAccuracy, IdentityAndCoverage) {
    const auto set = signed_test_set(SocialDimension::Religion, 10, 3);
    ASSERT_EQ(set.size(), 60u);
    OracleClassifier a, b;
    const auto acc = classifier_accuracy(a, b, set, SocialDimension::Religion);
    EXPECT_DOUBLE_EQ(acc.mean_a, 1.0);
    EXPECT_DOUBLE_EQ(acc.mean_b, 1.0);
    EXPECT_EQ(acc.support, std::vector<std::size_t>(6, 10));
    EXPECT_NE(render_table(acc).find("Hindu"), std::string::npos);

    std::vector<ImageRecord> no_hindu;
    for (const auto& r : set) {
        if (r.signature != signature_of(sg("hindu"))) no_hindu.push_back(r);
    }
    EXPECT_STEREO_ERROR(classifier_accuracy(a, b, no_hindu, SocialDimension::Religion), ErrorCode::MissingSubgroupCoverage);

    auto unsigned_set = set;
    unsigned_set[0].signature.reset();
    EXPECT_STEREO_ERROR(classifier_accuracy(a, b, unsigned_set, SocialDimension::Religion), ErrorCode::MissingSignature);
}

TEST(ClassifierAccuracy, NoisyDiagonalsAreRecovered) {
    const auto set = signed_test_set(SocialDimension::Race, 400, 9);
    auto a = NoisyClassifier::uniform(0.75, 0.05, 5);
    auto b = NoisyClassifier::uniform(0.80, 0.05, 5);
    const auto acc = classifier_accuracy(a, b, set, SocialDimension::Race);
    // Binomial standard error with 2000 images is about 0.01.
    EXPECT_NEAR(acc.mean_a, 0.75, 0.04);
    EXPECT_NEAR(acc.mean_b, 0.80, 0.04);
    for (std::size_t g = 0; g < acc.subgroups.size(); ++g) EXPECT_GE(acc.accuracy_b[g], acc.accuracy_a[g]);
}

TEST(Benchmark, QueriesCoverEveryModelAndSubgroup) {
    const auto qs = benchmark_queries();
    ASSERT_EQ(qs.size(), 120u);
    std::set<std::string> unique;
    for (const auto& q : qs) {
        unique.insert(q.query);
        EXPECT_EQ(heuristic_intent(q.query), q.intent) << q.query;
    }
    EXPECT_EQ(unique.size(), 120u);
}

TEST(Benchmark, WorldSpecDependsOnModelAndPairOnly) {
    const auto store = make_fixture(bundled_fixture_manifest());
    const auto a = benchmark_world_spec("SD-XL", store);
    const auto b = benchmark_world_spec("SD-XL", store);
    EXPECT_EQ(a.rules.size(), store.size());
    ASSERT_EQ(a.rules.size(), b.rules.size());
    for (std::size_t i = 0; i < a.rules.size(); ++i) EXPECT_EQ(a.rules[i].pattern, b.rules[i].pattern);
}

TEST(Benchmark, OracleRunAgreesWithAnnotations) {
    auto store = std::make_shared<const InstructionStore>(make_fixture(bundled_fixture_manifest()));
    BenchmarkConfig cfg;
    cfg.n_images = 10;
    const auto run = run_synthetic_benchmark(cfg, store, std::make_shared<OracleClassifier>());
    EXPECT_EQ(run.outcomes.size(), 120u);
    EXPECT_EQ(run.agreement.rows.size(), successful_reports(run.outcomes).size());
    EXPECT_DOUBLE_EQ(run.agreement.verdict_accuracy, 1.0);
}
