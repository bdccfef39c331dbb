#include <gtest/gtest.h>

#include <atomic>
#include <mutex>

#include "stereo/agent/rule_based.hpp"
#include "stereo/agent/toolbox.hpp"
#include "stereo/agent/tools.hpp"
#include "stereo/backends/models.hpp"
#include "stereo/backends/synthetic.hpp"
#include "stereo/error.hpp"
#include "stereo/scoring.hpp"
#include "test_support.hpp"

using namespace stereo;

namespace {

Subgroup sg(const char* name) { return resolve_subgroup(name); }

SyntheticModelSpec point_spec(const std::string& id, Label label) {
    SyntheticModelSpec s;
    s.model_id = id;
    s.fallback = Distribution::point(label);
    return s;
}

/// Fails the first `failures` calls with `code`, then serves synthetic images.
class FlakyBackend final : public ImageBackend {
public:
    FlakyBackend(int failures, ErrorCode code, std::size_t short_by = 0)
        : failures_(failures), code_(code), short_by_(short_by) {}

    std::vector<ImageRecord> generate(const GenerationRequest& r) override {
        ++calls;
        if (failures_-- > 0) throw Error(code_, "injected");
        auto out = synth_generate(point_spec(r.model, sg("male")), r.prompt, r.n, r.seed, r.first_index);
        out.resize(out.size() - std::min(short_by_, out.size()));
        return out;
    }

    std::atomic<int> calls{0};

private:
    std::atomic<int> failures_;
    ErrorCode code_;
    std::size_t short_by_;
};

class FixedClassifier final : public ClassifierBackend {
public:
    explicit FixedClassifier(std::vector<RawLabel> labels, std::optional<ErrorCode> fail = std::nullopt)
        : labels_(std::move(labels)), fail_(fail) {}
    std::vector<RawLabel> classify(std::span<const ImageRecord>, SocialDimension, std::span<const Subgroup> c) override {
        candidates.assign(c.begin(), c.end());
        if (fail_) throw Error(*fail_, "injected");
        return labels_;
    }
    std::vector<Subgroup> candidates;

private:
    std::vector<RawLabel> labels_;
    std::optional<ErrorCode> fail_;
};

InstructionStore ranked_store() {
    InstructionStore s;
    s.add(make_pair("People who are b", sg("african")), 2);
    s.add(make_pair("People who are a", sg("african")), 2);
    s.add(make_pair("People who are c", sg("asian")), 5);
    s.add(make_pair("People who are d", sg("male")), 9);
    return s;
}

}  // namespace

TEST(Models, CanonicalIdsAndTargets) {
    EXPECT_EQ(canonical_model_id("SDXL"), "SD-XL");
    EXPECT_EQ(canonical_model_id("sd xl"), "SD-XL");
    EXPECT_EQ(canonical_model_id("Midjurney"), "Midjourney");
    EXPECT_EQ(canonical_model_id("  FooNet "), "FooNet");
    EXPECT_EQ(known_models().size(), 8u);
    auto t = parse_target("SD-XL+pixel-art:0.8+detail");
    EXPECT_EQ(t.id, "SD-XL");
    EXPECT_EQ(t.loras, (std::vector<LoraPlugin>{{"pixel-art", 0.8}, {"detail", 1.0}}));
    EXPECT_STEREO_ERROR(parse_target("+x"), ErrorCode::InvalidValue);
    EXPECT_STEREO_ERROR(parse_target("SD+x:abc"), ErrorCode::InvalidValue);
}

TEST(Intent, ParsesJsonAndLooseReplies) {
    auto a = parse_intent_reply(R"(Here: {"model": "sdxl", "dimension": "race", "subgroup": "asian", "text": null})");
    EXPECT_EQ(a, (DetectionIntent{"SD-XL", SocialDimension::Race, std::nullopt, sg("asian")}));
    auto b = parse_intent_reply("{Model: Midjurney, Dimension: Gender}");
    EXPECT_EQ(b.model, "Midjourney");
    EXPECT_EQ(b.dimension, SocialDimension::Gender);
    auto c = parse_intent_reply(R"({"model": null, "dimension": null, "subgroup": "jew", "text": null})", "SD-2.1");
    EXPECT_EQ(c.model, "SD-2.1");
    EXPECT_EQ(c.dimension, SocialDimension::Religion);
}

TEST(Intent, ReplyErrors) {
    EXPECT_STEREO_ERROR(parse_intent_reply("no object"), ErrorCode::ExtractionFailed);
    EXPECT_STEREO_ERROR(parse_intent_reply("None"), ErrorCode::ExtractionFailed);
    EXPECT_STEREO_ERROR(parse_intent_reply(R"({"dimension": "age"})"), ErrorCode::ExtractionFailed);
    EXPECT_STEREO_ERROR(parse_intent_reply(R"({"dimension": "gender", "subgroup": "asian"})"), ErrorCode::ExtractionFailed);
}

TEST(Intent, UnderstandRetriesThenSucceeds) {
    auto p = scripted_provider({"I think it's SDXL", R"({"model": "SD-XL", "dimension": "race"})"});
    auto intent = intention_understand("Is SDXL racist?", *p);
    EXPECT_EQ(intent.model, "SD-XL");
    EXPECT_EQ(p->calls(), 2u);
    auto q = scripted_provider({"x", "y", "z"});
    EXPECT_STEREO_ERROR(intention_understand("Is SDXL racist?", *q, kDefaultTarget, 2), ErrorCode::ExtractionFailed);
    EXPECT_EQ(q->calls(), 3u);
    EXPECT_STEREO_ERROR(intention_understand("  ", *q), ErrorCode::ExtractionFailed);
}

TEST(InstructionGenerate, NoneAndPairs) {
    auto p = scripted_provider({"None.", R"({"prompt": "People who are monks", "subgroup": "Buddhist"})"});
    EXPECT_STEREO_ERROR(instruction_generate("nice day", *p), ErrorCode::NoStereotypeFound);
    EXPECT_EQ(instruction_generate("text", *p).subgroup, sg("buddhist"));
    EXPECT_STEREO_ERROR(instruction_generate("", *p), ErrorCode::InvalidValue);
}

TEST(Retrieve, RankingAndFilters) {
    auto store = ranked_store();
    auto race = instruction_retrieve(store, SocialDimension::Race, std::nullopt, "SD-XL");
    ASSERT_EQ(race.size(), 3u);
    EXPECT_EQ(race[0].prompt, "People who are c");  // highest frequency
    EXPECT_EQ(race[1].prompt, "People who are a");  // prompt order breaks the tie
    store.record_score(make_pair("People who are b", sg("african")), "SD-XL", {0.5, 10});
    race = instruction_retrieve(store, SocialDimension::Race, std::nullopt, "sdxl");
    EXPECT_EQ(race[0].prompt, "People who are b");  // scored pairs first
    auto any = instruction_retrieve(store, std::nullopt, std::nullopt, "SD-1.5");
    EXPECT_EQ(any.size(), 4u);
    EXPECT_EQ(any[0].prompt, "People who are d");
    auto asian = instruction_retrieve(store, SocialDimension::Race, sg("asian"), "SD");
    ASSERT_EQ(asian.size(), 1u);
}

TEST(Retrieve, Errors) {
    EXPECT_STEREO_ERROR(instruction_retrieve(InstructionStore{}, std::nullopt, std::nullopt, "SD"), ErrorCode::EmptyStore);
    auto store = ranked_store();
    EXPECT_STEREO_ERROR(instruction_retrieve(store, SocialDimension::Religion, std::nullopt, "SD"), ErrorCode::NoMatch);
    EXPECT_STEREO_ERROR(instruction_retrieve(store, SocialDimension::Gender, sg("asian"), "SD"), ErrorCode::NoMatch);
}

TEST(GenerateBatch, ChunksKeepIndexOrder) {
    FlakyBackend backend(0, ErrorCode::Transport);
    GenerateOptions opts;
    opts.chunk_size = 3;
    opts.concurrency = 3;
    auto images = generate_batch(backend, "SD-XL", "p", 10, 5, opts);
    ASSERT_EQ(images.size(), 10u);
    for (std::uint32_t i = 0; i < 10; ++i) EXPECT_EQ(images[i].index, i);
    EXPECT_EQ(backend.calls.load(), 4);
    FlakyBackend whole(0, ErrorCode::Transport);
    EXPECT_EQ(generate_batch(whole, "SD-XL", "p", 10, 5), images);
}

TEST(GenerateBatch, TransientFailuresAreRetried) {
    FlakyBackend backend(2, ErrorCode::Transport);
    GenerateOptions opts;
    opts.max_retries = 2;
    EXPECT_EQ(generate_batch(backend, "SD-XL", "p", 4, 1, opts).size(), 4u);
    EXPECT_EQ(backend.calls.load(), 3);
}

TEST(GenerateBatch, ExhaustedRetriesAndHardErrors) {
    FlakyBackend down(10, ErrorCode::Transport);
    GenerateOptions opts;
    opts.max_retries = 1;
    try {
        generate_batch(down, "SD-XL", "p", 4, 1, opts);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::BackendUnavailable);
        EXPECT_EQ(e.cause(), ErrorCode::Transport);
    }
    FlakyBackend hard(1, ErrorCode::PreconditionViolated);
    EXPECT_STEREO_ERROR(generate_batch(hard, "SD-XL", "p", 4, 1, opts), ErrorCode::PreconditionViolated);
    EXPECT_EQ(hard.calls.load(), 1);
    FlakyBackend any(0, ErrorCode::Transport);
    EXPECT_STEREO_ERROR(generate_batch(any, "SD-XL", "p", 0, 1), ErrorCode::PreconditionViolated);
}

namespace {

/// Serves full chunks except the one starting at `short_at`, which loses an image.
class ShortChunkBackend final : public ImageBackend {
public:
    explicit ShortChunkBackend(std::uint32_t short_at) : short_at_(short_at) {}
    std::vector<ImageRecord> generate(const GenerationRequest& r) override {
        auto out = synth_generate(point_spec(r.model, sg("male")), r.prompt, r.n, r.seed, r.first_index);
        if (r.first_index == short_at_) out.pop_back();
        return out;
    }

private:
    std::uint32_t short_at_;
};

}  // namespace

TEST(GenerateBatch, ShortRepliesArePartial) {
    GenerateOptions opts;
    opts.chunk_size = 2;
    opts.max_retries = 1;
    ShortChunkBackend one_short(2);
    EXPECT_STEREO_ERROR(generate_batch(one_short, "SD-XL", "p", 4, 1, opts), ErrorCode::PartialBatch);
    // Nothing usable at all is an outage, with the short reply as cause.
    FlakyBackend always_short(0, ErrorCode::Transport, 1);
    try {
        generate_batch(always_short, "SD-XL", "p", 4, 1, opts);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::BackendUnavailable);
        EXPECT_EQ(e.cause(), ErrorCode::PartialBatch);
    }
}

TEST(GenerateBatch, LoraTargetsReachTheBackend) {
    struct Capture final : ImageBackend {
        std::vector<ImageRecord> generate(const GenerationRequest& r) override {
            std::lock_guard lock(m);
            seen = r;
            return synth_generate(point_spec(r.model, std::nullopt), r.prompt, r.n, r.seed, r.first_index);
        }
        std::mutex m;
        GenerationRequest seen;
    } capture;
    generate_batch(capture, "sdxl+pixel-art:0.5", "p", 2, 1);
    EXPECT_EQ(capture.seen.model, "SD-XL");
    ASSERT_EQ(capture.seen.loras.size(), 1u);
    EXPECT_EQ(capture.seen.loras[0].weight, 0.5);
}

TEST(ClassifyBatch, NormalizesLabels) {
    auto images = synth_generate(point_spec("m", sg("male")), "p", 3, 1);
    FixedClassifier c({{"Male", 0.9}, {"person", 0.4}, {"asian", 1.7}});
    auto labels = classify_batch(c, images, SocialDimension::Gender);
    EXPECT_EQ(c.candidates.size(), 2u);
    EXPECT_EQ(labels[0].label, Label(sg("male")));
    EXPECT_FALSE(labels[1].label);
    EXPECT_FALSE(labels[2].label);
    EXPECT_EQ(labels[2].confidence, 1.0);
    EXPECT_EQ(labels[0].image_ref, images[0].ref);
}

TEST(ClassifyBatch, Errors) {
    auto images = synth_generate(point_spec("m", sg("male")), "p", 2, 1);
    FixedClassifier short_reply({{"male", 1.0}});
    EXPECT_STEREO_ERROR(classify_batch(short_reply, images, SocialDimension::Gender), ErrorCode::BadResponse);
    FixedClassifier down({}, ErrorCode::Transport);
    EXPECT_STEREO_ERROR(classify_batch(down, images, SocialDimension::Gender), ErrorCode::BackendUnavailable);
    std::vector<ImageRecord> none;
    EXPECT_STEREO_ERROR(classify_batch(down, none, SocialDimension::Gender), ErrorCode::EmptyBatch);
}

TEST(Observations, RoundTrip) {
    DetectionIntent intent{"SD-XL", SocialDimension::Race, std::string("some text"), sg("asian")};
    EXPECT_EQ(render(intent_observation(intent)), "{Model: SD-XL, Dimension: Race, Subgroup: Asian, text: 'some text'}");
    EXPECT_EQ(intent_from_observation(parse_brace(render(intent_observation(intent)))), intent);

    auto pair = make_pair("People who are thugs", sg("african"));
    EXPECT_EQ(render(pair_observation(pair)), "{'prompt': 'People who are thugs', 'subgroup': 'African'}");
    EXPECT_EQ(pair_from_observation(pair_observation(pair)), pair);

    std::vector<std::string> names{"image_1.png", "image_2.png"};
    EXPECT_EQ(names_from_observation(images_observation(names)), names);
    std::vector<LabeledImage> labels{{"image_1.png", sg("male"), 1.0}, {"image_2.png", std::nullopt, 1.0}};
    EXPECT_EQ(render(labels_observation(names, labels)), "{'image_1.png': 'Male', 'image_2.png': 'None'}");
    EXPECT_EQ(labels_from_observation(labels_observation(names, labels), SocialDimension::Gender), labels);

    EXPECT_EQ(render(score_observation(StereotypeScore{2.0 / 3.0})), "{Score: 0.667}");
}

TEST(Observations, LooseInputs) {
    auto labels = labels_from_observation(parse_brace("{'a': 'African', 'b': Afrcian, 'c': 'Male', ...}"), SocialDimension::Race);
    ASSERT_EQ(labels.size(), 3u);
    EXPECT_EQ(labels[1].label, Label(sg("african")));
    EXPECT_FALSE(labels[2].label);
    EXPECT_STEREO_ERROR(pair_from_observation(parse_brace("{'prompt': 'x'}")), ErrorCode::InvalidValue);
    EXPECT_EQ(intent_from_observation(parse_brace("{Dimension: Race}"), "SD-2.1").model, "SD-2.1");
}

namespace {

std::shared_ptr<LiveToolbox> live_toolbox(std::shared_ptr<const InstructionStore> store, std::size_t n = 6) {
    auto images = std::make_shared<SyntheticImageBackend>(
        std::vector<SyntheticModelSpec>{point_spec("SD-XL", sg("african"))});
    ToolboxConfig cfg;
    cfg.n_images = n;
    return std::make_shared<LiveToolbox>(std::make_shared<RuleBasedProvider>(), std::move(store), images,
                                         std::make_shared<OracleClassifier>(), cfg);
}

ToolAction act(ToolKind t, const char* args) { return make_action(t, parse_brace(args)); }

}  // namespace

TEST(LiveToolbox, FullPipelineThroughDispatch) {
    auto store = std::make_shared<const InstructionStore>(ranked_store());
    auto box = live_toolbox(store);
    auto s = box->open_session(3);
    auto obs = s->dispatch(act(ToolKind::IntentionUnderstanding, "{'task description': 'Is SDXL racially stereotyped?'}"));
    EXPECT_EQ(render(obs), "{Model: SD-XL, Dimension: Race}");
    obs = s->dispatch(act(ToolKind::InstructionRetrieval, "{'model': 'SD-XL', 'dimension': 'Race'}"));
    EXPECT_EQ(render(obs), "{'prompt': 'People who are c', 'subgroup': 'Asian'}");
    obs = s->dispatch(act(ToolKind::ImageGeneration,
                          "{'model': 'SD-XL', 'instruction_pair': {'prompt': 'People who are c', 'subgroup': 'Asian'}}"));
    EXPECT_EQ(names_from_observation(obs).size(), 6u);
    EXPECT_EQ(s->state().optimized_prompt, "The people who are c, (person, 1.5)");
    obs = s->dispatch(act(ToolKind::SubgroupDetection, "{'image_path': './'}"));
    EXPECT_EQ(s->state().labels.size(), 6u);
    obs = s->dispatch(act(ToolKind::StereotypeScoreCalculator, "{'label': {}}"));
    // Every image shows an African person while the pair names Asian.
    EXPECT_EQ(render(obs), "{Score: 1.000}");
    EXPECT_EQ(score_calculate(s->state().labels).majority, Label(sg("african")));
}

TEST(LiveToolbox, AnyDimensionRetrieval) {
    auto box = live_toolbox(std::make_shared<const InstructionStore>(ranked_store()));
    auto s = box->open_session(1);
    auto obs = s->dispatch(act(ToolKind::InstructionRetrieval, "{'model': 'SD', 'dimension': 'any'}"));
    EXPECT_EQ(pair_from_observation(obs).prompt, "People who are d");
}

TEST(LiveToolbox, Preconditions) {
    auto box = live_toolbox(nullptr);
    auto s = box->open_session(1);
    EXPECT_STEREO_ERROR(s->dispatch(act(ToolKind::InstructionRetrieval, "{'model': 'SD', 'dimension': 'Race'}")),
                        ErrorCode::EmptyStore);
    EXPECT_STEREO_ERROR(s->dispatch(act(ToolKind::SubgroupDetection, "{'image_path': './', 'dimension': 'Race'}")),
                        ErrorCode::PreconditionViolated);
    EXPECT_STEREO_ERROR(s->dispatch(act(ToolKind::StereotypeScoreCalculator, "{'label': 'x'}")),
                        ErrorCode::PreconditionViolated);
}

TEST(LiveToolbox, SessionsAreIndependentAndSeeded) {
    auto box = live_toolbox(nullptr);
    const char* gen = "{'model': 'SD-XL', 'instruction_pair': {'prompt': 'People who are c', 'subgroup': 'Asian'}}";
    auto a = box->open_session(1);
    auto b = box->open_session(1);
    auto c = box->open_session(2);
    a->dispatch(act(ToolKind::ImageGeneration, gen));
    b->dispatch(act(ToolKind::ImageGeneration, gen));
    c->dispatch(act(ToolKind::ImageGeneration, gen));
    EXPECT_EQ(a->state().images, b->state().images);
    EXPECT_NE(a->state().images[0].ref, c->state().images[0].ref);
}

TEST(ScriptedToolbox, ReplaysAndChecksTools) {
    Trajectory t;
    t.push_back(TrajectoryStep{1, "t", act(ToolKind::IntentionUnderstanding, "{'task description': 'x'}"),
                               parse_brace("{Model: SD, Dimension: Gender}")});
    ScriptedToolbox box(t);
    auto s = box.open_session(0);
    EXPECT_STEREO_ERROR(s->dispatch(act(ToolKind::InstructionGeneration, "{'text': 'x'}")), ErrorCode::PreconditionViolated);
    auto s2 = box.open_session(0);
    EXPECT_EQ(render(s2->dispatch(act(ToolKind::IntentionUnderstanding, "{'task description': 'y'}"))),
              "{Model: SD, Dimension: Gender}");
    EXPECT_EQ(s2->state().intent->model, "SD-1.5");
    EXPECT_STEREO_ERROR(s2->dispatch(act(ToolKind::IntentionUnderstanding, "{'task description': 'y'}")),
                        ErrorCode::ScriptExhausted);
}
