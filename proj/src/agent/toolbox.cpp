#include "stereo/agent/toolbox.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>

#include "stereo/error.hpp"
#include "stereo/prompt_text.hpp"
#include "stereo/scoring.hpp"

namespace stereo {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

bool is_placeholder(std::string_view s) { return s == "..." || s == "\xe2\x80\xa6"; }

/// Dimension argument text; "any", "unspecified" and friends mean none.
std::optional<SocialDimension> dimension_arg(const ToolAction& action) {
    auto text = action.args.text_of("dimension");
    if (!text) return std::nullopt;
    const auto t = lower(*text);
    if (t.empty() || t == "any" || t == "all" || t == "unspecified" || t == "none" || t == "null") return std::nullopt;
    return parse_dimension(*text);
}

std::string required_text(const ToolAction& action, std::string_view key) {
    auto v = action.args.text_of(key);
    if (!v) {
        throw Error(ErrorCode::ArgSchemaMismatch,
                    std::string(display_name(action.tool)) + ": '" + std::string(key) + "' must be text");
    }
    return *v;
}

std::string image_name(const ImageRecord& r, std::size_t k) {
    auto ext = r.path.extension().string();
    return "image_" + std::to_string(k + 1) + (ext.empty() ? ".png" : ext);
}

StereotypeScore score_of_labels(const RunState& state, const ToolAction& action) {
    if (!state.labels.empty()) return score_calculate(state.labels);
    // Nothing classified in this session: fall back to the labels the
    // planner passed along.
    const auto* label = action.args.find("label");
    const auto dim = state.dimension();
    if (!label || !label->is_object() || !dim) {
        throw Error(ErrorCode::PreconditionViolated, "no labels to score");
    }
    return score_calculate(labels_from_observation(*label, *dim));
}

}  // namespace

std::optional<SocialDimension> RunState::dimension() const {
    if (pair) return pair->dimension();
    if (intent) return intent->dimension;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Observation formats

BraceValue intent_observation(const DetectionIntent& intent) {
    auto obs = BraceValue::object();
    obs.add("Model", BraceValue::bare(intent.model), false);
    if (intent.dimension) obs.add("Dimension", BraceValue::bare(std::string(to_string(*intent.dimension))), false);
    if (intent.requested_subgroup) obs.add("Subgroup", BraceValue::bare(intent.requested_subgroup->display_name()), false);
    if (intent.open_text) obs.add("text", BraceValue::scalar(*intent.open_text), false);
    return obs;
}

BraceValue pair_observation(const InstructionPair& pair) {
    auto obs = BraceValue::object();
    obs.add("prompt", BraceValue::scalar(pair.prompt));
    obs.add("subgroup", BraceValue::scalar(pair.subgroup.display_name()));
    return obs;
}

BraceValue images_observation(const std::vector<std::string>& names) {
    auto obs = BraceValue::object();
    for (const auto& n : names) obs.add_element(n);
    return obs;
}

BraceValue labels_observation(const std::vector<std::string>& names, const std::vector<LabeledImage>& labels) {
    auto obs = BraceValue::object();
    for (std::size_t i = 0; i < labels.size(); ++i) {
        obs.add(i < names.size() ? names[i] : labels[i].image_ref, BraceValue::scalar(label_display(labels[i].label)));
    }
    return obs;
}

BraceValue score_observation(const StereotypeScore& score) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", score.value);
    auto obs = BraceValue::object();
    obs.add("Score", BraceValue::bare(buf), false);
    return obs;
}

DetectionIntent intent_from_observation(const BraceValue& obs, std::string_view default_model) {
    if (!obs.is_object()) throw Error(ErrorCode::InvalidValue, "intent observation is not an object");
    DetectionIntent intent;
    auto model = obs.text_of("model");
    intent.model = canonical_model_id(model && !model->empty() ? *model : std::string(default_model));
    if (auto d = obs.text_of("dimension")) intent.dimension = parse_dimension(*d);
    if (auto s = obs.text_of("subgroup")) {
        intent.requested_subgroup = intent.dimension ? validate_subgroup(*intent.dimension, *s) : resolve_subgroup(*s);
    }
    if (auto t = obs.text_of("text")) intent.open_text = *t;
    return validated(std::move(intent));
}

InstructionPair pair_from_observation(const BraceValue& obs) {
    auto prompt = obs.text_of("prompt");
    auto subgroup = obs.text_of("subgroup");
    if (!prompt || !subgroup) throw Error(ErrorCode::InvalidValue, "pair needs 'prompt' and 'subgroup': " + render(obs));
    return make_pair(*prompt, resolve_subgroup(*subgroup));
}

std::vector<std::string> names_from_observation(const BraceValue& obs) {
    std::vector<std::string> out;
    for (const auto& e : obs.entries) {
        if (!is_placeholder(e.key)) out.push_back(e.key);
    }
    return out;
}

std::vector<LabeledImage> labels_from_observation(const BraceValue& obs, SocialDimension dimension) {
    std::vector<LabeledImage> out;
    for (const auto& e : obs.entries) {
        if (is_placeholder(e.key) || !e.value || e.value->is_object()) continue;
        const auto& text = e.value->text;
        Label label = is_none_marker(text) ? std::nullopt : try_validate_subgroup(dimension, text);
        out.push_back(LabeledImage{e.key, label, 1.0});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Live tools

namespace {

class LiveSession final : public ToolSession {
public:
    LiveSession(ChatProvider* chat, const InstructionStore* store, ImageBackend* images, ClassifierBackend* classifier,
                const ToolboxConfig& config, std::int64_t seed)
        : chat_(chat), store_(store), images_(images), classifier_(classifier), config_(config), seed_(seed) {}

    const RunState& state() const override { return state_; }

    BraceValue dispatch(const ToolAction& action) override {
        switch (action.tool) {
            case ToolKind::IntentionUnderstanding: {
                need(chat_, "chat provider");
                state_.intent =
                    intention_understand(required_text(action, "task description"), *chat_, config_.default_model,
                                         config_.intent_retries);
                return intent_observation(*state_.intent);
            }
            case ToolKind::InstructionRetrieval: {
                static const InstructionStore empty;
                const auto dim = dimension_arg(action);
                std::optional<Subgroup> subgroup;
                if (auto s = action.args.text_of("subgroup"); s && !is_none_marker(*s)) {
                    subgroup = dim ? validate_subgroup(*dim, *s) : resolve_subgroup(*s);
                }
                auto hits = instruction_retrieve(store_ ? *store_ : empty, dim, subgroup,
                                                 required_text(action, "model"));
                state_.pair = hits.front();
                return pair_observation(*state_.pair);
            }
            case ToolKind::InstructionGeneration: {
                need(chat_, "chat provider");
                state_.pair = instruction_generate(required_text(action, "text"), *chat_);
                return pair_observation(*state_.pair);
            }
            case ToolKind::ImageGeneration: {
                need(images_, "image backend");
                const auto* pair_arg = action.args.find("instruction_pair");
                if (!pair_arg || !pair_arg->is_object()) {
                    throw Error(ErrorCode::ArgSchemaMismatch, "Image generation: 'instruction_pair' must be an object");
                }
                state_.pair = pair_from_observation(*pair_arg);
                state_.optimized_prompt = prompt_optimize(*state_.pair);
                state_.images = generate_batch(*images_, required_text(action, "model"), state_.optimized_prompt,
                                               config_.n_images, seed_, config_.generate);
                state_.image_names.clear();
                for (std::size_t k = 0; k < state_.images.size(); ++k) {
                    state_.image_names.push_back(image_name(state_.images[k], k));
                }
                state_.labels.clear();
                return images_observation(state_.image_names);
            }
            case ToolKind::SubgroupDetection: {
                need(classifier_, "classifier");
                auto dim = dimension_arg(action);
                if (!dim) dim = state_.dimension();
                if (!dim) throw Error(ErrorCode::PreconditionViolated, "no dimension to classify under");
                if (state_.images.empty()) throw Error(ErrorCode::PreconditionViolated, "no images generated yet");
                state_.labels = classify_batch(*classifier_, state_.images, *dim);
                return labels_observation(state_.image_names, state_.labels);
            }
            case ToolKind::StereotypeScoreCalculator:
                return score_observation(score_of_labels(state_, action));
        }
        throw Error(ErrorCode::UnknownTool, "unhandled tool");
    }

private:
    template <typename T>
    static void need(T* p, const char* what) {
        if (!p) throw Error(ErrorCode::PreconditionViolated, std::string("no ") + what + " configured");
    }

    ChatProvider* chat_;
    const InstructionStore* store_;
    ImageBackend* images_;
    ClassifierBackend* classifier_;
    const ToolboxConfig& config_;
    std::int64_t seed_;
    RunState state_;
};

class ScriptedSession final : public ToolSession {
public:
    explicit ScriptedSession(const Trajectory& recorded) : recorded_(recorded) {}

    const RunState& state() const override { return state_; }

    BraceValue dispatch(const ToolAction& action) override {
        if (next_ >= recorded_.size()) throw Error(ErrorCode::ScriptExhausted, "no recorded observation left");
        const auto& step = recorded_[next_++];
        if (step.action.tool != action.tool) {
            throw Error(ErrorCode::PreconditionViolated, "recorded step " + std::to_string(step.index) + " used " +
                                                             std::string(display_name(step.action.tool)) + ", not " +
                                                             std::string(display_name(action.tool)));
        }
        const auto& obs = step.observation;
        switch (action.tool) {
            case ToolKind::IntentionUnderstanding: state_.intent = intent_from_observation(obs); break;
            case ToolKind::InstructionRetrieval:
            case ToolKind::InstructionGeneration: state_.pair = pair_from_observation(obs); break;
            case ToolKind::ImageGeneration:
                if (const auto* p = action.args.find("instruction_pair"); p && p->is_object()) {
                    state_.pair = pair_from_observation(*p);
                }
                if (state_.pair) state_.optimized_prompt = prompt_optimize(*state_.pair);
                state_.image_names = names_from_observation(obs);
                break;
            case ToolKind::SubgroupDetection: {
                auto dim = dimension_arg(action);
                if (!dim) dim = state_.dimension();
                if (!dim) throw Error(ErrorCode::PreconditionViolated, "no dimension to classify under");
                state_.labels = labels_from_observation(obs, *dim);
                break;
            }
            case ToolKind::StereotypeScoreCalculator: break;
        }
        return obs;
    }

private:
    const Trajectory& recorded_;
    std::size_t next_ = 0;
    RunState state_;
};

}  // namespace

LiveToolbox::LiveToolbox(std::shared_ptr<ChatProvider> chat, std::shared_ptr<const InstructionStore> store,
                         std::shared_ptr<ImageBackend> images, std::shared_ptr<ClassifierBackend> classifier,
                         ToolboxConfig config)
    : chat_(std::move(chat)),
      store_(std::move(store)),
      images_(std::move(images)),
      classifier_(std::move(classifier)),
      config_(std::move(config)) {
    if (config_.n_images == 0) throw Error(ErrorCode::InvalidValue, "images per prompt must be positive");
}

std::unique_ptr<ToolSession> LiveToolbox::open_session(std::int64_t seed) {
    return std::make_unique<LiveSession>(chat_.get(), store_.get(), images_.get(), classifier_.get(), config_, seed);
}

ScriptedToolbox::ScriptedToolbox(Trajectory recorded) : recorded_(std::move(recorded)) {}

std::unique_ptr<ToolSession> ScriptedToolbox::open_session(std::int64_t) {
    return std::make_unique<ScriptedSession>(recorded_);
}

}  // namespace stereo
