#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stereo/agent/tools.hpp"
#include "stereo/backends/chat.hpp"
#include "stereo/backends/image.hpp"
#include "stereo/dataset/store.hpp"
#include "stereo/domain.hpp"

namespace stereo {

/// What one trajectory has learned so far.
struct RunState {
    std::optional<DetectionIntent> intent;
    std::optional<InstructionPair> pair;
    std::string optimized_prompt;
    std::vector<ImageRecord> images;
    /// Names the images go by in observations ("image_1.png", ...).
    std::vector<std::string> image_names;
    std::vector<LabeledImage> labels;

    /// The pair's dimension, else the intent's.
    std::optional<SocialDimension> dimension() const;
};

/// Tool execution for one trajectory. Not shared between trajectories.
class ToolSession {
public:
    virtual ~ToolSession() = default;
    /// Runs the tool and returns the observation. Throws Error.
    virtual BraceValue dispatch(const ToolAction& action) = 0;
    virtual const RunState& state() const = 0;
};

/// Shared, thread-safe factory of sessions.
class Toolbox {
public:
    virtual ~Toolbox() = default;
    virtual std::unique_ptr<ToolSession> open_session(std::int64_t seed) = 0;
};

// ---------------------------------------------------------------------------
// Observation formats

BraceValue intent_observation(const DetectionIntent& intent);
BraceValue pair_observation(const InstructionPair& pair);
BraceValue images_observation(const std::vector<std::string>& names);
BraceValue labels_observation(const std::vector<std::string>& names, const std::vector<LabeledImage>& labels);
/// {Score: 0.667}
BraceValue score_observation(const StereotypeScore& score);

/// Inverses of the above. Throw InvalidValue (or the taxonomy errors) on
/// observations that do not carry the expected fields.
DetectionIntent intent_from_observation(const BraceValue& obs, std::string_view default_model = kDefaultTarget);
InstructionPair pair_from_observation(const BraceValue& obs);
/// Set elements, skipping "..." placeholders.
std::vector<std::string> names_from_observation(const BraceValue& obs);
/// Label values are resolved within `dimension`; "None" and names outside
/// the dimension give the None-marker. "..." placeholders are skipped.
std::vector<LabeledImage> labels_from_observation(const BraceValue& obs, SocialDimension dimension);

// ---------------------------------------------------------------------------
// Live tools over backends

struct ToolboxConfig {
    std::string default_model{kDefaultTarget};
    std::size_t n_images = 10;
    std::size_t intent_retries = 2;
    GenerateOptions generate;
};

class LiveToolbox final : public Toolbox {
public:
    /// `store` may be null, in which case retrieval fails with EmptyStore.
    LiveToolbox(std::shared_ptr<ChatProvider> chat, std::shared_ptr<const InstructionStore> store,
                std::shared_ptr<ImageBackend> images, std::shared_ptr<ClassifierBackend> classifier,
                ToolboxConfig config = {});

    std::unique_ptr<ToolSession> open_session(std::int64_t seed) override;

    const ToolboxConfig& config() const noexcept { return config_; }

private:
    std::shared_ptr<ChatProvider> chat_;
    std::shared_ptr<const InstructionStore> store_;
    std::shared_ptr<ImageBackend> images_;
    std::shared_ptr<ClassifierBackend> classifier_;
    ToolboxConfig config_;
};

/// Replays the observations of a recorded trajectory in order, checking
/// that each action names the recorded tool. The run state is rebuilt
/// from the observations.
class ScriptedToolbox final : public Toolbox {
public:
    explicit ScriptedToolbox(Trajectory recorded);

    std::unique_ptr<ToolSession> open_session(std::int64_t seed) override;

private:
    Trajectory recorded_;
};

}  // namespace stereo
