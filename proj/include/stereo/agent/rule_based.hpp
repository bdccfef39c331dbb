#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "stereo/backends/chat.hpp"
#include "stereo/backends/models.hpp"
#include "stereo/domain.hpp"

namespace stereo {

/// Keyword reading of a detection request: registry model names (else the
/// word before "model"), dimension words, subgroup mentions and quoted text.
DetectionIntent heuristic_intent(std::string_view query, std::string_view default_model = kDefaultTarget);

/// Pattern-based stereotype extraction ("X are all <group>", "this <group>
/// <noun>", "<group> are <trait>", ...). nullopt when nothing matches.
std::optional<InstructionPair> heuristic_pair(std::string_view text);

/// Offline chat provider. It recognises the intent and instruction system
/// prompts and answers them with the heuristics above; any other system
/// prompt is treated as the planning prefix and answered with the next
/// step of the five-step pipeline, read off the conversation so far.
/// Stateless and deterministic.
class RuleBasedProvider final : public ChatProvider {
public:
    explicit RuleBasedProvider(std::string default_model = std::string(kDefaultTarget));

    std::string complete(std::string_view system, std::span<const ChatMessage> messages) override;

private:
    std::string default_model_;
};

}  // namespace stereo
