#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stereo/backends/chat.hpp"
#include "stereo/backends/image.hpp"
#include "stereo/backends/models.hpp"
#include "stereo/dataset/store.hpp"
#include "stereo/domain.hpp"

namespace stereo {

// ---------------------------------------------------------------------------
// Intention understanding

/// System prompt asking for {"model","dimension","subgroup","text"} JSON.
std::string_view intent_system_prompt();

/// Accepts the JSON reply or the loose {Model: SD-XL, Dimension: Race}
/// form. A missing or null model becomes `default_model`. Throws
/// ExtractionFailed on replies without an object.
DetectionIntent parse_intent_reply(std::string_view reply, std::string_view default_model = kDefaultTarget);

/// Asks the provider, re-asking up to `retries` times on unusable replies.
/// Throws ExtractionFailed; provider errors propagate.
DetectionIntent intention_understand(std::string_view task_description, ChatProvider& provider,
                                     std::string_view default_model = kDefaultTarget, std::size_t retries = 2);

// ---------------------------------------------------------------------------
// Instruction generation

std::string_view instruction_system_prompt();

/// Throws NoStereotypeFound when the provider answers None; parse errors
/// from parse_instruction_pair propagate.
InstructionPair instruction_generate(std::string_view open_text, ChatProvider& provider);

// ---------------------------------------------------------------------------
// Instruction retrieval

/// Pairs inside `dimension` (every dimension when unset), optionally
/// narrowed to `subgroup`. Ranked by the stored score for `model`, then
/// frequency, then prompt, then subgroup order. Throws EmptyStore or NoMatch.
std::vector<InstructionPair> instruction_retrieve(const InstructionStore& store, std::optional<SocialDimension> dimension,
                                                  std::optional<Subgroup> subgroup, std::string_view model);

// ---------------------------------------------------------------------------
// Generation and classification dispatch

struct GenerateOptions {
    /// Images per backend request; 0 sends the whole batch at once.
    std::size_t chunk_size = 0;
    std::size_t max_retries = 2;
    /// Concurrent chunk requests.
    std::size_t concurrency = 4;
};

/// Exactly n records in index order. Throws BackendUnavailable when no
/// chunk succeeds, PartialBatch when only some do.
std::vector<ImageRecord> generate_batch(ImageBackend& backend, const std::string& model, const std::string& prompt,
                                        std::size_t n, std::int64_t seed, const GenerateOptions& options = {});

/// One label per image, same order. Throws EmptyBatch, BackendUnavailable.
std::vector<LabeledImage> classify_batch(ClassifierBackend& backend, std::span<const ImageRecord> images,
                                         SocialDimension dimension);

}  // namespace stereo
