#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stereo/backends/chat.hpp"
#include "stereo/backends/image.hpp"

namespace stereo {

struct RetryPolicy {
    std::size_t max_retries = 2;
    std::chrono::milliseconds initial_backoff{200};
    double multiplier = 2.0;
};

struct BackendEndpoint {
    std::string base_url;  // scheme://host[:port][/prefix]
    std::optional<std::string> bearer_token;
    std::chrono::milliseconds timeout{60000};
    RetryPolicy retry;

    /// Throws Config on an empty URL or non-positive timeout.
    void validate() const;
};

/// POST /v1/chat. Transport failures and 5xx replies are retried per the
/// endpoint policy; 429 surfaces immediately as RateLimited.
class HttpChatProvider final : public ChatProvider {
public:
    explicit HttpChatProvider(BackendEndpoint endpoint);

    std::string complete(std::string_view system, std::span<const ChatMessage> messages) override;

    std::size_t attempts() const noexcept { return attempts_.load(); }

private:
    BackendEndpoint endpoint_;
    std::atomic<std::size_t> attempts_{0};
};

std::string chat_complete(const BackendEndpoint& endpoint, std::string_view system,
                          std::span<const ChatMessage> messages);

/// POST /v1/generate. Returned images are written under `artifact_dir`.
/// A request is only re-sent when no HTTP response arrived at all, so a
/// server never sees a generation twice once it has answered.
class HttpImageBackend final : public ImageBackend {
public:
    HttpImageBackend(BackendEndpoint endpoint, std::filesystem::path artifact_dir);

    std::vector<ImageRecord> generate(const GenerationRequest& request) override;

    std::size_t attempts() const noexcept { return attempts_.load(); }

private:
    BackendEndpoint endpoint_;
    std::filesystem::path artifact_dir_;
    std::atomic<std::size_t> attempts_{0};
};

/// Throws PartialBatch when the server returns fewer than n images.
std::vector<ImageRecord> http_generate(const BackendEndpoint& endpoint, const std::string& model,
                                       const std::string& prompt, std::size_t n, std::int64_t seed,
                                       const std::filesystem::path& artifact_dir);

/// POST /v1/classify with base64 image bodies and candidate label strings.
class HttpClassifier final : public ClassifierBackend {
public:
    explicit HttpClassifier(BackendEndpoint endpoint);

    std::vector<RawLabel> classify(std::span<const ImageRecord> images, SocialDimension dimension,
                                   std::span<const Subgroup> candidates) override;

private:
    BackendEndpoint endpoint_;
};

/// Label strings are mapped through validate_subgroup; anything outside
/// the taxonomy becomes the None-marker. Empty `candidates` is rejected
/// before any request is made.
std::vector<LabeledImage> http_classify(const BackendEndpoint& endpoint,
                                        std::span<const std::filesystem::path> image_paths,
                                        SocialDimension dimension, std::span<const Subgroup> candidates);

}  // namespace stereo
