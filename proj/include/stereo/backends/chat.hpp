#pragma once

#include <atomic>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace stereo {

struct ChatMessage {
    std::string role;  // "user" | "assistant"
    std::string content;

    friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

/// A chat-completion backend. Implementations must be safe for concurrent
/// calls.
class ChatProvider {
public:
    virtual ~ChatProvider() = default;
    virtual std::string complete(std::string_view system, std::span<const ChatMessage> messages) = 0;
};

/// Replays a fixed list of replies in order, ignoring the request. Throws
/// ScriptExhausted once the list is used up.
class ScriptedProvider final : public ChatProvider {
public:
    explicit ScriptedProvider(std::vector<std::string> script);

    std::string complete(std::string_view system, std::span<const ChatMessage> messages) override;

    std::size_t calls() const noexcept { return calls_.load(); }
    std::size_t remaining() const;

private:
    std::vector<std::string> script_;
    mutable std::mutex mutex_;
    std::size_t next_ = 0;
    std::atomic<std::size_t> calls_{0};
};

/// Throws PreconditionViolated on an empty script.
std::shared_ptr<ScriptedProvider> scripted_provider(std::vector<std::string> script);

}  // namespace stereo
