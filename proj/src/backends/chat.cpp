#include "stereo/backends/chat.hpp"

#include "stereo/error.hpp"

namespace stereo {

ScriptedProvider::ScriptedProvider(std::vector<std::string> script) : script_(std::move(script)) {}

std::string ScriptedProvider::complete(std::string_view, std::span<const ChatMessage>) {
    ++calls_;
    std::lock_guard lock(mutex_);
    if (next_ >= script_.size()) {
        throw Error(ErrorCode::ScriptExhausted, "scripted provider has no reply left after " +
                                                    std::to_string(script_.size()) + " replies");
    }
    return script_[next_++];
}

std::size_t ScriptedProvider::remaining() const {
    std::lock_guard lock(mutex_);
    return script_.size() - next_;
}

std::shared_ptr<ScriptedProvider> scripted_provider(std::vector<std::string> script) {
    if (script.empty()) throw Error(ErrorCode::PreconditionViolated, "scripted provider needs at least one reply");
    return std::make_shared<ScriptedProvider>(std::move(script));
}

}  // namespace stereo
