#include "stereo/backends/http.hpp"

#include <cstdio>
#include <fstream>
#include <iterator>
#include <thread>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "stereo/base64.hpp"
#include "stereo/error.hpp"
#include "stereo/rng.hpp"

namespace stereo {

namespace {

struct Url {
    std::string origin;  // scheme://host:port
    std::string prefix;  // path prefix without trailing '/'
};

Url split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    const auto path_start = url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    Url out;
    out.origin = url.substr(0, path_start);
    if (path_start != std::string::npos) out.prefix = url.substr(path_start);
    while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
    return out;
}

httplib::Headers headers_for(const BackendEndpoint& endpoint, const std::string& request_id = {}) {
    httplib::Headers h;
    if (endpoint.bearer_token) h.emplace("Authorization", "Bearer " + *endpoint.bearer_token);
    if (!request_id.empty()) h.emplace("X-Request-Id", request_id);
    return h;
}

std::unique_ptr<httplib::Client> client_for(const BackendEndpoint& endpoint, const Url& url) {
    auto client = std::make_unique<httplib::Client>(url.origin);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(endpoint.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(endpoint.timeout - secs);
    client->set_connection_timeout(secs.count(), usecs.count());
    client->set_read_timeout(secs.count(), usecs.count());
    client->set_write_timeout(secs.count(), usecs.count());
    return client;
}

std::string error_message(const httplib::Response& res) {
    auto body = Json::parse(res.body, nullptr, false);
    if (body.is_object() && body.contains("error") && body["error"].is_object()) {
        const auto& e = body["error"];
        return e.value("code", std::string("error")) + ": " + e.value("message", std::string{});
    }
    return "HTTP " + std::to_string(res.status);
}

/// Throws the error matching a non-2xx response.
[[noreturn]] void raise_for_status(const httplib::Response& res, const std::string& what) {
    if (res.status == 429) {
        const auto retry_after = res.get_header_value("Retry-After");
        throw Error(ErrorCode::RateLimited,
                    what + " rate limited" + (retry_after.empty() ? "" : "; retry after " + retry_after + "s"));
    }
    throw Error(ErrorCode::Transport, what + " failed: " + error_message(res));
}

Json parse_body(const httplib::Response& res, const std::string& what) {
    auto body = Json::parse(res.body, nullptr, false);
    if (body.is_discarded() || !body.is_object()) throw Error(ErrorCode::BadResponse, what + " returned a non-JSON body");
    return body;
}

void sleep_backoff(const RetryPolicy& policy, std::size_t attempt) {
    double ms = static_cast<double>(policy.initial_backoff.count());
    for (std::size_t i = 1; i < attempt; ++i) ms *= policy.multiplier;
    std::this_thread::sleep_for(std::chrono::milliseconds(static_cast<long long>(ms)));
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::UnreadableFile, "cannot read " + path.string());
    return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

std::string extension_for(std::string_view bytes) {
    if (bytes.size() >= 4 && bytes.substr(1, 3) == "PNG") return ".png";
    if (bytes.size() >= 2 && static_cast<unsigned char>(bytes[0]) == 0xff && static_cast<unsigned char>(bytes[1]) == 0xd8) {
        return ".jpg";
    }
    return ".bin";
}

std::string fetch_url(const BackendEndpoint& endpoint, const std::string& url) {
    const auto parts = split_url(url);
    auto client = client_for(endpoint, parts);
    auto res = client->Get(parts.prefix.empty() ? "/" : parts.prefix, headers_for(endpoint));
    if (!res) throw Error(ErrorCode::Transport, "GET " + url + ": " + httplib::to_string(res.error()));
    if (res->status / 100 != 2) raise_for_status(*res, "GET " + url);
    return res->body;
}

}  // namespace

void BackendEndpoint::validate() const {
    if (base_url.empty()) throw Error(ErrorCode::Config, "endpoint URL is empty");
    if (base_url.find("://") == std::string::npos) throw Error(ErrorCode::Config, "endpoint URL lacks a scheme: " + base_url);
    if (timeout.count() <= 0) throw Error(ErrorCode::Config, "endpoint timeout must be positive");
}

// ---------------------------------------------------------------------------
// Chat

HttpChatProvider::HttpChatProvider(BackendEndpoint endpoint) : endpoint_(std::move(endpoint)) { endpoint_.validate(); }

std::string HttpChatProvider::complete(std::string_view system, std::span<const ChatMessage> messages) {
    if (messages.empty()) throw Error(ErrorCode::PreconditionViolated, "chat request needs at least one message");
    Json request;
    request["system"] = std::string(system);
    request["messages"] = Json::array();
    for (const auto& m : messages) request["messages"].push_back(Json{{"role", m.role}, {"content", m.content}});
    const auto body = request.dump();

    const auto url = split_url(endpoint_.base_url);
    auto client = client_for(endpoint_, url);
    const std::size_t budget = endpoint_.retry.max_retries + 1;
    std::string last_error;
    for (std::size_t attempt = 1; attempt <= budget; ++attempt) {
        ++attempts_;
        spdlog::debug("chat attempt {}/{} to {}", attempt, budget, endpoint_.base_url);
        auto res = client->Post(url.prefix + "/v1/chat", headers_for(endpoint_), body, "application/json");
        if (!res) {
            last_error = httplib::to_string(res.error());
        } else if (res->status >= 500) {
            last_error = error_message(*res);
        } else {
            if (res->status / 100 != 2) raise_for_status(*res, "chat");
            auto reply = parse_body(*res, "chat");
            if (!reply.contains("content") || !reply["content"].is_string()) {
                throw Error(ErrorCode::BadResponse, "chat response lacks a string 'content'");
            }
            if (attempt > 1) spdlog::info("chat succeeded after {} attempts", attempt);
            return reply["content"].get<std::string>();
        }
        spdlog::warn("chat attempt {}/{} failed: {}", attempt, budget, last_error);
        if (attempt < budget) sleep_backoff(endpoint_.retry, attempt);
    }
    throw Error(ErrorCode::Transport, "chat failed after " + std::to_string(budget) + " attempts: " + last_error);
}

std::string chat_complete(const BackendEndpoint& endpoint, std::string_view system,
                          std::span<const ChatMessage> messages) {
    HttpChatProvider provider(endpoint);
    return provider.complete(system, messages);
}

// ---------------------------------------------------------------------------
// Generation

HttpImageBackend::HttpImageBackend(BackendEndpoint endpoint, std::filesystem::path artifact_dir)
    : endpoint_(std::move(endpoint)), artifact_dir_(std::move(artifact_dir)) {
    endpoint_.validate();
}

std::vector<ImageRecord> HttpImageBackend::generate(const GenerationRequest& request) {
    // Image k of a request with seed s is conventionally generated with
    // seed s + k, so chunked batches stay reproducible.
    const std::int64_t wire_seed = request.seed + request.first_index;
    Json body;
    body["model"] = request.model;
    body["prompt"] = request.prompt;
    body["n"] = request.n;
    body["seed"] = wire_seed;
    if (!request.loras.empty()) {
        body["lora"] = Json::array();
        for (const auto& l : request.loras) body["lora"].push_back(Json{{"name", l.name}, {"weight", l.weight}});
    }
    char request_id[17];
    std::snprintf(request_id, sizeof request_id, "%016llx",
                  static_cast<unsigned long long>(combine_seed(static_cast<std::uint64_t>(wire_seed),
                                                               fnv1a64(request.model + "\n" + request.prompt))));

    const auto url = split_url(endpoint_.base_url);
    auto client = client_for(endpoint_, url);
    const std::size_t budget = endpoint_.retry.max_retries + 1;
    httplib::Result res;
    for (std::size_t attempt = 1; attempt <= budget; ++attempt) {
        ++attempts_;
        res = client->Post(url.prefix + "/v1/generate", headers_for(endpoint_, request_id), body.dump(), "application/json");
        if (res) break;  // any response at all: never re-send
        spdlog::warn("generate attempt {}/{} got no response: {}", attempt, budget, httplib::to_string(res.error()));
        if (attempt < budget) sleep_backoff(endpoint_.retry, attempt);
    }
    if (!res) throw Error(ErrorCode::Transport, "generate: " + httplib::to_string(res.error()));
    if (res->status / 100 != 2) raise_for_status(*res, "generate");
    auto reply = parse_body(*res, "generate");
    if (!reply.contains("images") || !reply["images"].is_array()) {
        throw Error(ErrorCode::BadResponse, "generate response lacks an 'images' array");
    }

    std::filesystem::create_directories(artifact_dir_);
    std::vector<ImageRecord> out;
    for (const auto& item : reply["images"]) {
        if (!item.is_object()) throw Error(ErrorCode::BadResponse, "generate image entry is not an object");
        std::string bytes;
        if (item.contains("b64") && item["b64"].is_string()) {
            bytes = base64::decode(item["b64"].get<std::string>());
        } else if (item.contains("url") && item["url"].is_string()) {
            bytes = fetch_url(endpoint_, item["url"].get<std::string>());
        } else {
            throw Error(ErrorCode::BadResponse, "generate image entry has neither b64 nor url");
        }
        ImageRecord r;
        r.index = request.first_index + static_cast<std::uint32_t>(out.size());
        r.seed = item.value("seed", wire_seed + static_cast<std::int64_t>(out.size()));
        r.model = request.model;
        r.prompt = request.prompt;
        std::string stem;
        for (char c : request.model) stem.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
        r.path = artifact_dir_ / (stem + "_" + std::to_string(request.seed) + "_" + std::to_string(r.index) + extension_for(bytes));
        std::ofstream f(r.path, std::ios::binary);
        f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!f) throw Error(ErrorCode::IoError, "cannot write " + r.path.string());
        r.ref = r.path.filename().string();
        out.push_back(std::move(r));
    }
    if (out.size() < request.n) {
        throw Error(ErrorCode::PartialBatch, std::to_string(out.size()) + " of " + std::to_string(request.n) + " images returned");
    }
    return out;
}

std::vector<ImageRecord> http_generate(const BackendEndpoint& endpoint, const std::string& model,
                                       const std::string& prompt, std::size_t n, std::int64_t seed,
                                       const std::filesystem::path& artifact_dir) {
    HttpImageBackend backend(endpoint, artifact_dir);
    const auto target = parse_target(model);
    GenerationRequest request{target.id, prompt, n, seed, 0, target.loras};
    return backend.generate(request);
}

// ---------------------------------------------------------------------------
// Classification

HttpClassifier::HttpClassifier(BackendEndpoint endpoint) : endpoint_(std::move(endpoint)) { endpoint_.validate(); }

std::vector<RawLabel> HttpClassifier::classify(std::span<const ImageRecord> images, SocialDimension dimension,
                                               std::span<const Subgroup> candidates) {
    if (candidates.empty()) throw Error(ErrorCode::PreconditionViolated, "classification needs candidate labels");
    Json body;
    body["dimension"] = std::string(to_string(dimension));
    body["candidates"] = Json::array();
    for (auto c : candidates) body["candidates"].push_back(std::string(c.name()));
    body["images"] = Json::array();
    for (const auto& image : images) {
        if (image.path.empty()) {
            body["images"].push_back(image.ref);  // assumed to be a URL the server can fetch
        } else {
            body["images"].push_back(base64::encode(read_file(image.path)));
        }
    }

    const auto url = split_url(endpoint_.base_url);
    auto client = client_for(endpoint_, url);
    const std::size_t budget = endpoint_.retry.max_retries + 1;
    std::string last_error;
    for (std::size_t attempt = 1; attempt <= budget; ++attempt) {
        auto res = client->Post(url.prefix + "/v1/classify", headers_for(endpoint_), body.dump(), "application/json");
        if (!res) {
            last_error = httplib::to_string(res.error());
        } else if (res->status >= 500) {
            last_error = error_message(*res);
        } else {
            if (res->status / 100 != 2) raise_for_status(*res, "classify");
            auto reply = parse_body(*res, "classify");
            if (!reply.contains("labels") || !reply["labels"].is_array()) {
                throw Error(ErrorCode::BadResponse, "classify response lacks a 'labels' array");
            }
            std::vector<RawLabel> out;
            for (const auto& l : reply["labels"]) {
                if (!l.is_object() || !l.contains("label") || !l["label"].is_string()) {
                    throw Error(ErrorCode::BadResponse, "classify label entry is malformed");
                }
                out.push_back(RawLabel{l["label"].get<std::string>(), l.value("confidence", 0.0)});
            }
            return out;
        }
        spdlog::warn("classify attempt {}/{} failed: {}", attempt, budget, last_error);
        if (attempt < budget) sleep_backoff(endpoint_.retry, attempt);
    }
    throw Error(ErrorCode::Transport, "classify failed after " + std::to_string(budget) + " attempts: " + last_error);
}

std::vector<LabeledImage> http_classify(const BackendEndpoint& endpoint,
                                        std::span<const std::filesystem::path> image_paths,
                                        SocialDimension dimension, std::span<const Subgroup> candidates) {
    if (candidates.empty()) throw Error(ErrorCode::PreconditionViolated, "classification needs candidate labels");
    std::vector<ImageRecord> images;
    for (const auto& p : image_paths) {
        if (!std::filesystem::exists(p)) throw Error(ErrorCode::PreconditionViolated, "missing image " + p.string());
        ImageRecord r;
        r.path = p;
        r.ref = p.filename().string();
        images.push_back(std::move(r));
    }
    HttpClassifier classifier(endpoint);
    auto raw = classifier.classify(images, dimension, candidates);
    return normalize_labels(images, raw, dimension);
}

}  // namespace stereo
