#include "stereo/cli/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "stereo/error.hpp"
#include "stereo/rng.hpp"

#ifndef STEREO_DATA_DIR
#define STEREO_DATA_DIR "data"
#endif

namespace stereo::cli {

namespace {

Error config_error(const std::string& msg) { return Error(ErrorCode::Config, msg); }

bool known_key(const std::string& key) {
    const auto& keys = setting_keys();
    return std::find(keys.begin(), keys.end(), key) != keys.end();
}

template <typename T>
T parse_number(const Settings& s, const std::string& key) {
    const auto& text = s.at(key);
    T value{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw config_error(key + ": '" + text + "' is not a valid number");
    }
    return value;
}

std::size_t parse_positive(const Settings& s, const std::string& key) {
    const auto v = parse_number<long long>(s, key);
    if (v <= 0) throw config_error(key + " must be positive");
    return static_cast<std::size_t>(v);
}

bool parse_bool(const Settings& s, const std::string& key) {
    std::string v = s.at(key);
    for (auto& c : v) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw config_error(key + ": '" + s.at(key) + "' is not a boolean");
}

std::string get(const Settings& s, const std::string& key) {
    auto it = s.find(key);
    return it == s.end() ? std::string{} : it->second;
}

RoleConfig resolve_role(const Settings& s, const std::string& role) {
    auto mode = get(s, role + "_backend");
    if (mode.empty()) mode = get(s, "backend");
    if (mode != "synthetic" && mode != "live") {
        throw config_error(role + " backend must be 'synthetic' or 'live', got '" + mode + "'");
    }
    const auto url = get(s, role + "_url");
    RoleConfig r;
    r.live = mode == "live";
    if (!r.live) {
        if (!url.empty()) throw config_error(role + " backend is synthetic but " + role + "_url is set");
        return r;
    }
    if (url.empty()) throw config_error(role + " backend is live but no " + role + "_url is set");
    r.endpoint.base_url = url;
    if (auto t = get(s, "token"); !t.empty()) r.endpoint.bearer_token = t;
    r.endpoint.timeout = std::chrono::milliseconds(parse_number<long long>(s, "timeout_ms"));
    r.endpoint.retry.max_retries = parse_number<std::size_t>(s, "http_retries");
    r.endpoint.validate();
    return r;
}

}  // namespace

const std::vector<std::string>& setting_keys() {
    static const std::vector<std::string> keys = {
        "backend",     "chat_backend", "generate_backend", "classify_backend", "chat_url",    "generate_url",
        "classify_url", "token",       "timeout_ms",       "http_retries",     "store",       "n",
        "seed",        "rule",         "out",              "model",            "classifier",  "concurrency",
        "max_steps",   "retry_limit",  "save_images"};
    return keys;
}

Settings default_settings() {
    return {
        {"backend", "synthetic"},
        {"timeout_ms", "60000"},
        {"http_retries", "2"},
        {"store", std::string(STEREO_DATA_DIR) + "/spig_fixture.jsonl"},
        {"seed", "0"},
        {"rule", "binomial:0.05"},
        {"out", "stereo-out"},
        {"model", "SD-1.5"},
        {"classifier", "noisy:0.80"},
        {"concurrency", "4"},
        {"max_steps", "12"},
        {"retry_limit", "2"},
        {"save_images", "false"},
    };
}

Settings read_ini(const std::filesystem::path& path) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(path.string(), tree);
    } catch (const pt::ini_parser_error& e) {
        throw config_error(std::string("cannot read config: ") + e.what());
    }
    Settings out;
    auto take = [&](const std::string& key, const std::string& value) {
        if (!known_key(key)) throw config_error(path.string() + ": unknown setting '" + key + "'");
        out[key] = value;
    };
    for (const auto& [name, node] : tree) {
        if (node.empty()) {
            take(name, node.data());
            continue;
        }
        for (const auto& [key, leaf] : node) {
            // [chat] backend = live -> chat_backend; [generation] is accepted for [generate].
            auto section = name == "generation" ? std::string("generate") : name;
            take(section == "run" ? key : section + "_" + key, leaf.data());
        }
    }
    return out;
}

Settings read_env(const std::function<const char*(const char*)>& lookup) {
    Settings out;
    if (!lookup) return out;
    for (const auto& key : setting_keys()) {
        std::string var = "STEREO_";
        for (char c : key) var.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
        if (const char* v = lookup(var.c_str()); v && *v) out[key] = v;
    }
    return out;
}

Settings overlay(Settings base, const Settings& top) {
    for (const auto& [k, v] : top) base[k] = v;
    return base;
}

RunConfig resolve(const Settings& in) {
    for (const auto& [k, v] : in) {
        if (!known_key(k)) throw config_error("unknown setting '" + k + "'");
    }
    const auto s = overlay(default_settings(), in);
    RunConfig c;
    c.chat = resolve_role(s, "chat");
    c.generate = resolve_role(s, "generate");
    c.classify = resolve_role(s, "classify");
    c.store = s.at("store");
    if (s.count("n")) c.n = parse_positive(s, "n");
    c.seed = parse_number<std::int64_t>(s, "seed");
    c.rule = DecisionRule::parse(s.at("rule"));
    c.out = s.at("out");
    if (c.out.empty()) throw config_error("out directory must not be empty");
    c.model = s.at("model");
    if (c.model.empty()) throw config_error("model must not be empty");
    c.classifier = s.at("classifier");
    c.concurrency = parse_positive(s, "concurrency");
    c.max_steps = parse_positive(s, "max_steps");
    c.retry_limit = parse_number<std::size_t>(s, "retry_limit");
    c.save_images = parse_bool(s, "save_images");
    c.resolved = s;
    return c;
}

std::string config_hash(const Settings& settings) {
    std::string text;
    for (const auto& [k, v] : settings) {
        if (k == "out" || k == "token") continue;
        text += k + "=" + v + "\n";
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(text)));
    return buf;
}

}  // namespace stereo::cli
