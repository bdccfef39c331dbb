#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>

#include "stereo/backends/http.hpp"
#include "stereo/scoring.hpp"

namespace stereo::cli {

/// Flat key/value settings, e.g. {"n": "10", "chat_url": "http://..."}.
using Settings = std::map<std::string, std::string>;

/// Every key a setting layer may carry.
const std::vector<std::string>& setting_keys();

/// Top-level keys plus [section] keys flattened to "section_key"
/// ([chat] url = ... becomes chat_url). Throws Config on unknown keys or
/// an unreadable file.
Settings read_ini(const std::filesystem::path& path);

/// STEREO_<KEY> for every setting key.
Settings read_env(const std::function<const char*(const char*)>& lookup);

/// Later layers win.
Settings overlay(Settings base, const Settings& top);

struct RoleConfig {
    bool live = false;
    BackendEndpoint endpoint;
};

struct RunConfig {
    RoleConfig chat;
    RoleConfig generate;
    RoleConfig classify;
    std::filesystem::path store;
    /// Images per prompt when set explicitly; commands pick their own default.
    std::optional<std::size_t> n;
    std::int64_t seed = 0;
    DecisionRule rule;
    std::filesystem::path out;
    std::string model;
    /// Synthetic classifier: "oracle" or "noisy:<diagonal>[:<none share>]".
    std::string classifier;
    std::size_t concurrency = 4;
    std::size_t max_steps = 12;
    std::size_t retry_limit = 2;
    bool save_images = false;
    /// Every setting after defaults were applied, as written to manifests.
    Settings resolved;

    std::size_t images_per_prompt(std::size_t fallback) const { return n.value_or(fallback); }
};

/// Built-in defaults, the lowest layer.
Settings default_settings();

/// Validates and converts. Exactly one of {synthetic, live endpoint} per
/// backend role: a URL for a synthetic role, or a live role without one,
/// is a Config error, as is any unparsable value.
RunConfig resolve(const Settings& settings);

/// Hex digest of the settings that decide results (everything except out
/// and the token).
std::string config_hash(const Settings& settings);

}  // namespace stereo::cli
