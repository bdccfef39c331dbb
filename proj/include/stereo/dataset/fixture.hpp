#pragma once

#include <array>
#include <cstdint>
#include <filesystem>

#include "stereo/dataset/store.hpp"

namespace stereo {

/// Recipe for a synthetic instruction store: pair counts per dimension
/// (Gender, Race, Religion) and the seed that picks descriptions.
struct FixtureManifest {
    std::array<std::size_t, 3> counts{};
    std::uint64_t seed = 0;

    friend bool operator==(const FixtureManifest&, const FixtureManifest&) = default;
};

/// 733 pairs, the store shipped as data/spig_fixture.jsonl.
FixtureManifest bundled_fixture_manifest();
/// 4123 pairs with the same split.
FixtureManifest full_fixture_manifest();

void save_fixture_manifest(const FixtureManifest& m, const std::filesystem::path& path);
/// Throws IoError.
FixtureManifest load_fixture_manifest(const std::filesystem::path& path);
bool is_fixture_manifest(const std::filesystem::path& path);

/// Deterministic store: a handful of anchor pairs with high frequencies,
/// then generated "People who are <trait> <role>" pairs per subgroup.
InstructionStore make_fixture(const FixtureManifest& m);

/// A store file, or the store a manifest describes.
InstructionStore open_store(const std::filesystem::path& path);

}  // namespace stereo
