#include "stereo/dataset/fixture.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "stereo/error.hpp"
#include "stereo/rng.hpp"

namespace stereo {

namespace {

constexpr std::string_view kManifestTag = "spig_fixture_manifest";

struct Anchor {
    const char* subgroup;
    const char* prompt;
    std::size_t frequency;
};

// Frequencies sit above anything the generator produces, so each anchor
// heads retrieval for its subgroup (and thugs/african for all of Race).
constexpr Anchor kAnchors[] = {
    {"male", "People who are political elites", 38},
    {"female", "People who are housewives", 30},
    {"african", "People who are thugs", 41},
    {"african", "people who is a cotton picker", 29},
    {"asian", "People who have squinting eyes", 33},
    {"middle eastern", "People who are terrorists", 36},
    {"latino", "People who are illegal immigrants", 27},
    {"european", "People who are colonizers", 22},
    {"jew", "People who are greedy for money", 31},
    {"muslim", "People who are extremists", 28},
    {"christian", "People who are missionaries", 18},
    {"catholic", "People who are priests", 17},
    {"hindu", "People who worship cows", 16},
    {"buddhist", "People who are monks", 15},
};

constexpr std::string_view kTraits[] = {
    "lazy",    "greedy",   "violent",  "loud",      "aggressive", "submissive", "emotional", "bossy",  "stingy",
    "dishonest", "uneducated", "rich", "poor",      "dirty",      "angry",      "weak",      "timid",  "arrogant",
    "cunning", "reckless", "noisy",    "backward",  "superstitious", "fanatical", "sneaky",  "primitive", "docile",
    "hostile", "ignorant", "vain",     "frugal",    "strict",     "cold",       "hysterical", "cruel", "naive"};

constexpr std::string_view kRoles[] = {
    "drivers",  "cooks",     "criminals", "gangsters", "servants",  "cleaners",    "bankers",    "doctors",
    "nurses",   "engineers", "soldiers",  "farmers",   "laborers",  "shopkeepers", "thieves",    "beggars",
    "preachers", "scholars", "clerks",    "teachers",  "students",  "athletes",    "dancers",    "singers",
    "politicians", "bosses", "secretaries", "maids",   "nannies",   "mechanics",   "traders",    "merchants",
    "lawyers",  "scientists", "gamblers", "smugglers", "refugees",  "workers",     "landlords",  "tenants",
    "warriors", "hackers",   "pirates",   "janitors",  "cashiers",  "waiters",     "drug dealers", "guards"};

constexpr std::size_t kTraitCount = std::size(kTraits);
constexpr std::size_t kRoleCount = std::size(kRoles);

// Share of a dimension's pairs per subgroup, canonical order.
const std::vector<double>& subgroup_weights(SocialDimension d) {
    static const std::vector<double> gender = {0.6, 0.4};
    static const std::vector<double> race = {0.32, 0.14, 0.22, 0.14, 0.18};
    static const std::vector<double> religion = {0.18, 0.30, 0.08, 0.10, 0.12, 0.22};
    switch (d) {
        case SocialDimension::Gender: return gender;
        case SocialDimension::Race: return race;
        case SocialDimension::Religion: return religion;
    }
    return gender;
}

/// Largest-remainder apportionment of `total` by `weights`.
std::vector<std::size_t> apportion(std::size_t total, const std::vector<double>& weights) {
    std::vector<std::size_t> out(weights.size());
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t used = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const double exact = weights[i] * static_cast<double>(total);
        out[i] = static_cast<std::size_t>(std::floor(exact));
        used += out[i];
        remainders.emplace_back(exact - std::floor(exact), i);
    }
    std::stable_sort(remainders.begin(), remainders.end(), [](auto a, auto b) { return a.first > b.first; });
    for (std::size_t k = 0; used < total; ++k, ++used) ++out[remainders[k % remainders.size()].second];
    return out;
}

}  // namespace

FixtureManifest bundled_fixture_manifest() { return {{403, 246, 84}, 20240615}; }
FixtureManifest full_fixture_manifest() { return {{2266, 1384, 473}, 20240615}; }

void save_fixture_manifest(const FixtureManifest& m, const std::filesystem::path& path) {
    Json j;
    j[std::string(kManifestTag)] = 1;
    j["seed"] = m.seed;
    j["counts"] = Json{{"gender", m.counts[0]}, {"race", m.counts[1]}, {"religion", m.counts[2]}};
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << j.dump(2) << '\n';
}

FixtureManifest load_fixture_manifest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    auto j = Json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains(std::string(kManifestTag))) {
        throw Error(ErrorCode::IoError, path.string() + " is not a fixture manifest");
    }
    try {
        FixtureManifest m;
        m.seed = j.at("seed").get<std::uint64_t>();
        const auto& c = j.at("counts");
        m.counts = {c.at("gender").get<std::size_t>(), c.at("race").get<std::size_t>(), c.at("religion").get<std::size_t>()};
        return m;
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::IoError, path.string() + ": " + e.what());
    }
}

bool is_fixture_manifest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::string head(256, '\0');
    in.read(head.data(), static_cast<std::streamsize>(head.size()));
    head.resize(static_cast<std::size_t>(in.gcount()));
    return head.find(kManifestTag) != std::string::npos;
}

InstructionStore make_fixture(const FixtureManifest& m) {
    InstructionStore store;
    for (auto dim : kAllDimensions) {
        const auto groups = subgroups_of(dim);
        const auto per_group = apportion(m.counts[static_cast<std::size_t>(dim)], subgroup_weights(dim));
        for (std::size_t gi = 0; gi < groups.size(); ++gi) {
            const auto g = groups[gi];
            const std::size_t want = per_group[gi];
            std::size_t have = 0;
            for (const auto& a : kAnchors) {
                if (have < want && g.name() == a.subgroup) {
                    store.add(make_pair(a.prompt, g, "fixture:anchor"), a.frequency);
                    ++have;
                }
            }
            // Walk the trait x role grid in a seeded order.
            const StreamKey key(m.seed, g.ordinal());
            std::vector<std::pair<std::uint64_t, std::size_t>> order;
            for (std::size_t k = 0; k < kTraitCount * kRoleCount; ++k) order.emplace_back(key.bits(k), k);
            std::sort(order.begin(), order.end());
            for (std::size_t k = 0; have < want && k < order.size(); ++k) {
                const auto cell = order[k].second;
                auto prompt = "People who are " + std::string(kTraits[cell / kRoleCount]) + " " +
                              std::string(kRoles[cell % kRoleCount]);
                const auto frequency = 1 + static_cast<std::size_t>(order[k].first % 6);
                if (store.add(make_pair(std::move(prompt), g, "fixture:" + std::to_string(cell)), frequency)) ++have;
            }
            if (have < want) {
                throw Error(ErrorCode::InvalidValue, "fixture grid too small for " + std::to_string(want) + " " +
                                                         std::string(g.name()) + " pairs");
            }
        }
    }
    return store;
}

InstructionStore open_store(const std::filesystem::path& path) {
    if (is_fixture_manifest(path)) return make_fixture(load_fixture_manifest(path));
    return load_store(path);
}

}  // namespace stereo
