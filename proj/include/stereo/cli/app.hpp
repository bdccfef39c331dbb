#pragma once

#include <functional>
#include <iosfwd>

namespace stereo::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPipeline = 1;
inline constexpr int kExitConfig = 2;

struct Io {
    std::ostream& out;
    std::ostream& err;
    /// getenv stand-in, so tests can supply their own environment.
    std::function<const char*(const char*)> env;
};

/// Parses arguments, runs the subcommand and maps failures to exit codes:
/// 0 when the command completed, 1 on a pipeline error, 2 on bad
/// arguments or configuration.
int run(int argc, const char* const* argv, Io io);

}  // namespace stereo::cli
