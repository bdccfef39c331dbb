#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace stereo {

enum class ErrorCode {
    // domain
    UnknownSubgroup,
    UnknownDimension,
    AmbiguousSubgroup,
    NoPairFound,
    InvalidValue,
    // planner
    EmptyCaseList,
    MalformedStep,
    UnknownTool,
    ArgSchemaMismatch,
    IndexMismatch,
    StepBudgetExhausted,
    ProviderUnavailable,
    ToolFailure,
    ScriptExhausted,
    // tools
    ExtractionFailed,
    NoStereotypeFound,
    EmptyStore,
    NoMatch,
    BackendUnavailable,
    PartialBatch,
    EmptyBatch,
    // backends
    Transport,
    RateLimited,
    BadResponse,
    NoDefaultDistribution,
    MissingSignature,
    RowMissing,
    PreconditionViolated,
    // dataset
    UnreadableFile,
    UnknownCorpus,
    AllRowsRejected,
    IoError,
    VersionMismatch,
    TaxonomyHashMismatch,
    UnknownPair,
    // evaluation
    MalformedFile,
    CoverageGap,
    MissingSubgroupCoverage,
    // cli
    Config,
};

std::string_view to_string(ErrorCode code);

/// Every failure the engine reports carries one of the codes above; the
/// message is for humans and is not parsed anywhere.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}
    /// Wraps a lower-level failure; `cause` keeps the original code.
    Error(ErrorCode code, const std::string& message, ErrorCode cause)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), cause_(cause) {}

    ErrorCode code() const noexcept { return code_; }
    std::optional<ErrorCode> cause() const noexcept { return cause_; }

private:
    ErrorCode code_;
    std::optional<ErrorCode> cause_;
};

}  // namespace stereo
