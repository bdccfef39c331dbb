#include "stereo/error.hpp"

namespace stereo {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::UnknownSubgroup: return "UnknownSubgroup";
        case ErrorCode::UnknownDimension: return "UnknownDimension";
        case ErrorCode::AmbiguousSubgroup: return "AmbiguousSubgroup";
        case ErrorCode::NoPairFound: return "NoPairFound";
        case ErrorCode::InvalidValue: return "InvalidValue";
        case ErrorCode::EmptyCaseList: return "EmptyCaseList";
        case ErrorCode::MalformedStep: return "MalformedStep";
        case ErrorCode::UnknownTool: return "UnknownTool";
        case ErrorCode::ArgSchemaMismatch: return "ArgSchemaMismatch";
        case ErrorCode::IndexMismatch: return "IndexMismatch";
        case ErrorCode::StepBudgetExhausted: return "StepBudgetExhausted";
        case ErrorCode::ProviderUnavailable: return "ProviderUnavailable";
        case ErrorCode::ToolFailure: return "ToolFailure";
        case ErrorCode::ScriptExhausted: return "ScriptExhausted";
        case ErrorCode::ExtractionFailed: return "ExtractionFailed";
        case ErrorCode::NoStereotypeFound: return "NoStereotypeFound";
        case ErrorCode::EmptyStore: return "EmptyStore";
        case ErrorCode::NoMatch: return "NoMatch";
        case ErrorCode::BackendUnavailable: return "BackendUnavailable";
        case ErrorCode::PartialBatch: return "PartialBatch";
        case ErrorCode::EmptyBatch: return "EmptyBatch";
        case ErrorCode::Transport: return "Transport";
        case ErrorCode::RateLimited: return "RateLimited";
        case ErrorCode::BadResponse: return "BadResponse";
        case ErrorCode::NoDefaultDistribution: return "NoDefaultDistribution";
        case ErrorCode::MissingSignature: return "MissingSignature";
        case ErrorCode::RowMissing: return "RowMissing";
        case ErrorCode::PreconditionViolated: return "PreconditionViolated";
        case ErrorCode::UnreadableFile: return "UnreadableFile";
        case ErrorCode::UnknownCorpus: return "UnknownCorpus";
        case ErrorCode::AllRowsRejected: return "AllRowsRejected";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::VersionMismatch: return "VersionMismatch";
        case ErrorCode::TaxonomyHashMismatch: return "TaxonomyHashMismatch";
        case ErrorCode::UnknownPair: return "UnknownPair";
        case ErrorCode::MalformedFile: return "MalformedFile";
        case ErrorCode::CoverageGap: return "CoverageGap";
        case ErrorCode::MissingSubgroupCoverage: return "MissingSubgroupCoverage";
        case ErrorCode::Config: return "Config";
    }
    return "Unknown";
}

}  // namespace stereo
