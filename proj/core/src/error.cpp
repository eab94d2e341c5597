#include "protolink/error.hpp"

namespace protolink {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::Io: return "io";
    case ErrorCode::MalformedRecord: return "malformed-record";
    case ErrorCode::DuplicateId: return "duplicate-id";
    case ErrorCode::MergeCycle: return "merge-cycle";
    case ErrorCode::MergeTargetMissing: return "merge-target-missing";
    case ErrorCode::MergeTargetInactive: return "merge-target-inactive";
    case ErrorCode::UnknownId: return "unknown-id";
    case ErrorCode::InconsistentSnapshot: return "inconsistent-snapshot";
    case ErrorCode::BadMagic: return "bad-magic";
    case ErrorCode::BadVersion: return "bad-version";
    case ErrorCode::Truncated: return "truncated";
    case ErrorCode::ZeroNorm: return "zero-norm";
    case ErrorCode::DimensionMismatch: return "dimension-mismatch";
    case ErrorCode::MissingEmbedding: return "missing-embedding";
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::EmptyInput: return "empty-input";
    case ErrorCode::OverlappingSpans: return "overlapping-spans";
    case ErrorCode::Config: return "config";
    case ErrorCode::Evaluation: return "evaluation";
    }
    return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), message_(message) {}

} // namespace protolink
