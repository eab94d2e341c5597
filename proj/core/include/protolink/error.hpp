#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace protolink {

enum class ErrorCode {
    Io,
    MalformedRecord,
    DuplicateId,
    MergeCycle,
    MergeTargetMissing,
    MergeTargetInactive,
    UnknownId,
    InconsistentSnapshot,
    BadMagic,
    BadVersion,
    Truncated,
    ZeroNorm,
    DimensionMismatch,
    MissingEmbedding,
    InvalidArgument,
    EmptyInput,
    OverlappingSpans,
    Config,
    Evaluation,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library. `code()` is stable and is what tests
/// and the CLI dispatch on; the message is for humans.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }
    /// Message without the code prefix.
    const std::string& message() const noexcept { return message_; }

private:
    ErrorCode code_;
    std::string message_;
};

} // namespace protolink
