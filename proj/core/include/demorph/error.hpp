#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace demorph {

enum class ErrorCode {
    // image-core
    FileNotFound,
    UnsupportedFormat,
    CorruptImage,
    DimensionMismatch,
    ImageTooSmall,
    // biometric
    ZeroVector,
    EmptyImpostorSet,
    EmptyGenuineSet,
    EmptyGalleryAfterExclusion,
    EmptyRecordSet,
    UnattainableFmr,
    // dataset
    MalformedLine,
    DuplicateMorphId,
    MissingField,
    InvalidRecord,
    BadMagic,
    UnsupportedVersion,
    TruncatedFile,
    TrailingBytes,
    DuplicateId,
    EmptySet,
    MissingEmbedding,
    // harness
    InvalidArgument,
    IoError,
    AssertionFailed,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Single exception type for the library; `code()` says which contract was broken.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Process exit status for an error: 1 validation, 2 I/O, 3 sanity assertion.
int exit_code_for(ErrorCode code) noexcept;

}  // namespace demorph
