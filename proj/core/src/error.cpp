#include "demorph/error.hpp"

namespace demorph {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::FileNotFound: return "FileNotFound";
        case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
        case ErrorCode::CorruptImage: return "CorruptImage";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::ImageTooSmall: return "ImageTooSmall";
        case ErrorCode::ZeroVector: return "ZeroVector";
        case ErrorCode::EmptyImpostorSet: return "EmptyImpostorSet";
        case ErrorCode::EmptyGenuineSet: return "EmptyGenuineSet";
        case ErrorCode::EmptyGalleryAfterExclusion: return "EmptyGalleryAfterExclusion";
        case ErrorCode::EmptyRecordSet: return "EmptyRecordSet";
        case ErrorCode::UnattainableFmr: return "UnattainableFmr";
        case ErrorCode::MalformedLine: return "MalformedLine";
        case ErrorCode::DuplicateMorphId: return "DuplicateMorphId";
        case ErrorCode::MissingField: return "MissingField";
        case ErrorCode::InvalidRecord: return "InvalidRecord";
        case ErrorCode::BadMagic: return "BadMagic";
        case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
        case ErrorCode::TruncatedFile: return "TruncatedFile";
        case ErrorCode::TrailingBytes: return "TrailingBytes";
        case ErrorCode::DuplicateId: return "DuplicateId";
        case ErrorCode::EmptySet: return "EmptySet";
        case ErrorCode::MissingEmbedding: return "MissingEmbedding";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::AssertionFailed: return "AssertionFailed";
    }
    return "Unknown";
}

int exit_code_for(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::FileNotFound:
        case ErrorCode::IoError:
            return 2;
        case ErrorCode::AssertionFailed:
            return 3;
        default:
            return 1;
    }
}

}  // namespace demorph
