#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace v2v {

enum class ErrorCode {
    ZeroNorm,
    DimensionMismatch,
    EmptyInput,
    BadArchitecture,
    ShapeMismatch,
    BadMagic,
    VersionUnsupported,
    TruncatedFile,
    ChecksumMismatch,
    FileNotFound,
    HeaderMismatch,
    NotEnoughRecords,
    BadFraction,
    BadDimension,
    ConfigInvalid,
    UnknownId,
    DuplicateId,
    NonFinite,
    NumericFailure,
    IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI exit-code mapping) can branch on the kind of error.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace v2v
