#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace anchorda {

enum class ErrorKind {
    InvalidArgument,
    IoFailure,
    BadMagic,
    UnsupportedDtype,
    TruncatedPayload,
    TrailingData,
    DimOverflow,
    VersionMismatch,
    DuplicateId,
    MissingField,
    UnresolvablePath,
    ShapeMismatch,
    CategoryOutOfRange,
    MissingMap,
    TooFewSamples,
    NotNormalized,
    ZeroProbability,
    MissingInput,
    NoValidPixels,
    NoCandidates,
    EmptyRange,
    RectOutOfBounds,
    NoCopyableClasses,
    ProvenanceViolation,
};

std::string_view to_string(ErrorKind kind);

// All library failures surface as this exception; `kind()` is stable and
// what callers (and the CLI exit-code mapping) dispatch on.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

inline void require(bool condition, const std::string& message) {
    if (!condition) fail(ErrorKind::InvalidArgument, message);
}

}  // namespace anchorda
