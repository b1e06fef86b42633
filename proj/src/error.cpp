#include "anchorda/error.hpp"

namespace anchorda {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::IoFailure: return "IoFailure";
        case ErrorKind::BadMagic: return "BadMagic";
        case ErrorKind::UnsupportedDtype: return "UnsupportedDtype";
        case ErrorKind::TruncatedPayload: return "TruncatedPayload";
        case ErrorKind::TrailingData: return "TrailingData";
        case ErrorKind::DimOverflow: return "DimOverflow";
        case ErrorKind::VersionMismatch: return "VersionMismatch";
        case ErrorKind::DuplicateId: return "DuplicateId";
        case ErrorKind::MissingField: return "MissingField";
        case ErrorKind::UnresolvablePath: return "UnresolvablePath";
        case ErrorKind::ShapeMismatch: return "ShapeMismatch";
        case ErrorKind::CategoryOutOfRange: return "CategoryOutOfRange";
        case ErrorKind::MissingMap: return "MissingMap";
        case ErrorKind::TooFewSamples: return "TooFewSamples";
        case ErrorKind::NotNormalized: return "NotNormalized";
        case ErrorKind::ZeroProbability: return "ZeroProbability";
        case ErrorKind::MissingInput: return "MissingInput";
        case ErrorKind::NoValidPixels: return "NoValidPixels";
        case ErrorKind::NoCandidates: return "NoCandidates";
        case ErrorKind::EmptyRange: return "EmptyRange";
        case ErrorKind::RectOutOfBounds: return "RectOutOfBounds";
        case ErrorKind::NoCopyableClasses: return "NoCopyableClasses";
        case ErrorKind::ProvenanceViolation: return "ProvenanceViolation";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace anchorda
