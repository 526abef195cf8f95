#include "riskbound/error.hpp"

namespace riskbound {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::NonMonotoneCurve: return "NonMonotoneCurve";
        case ErrorKind::EmptyGrid: return "EmptyGrid";
        case ErrorKind::NotContractive: return "NotContractive";
        case ErrorKind::OffGrid: return "OffGrid";
        case ErrorKind::RangeViolation: return "RangeViolation";
        case ErrorKind::OracleUnavailable: return "OracleUnavailable";
        case ErrorKind::EmptyMinimalSet: return "EmptyMinimalSet";
        case ErrorKind::NotBinary: return "NotBinary";
        case ErrorKind::EigenFailure: return "EigenFailure";
        case ErrorKind::BadParams: return "BadParams";
        case ErrorKind::GridMismatch: return "GridMismatch";
        case ErrorKind::EnvelopeViolated: return "EnvelopeViolated";
        case ErrorKind::LinkDegenerate: return "LinkDegenerate";
        case ErrorKind::NotNested: return "NotNested";
        case ErrorKind::BadOrdering: return "BadOrdering";
        case ErrorKind::LipschitzViolated: return "LipschitzViolated";
        case ErrorKind::ConvexityViolated: return "ConvexityViolated";
        case ErrorKind::MissingField: return "MissingField";
        case ErrorKind::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

bool Error::is_validation() const noexcept {
    switch (kind_) {
        case ErrorKind::BadParams:
        case ErrorKind::NotNested:
        case ErrorKind::NotBinary:
        case ErrorKind::BadOrdering:
        case ErrorKind::MissingField:
        case ErrorKind::ConfigError:
        case ErrorKind::GridMismatch:
        case ErrorKind::OffGrid:
        case ErrorKind::EmptyGrid:
            return true;
        default:
            return false;
    }
}

}  // namespace riskbound
