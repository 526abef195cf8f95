#pragma once
#include <stdexcept>
#include <string>

namespace riskbound {

enum class ErrorKind {
    NonMonotoneCurve,
    EmptyGrid,
    NotContractive,
    OffGrid,
    RangeViolation,
    OracleUnavailable,
    EmptyMinimalSet,
    NotBinary,
    EigenFailure,
    BadParams,
    GridMismatch,
    EnvelopeViolated,
    LinkDegenerate,
    NotNested,
    BadOrdering,
    LipschitzViolated,
    ConvexityViolated,
    MissingField,
    ConfigError,
};

[[nodiscard]] const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

    /// True for errors caused by bad input rather than numerics.
    [[nodiscard]] bool is_validation() const noexcept;

private:
    ErrorKind kind_;
};

}  // namespace riskbound
