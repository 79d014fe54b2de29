#pragma once

#include <stdexcept>
#include <string>

namespace ocshield {

enum class ErrorCode {
    MalformedModel,
    LimitExceeded,
    FeatureIndexOutOfRange,
    DimensionMismatch,
    NonFiniteInput,
    LengthMismatch,
    EmptyClassPartition,
    EnumerationCapExceeded,
    NoAdversarialExists,
    DegenerateLabels,
    ConfigLimit,
    DegenerateData,
    TooFewExamples,
    InsufficientCorrect,
    SingleClass,
    EmptyList,
    InvalidArgument,
    IoError,
};

const char* to_string(ErrorCode code);

/// Exception type carrying a machine-readable code; the CLI prints
/// "error: <code>: <message>" on a single stderr line.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

} // namespace ocshield
