#include "ocshield/errors.hpp"

namespace ocshield {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::MalformedModel: return "MalformedModel";
        case ErrorCode::LimitExceeded: return "LimitExceeded";
        case ErrorCode::FeatureIndexOutOfRange: return "FeatureIndexOutOfRange";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::NonFiniteInput: return "NonFiniteInput";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::EmptyClassPartition: return "EmptyClassPartition";
        case ErrorCode::EnumerationCapExceeded: return "EnumerationCapExceeded";
        case ErrorCode::NoAdversarialExists: return "NoAdversarialExists";
        case ErrorCode::DegenerateLabels: return "DegenerateLabels";
        case ErrorCode::ConfigLimit: return "ConfigLimit";
        case ErrorCode::DegenerateData: return "DegenerateData";
        case ErrorCode::TooFewExamples: return "TooFewExamples";
        case ErrorCode::InsufficientCorrect: return "InsufficientCorrect";
        case ErrorCode::SingleClass: return "SingleClass";
        case ErrorCode::EmptyList: return "EmptyList";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::IoError: return "IoError";
    }
    return "UnknownError";
}

} // namespace ocshield
