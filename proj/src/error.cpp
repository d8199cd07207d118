#include "nbf/error.hpp"

namespace nbf {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::NonGenerator: return "NonGenerator";
        case ErrorCode::NonPositiveHistory: return "NonPositiveHistory";
        case ErrorCode::InvalidParameter: return "InvalidParameter";
        case ErrorCode::Reducible: return "Reducible";
        case ErrorCode::SingularSystem: return "SingularSystem";
        case ErrorCode::ThetaOutOfRange: return "ThetaOutOfRange";
        case ErrorCode::AlphaOutOfRange: return "AlphaOutOfRange";
        case ErrorCode::OutOfRange: return "OutOfRange";
        case ErrorCode::NonPositiveA: return "NonPositiveA";
        case ErrorCode::NonPositiveB: return "NonPositiveB";
        case ErrorCode::PreconditionViolation: return "PreconditionViolation";
        case ErrorCode::NonPositiveMu: return "NonPositiveMu";
        case ErrorCode::NonUniformDelay: return "NonUniformDelay";
        case ErrorCode::NonDyadicRefinement: return "NonDyadicRefinement";
        case ErrorCode::MismatchedConfig: return "MismatchedConfig";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

}  // namespace nbf
