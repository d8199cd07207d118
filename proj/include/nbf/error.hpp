#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nbf {

enum class ErrorCode {
    DimensionMismatch,
    NonGenerator,
    NonPositiveHistory,
    InvalidParameter,
    Reducible,
    SingularSystem,
    ThetaOutOfRange,
    AlphaOutOfRange,
    OutOfRange,
    NonPositiveA,
    NonPositiveB,
    PreconditionViolation,
    NonPositiveMu,
    NonUniformDelay,
    NonDyadicRefinement,
    MismatchedConfig,
    ConfigError,
    IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Base exception for every failure raised by the library.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace nbf
