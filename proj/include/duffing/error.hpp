#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace duffing {

enum class ErrorCode {
    InvalidArgument,
    NumericOverflow,
    SpreadCollapse,
    OffManifold,
    DegeneratePair,
    TooFewPoints,
    GridMismatch,
    EmptyHistogram,
    MissingRecords,
    MalformedConfig,
    Io,
    CorruptFile,
    HashMismatch,
};

/// Short machine-readable name, e.g. "spread_collapse".
std::string_view error_code_name(ErrorCode code) noexcept;

class DuffingError : public std::runtime_error {
public:
    DuffingError(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Raised by the integrator when a trajectory leaves the valid domain.
/// Carries the simulation time at which it happened.
class IntegrationError : public DuffingError {
public:
    IntegrationError(ErrorCode code, const std::string& message, double time)
        : DuffingError(code, message + " at t=" + std::to_string(time)), time_(time) {}

    double time() const noexcept { return time_; }

private:
    double time_;
};

}  // namespace duffing
