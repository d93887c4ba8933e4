#pragma once

#include <stdexcept>
#include <string>

namespace phasecur {

enum class ErrorCode {
    InvalidGrid,
    InvalidArgument,
    BoundaryLeakage,
    Resolution,
    RealityViolation,
    UnknownKernel,
    MissingParameter,
    NonFinite,
    IllPosedFit,
    MemoryCap,
    DistributionValuedKernel,
    ThinSlice,
    MomentumBoundaryLeakage,
    Node,
    SmallDenominator,
    NonUnitVector,
    Config,
    Io,
};

const char* to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so that
/// callers (the CLI in particular) can map it onto an exit status.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace phasecur
