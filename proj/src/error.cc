// SPDX-License-Identifier: Apache-2.0
#include "cbt/error.hh"

namespace cbt
{
std::string_view to_string(ErrorCode code)
{
    switch (code)
    {
        case ErrorCode::NotOnBoundary: return "NotOnBoundary";
        case ErrorCode::DegenerateGradient: return "DegenerateGradient";
        case ErrorCode::OutsideDomain: return "OutsideDomain";
        case ErrorCode::RootNotBracketed: return "RootNotBracketed";
        case ErrorCode::GradientUndefinedOnBoundary:
            return "GradientUndefinedOnBoundary";
        case ErrorCode::GradientUnavailable: return "GradientUnavailable";
        case ErrorCode::TangentialStart: return "TangentialStart";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::NonFiniteValue: return "NonFiniteValue";
        case ErrorCode::OrderTooHigh: return "OrderTooHigh";
        case ErrorCode::GridTooCoarse: return "GridTooCoarse";
        case ErrorCode::MissingDerivative: return "MissingDerivative";
        case ErrorCode::NotInH0: return "NotInH0";
        case ErrorCode::QuadratureMismatch: return "QuadratureMismatch";
        case ErrorCode::ShiftTooSmall: return "ShiftTooSmall";
        case ErrorCode::MaxIterationsExceeded: return "MaxIterationsExceeded";
        case ErrorCode::StoppingPowerViolation:
            return "StoppingPowerViolation";
        case ErrorCode::InsufficientEnergyResolution:
            return "InsufficientEnergyResolution";
        case ErrorCode::EmptyTrace: return "EmptyTrace";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, std::string module, std::string const& what)
    : std::runtime_error(std::string(to_string(code)) + " [" + module + "]: "
                         + what)
    , code_(code)
    , module_(std::move(module))
{
}

}  // namespace cbt
