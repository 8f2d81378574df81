// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cbt
{
//! Failure categories surfaced by the solver modules.
enum class ErrorCode
{
    NotOnBoundary,
    DegenerateGradient,
    OutsideDomain,
    RootNotBracketed,
    GradientUndefinedOnBoundary,
    GradientUnavailable,
    TangentialStart,
    EmptyInput,
    NonFiniteValue,
    OrderTooHigh,
    GridTooCoarse,
    MissingDerivative,
    NotInH0,
    QuadratureMismatch,
    ShiftTooSmall,
    MaxIterationsExceeded,
    StoppingPowerViolation,
    InsufficientEnergyResolution,
    EmptyTrace,
    ConfigError,
    InvalidArgument,
};

std::string_view to_string(ErrorCode code);

//! Exception carrying an error category and the module that raised it.
class Error : public std::runtime_error
{
  public:
    Error(ErrorCode code, std::string module, std::string const& what);

    ErrorCode code() const noexcept { return code_; }
    std::string const& module() const noexcept { return module_; }

  private:
    ErrorCode code_;
    std::string module_;
};

}  // namespace cbt
