/// @file error.hpp
/// @brief Exception types shared by every llab module.
#pragma once

#include <stdexcept>
#include <string>

namespace llab {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite or otherwise malformed numeric input.
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// Derivative requested where the map is not differentiable.
class SingularPoint : public Error {
public:
    using Error::Error;
};

/// Out-of-range or inconsistent parameters (exponents, tolerances, ...).
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Shift step that is not an integer multiple of the grid spacing.
class AlignmentError : public Error {
public:
    using Error::Error;
};

/// Cylinder or ball that does not fit inside the grid.
class GeometryError : public Error {
public:
    using Error::Error;
};

/// Region that contains no grid node.
class DegenerateRegion : public Error {
public:
    using Error::Error;
};

/// Malformed configuration file or expression.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Newton and Picard both failed on one implicit step.
class StepFailure : public Error {
public:
    StepFailure(const std::string& what, int level, double epsilon, double residual)
        : Error(what), level_(level), epsilon_(epsilon), residual_(residual) {}

    int level() const noexcept { return level_; }
    double epsilon() const noexcept { return epsilon_; }
    double residual() const noexcept { return residual_; }

private:
    int level_;
    double epsilon_;
    double residual_;
};

}  // namespace llab
