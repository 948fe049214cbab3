#pragma once

#include <stdexcept>
#include <string>

namespace nsctrl {

/// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid configuration (bad key, value out of range, malformed file).
struct ConfigError : Error {
    explicit ConfigError(const std::string& msg, int line = -1)
        : Error(line >= 0 ? "config line " + std::to_string(line) + ": " + msg : msg),
          line_number(line) {}
    int line_number;
};

/// Input data violates an operation precondition (incompatible flux, wrong trace, ...).
struct DataError : Error {
    using Error::Error;
};

/// A linear or nonlinear solve failed to meet its residual contract.
struct SolverError : Error {
    using Error::Error;
};

/// Geometric inconsistency (point outside domain, particle escaped without crossing the outlet).
struct GeometryError : Error {
    using Error::Error;
};

/// Requested value outside the computed range (time not covered, index out of bounds).
struct RangeError : Error {
    using Error::Error;
};

/// Scenario outside the validated coefficient class of an operation.
struct UnsupportedScenarioError : Error {
    using Error::Error;
};

/// Control synthesis cannot meet its targets (insufficient conveyor mass, singular basis).
struct InfeasibleError : Error {
    using Error::Error;
};

/// Filesystem failure, with the offending path in the message.
struct IoError : Error {
    using Error::Error;
};

} // namespace nsctrl
