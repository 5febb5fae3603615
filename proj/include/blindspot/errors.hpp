#pragma once

#include <stdexcept>
#include <string>

namespace blindspot {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Vector/matrix argument has the wrong length for the parameter space or model.
struct DimensionMismatch : Error {
    using Error::Error;
};

// A raw coordinate fell outside its declared [lower, upper] bounds.
struct OutOfBounds : Error {
    OutOfBounds(std::size_t index, double value, const std::string& what)
        : Error(what), index(index), value(value) {}
    std::size_t index;
    double value;
};

// A unit-cube coordinate fell outside [0, 1].
struct OutOfUnitCube : Error {
    using Error::Error;
};

// Kernel matrix could not be factorized even after jitter escalation.
struct CholeskyFailure : Error {
    using Error::Error;
};

// zero_one_loss was asked to score an outcome that carries an evaluation error.
struct EvaluationErrorPresent : Error {
    using Error::Error;
};

struct UnknownOracle : Error {
    using Error::Error;
};

struct EmptyGroup : Error {
    using Error::Error;
};

struct ParameterMismatch : Error {
    using Error::Error;
};

struct MismatchedBudgets : Error {
    using Error::Error;
};

// Invalid configuration or precondition violation detected before any evaluation.
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace blindspot
