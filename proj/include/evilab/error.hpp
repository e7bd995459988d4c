#pragma once

#include <stdexcept>
#include <string>

namespace evilab {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the domain of a cost, energy or point constructor.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Shape mismatch between points (dimension, support size, variant).
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Query past the end of a stored trajectory.
class HorizonError : public Error {
public:
    HorizonError(const std::string& what, double max_time)
        : Error(what), max_time_(max_time) {}
    double max_time() const noexcept { return max_time_; }

private:
    double max_time_;
};

/// A precondition of an operation does not hold (missing symmetry, wrong variant, ...).
class ContractError : public Error {
public:
    using Error::Error;
};

/// Iterative solver stopped before reaching its tolerance.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double last_residual)
        : Error(what), last_residual_(last_residual) {}
    double last_residual() const noexcept { return last_residual_; }

private:
    double last_residual_;
};

/// Argmin set detected empty (no candidates, or objective unbounded below).
class EmptySetError : public Error {
public:
    using Error::Error;
};

/// A computation would exceed its configured work budget.
class BudgetError : public Error {
public:
    using Error::Error;
};

/// Malformed or invalid experiment configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace evilab
