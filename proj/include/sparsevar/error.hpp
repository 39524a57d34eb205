#pragma once

#include <stdexcept>
#include <string>

namespace sparsevar {

// Error categories map one-to-one onto CLI exit codes.
enum class ErrorKind {
    data = 1,
    convergence = 2,
    config = 3,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }
    int exit_code() const noexcept { return static_cast<int>(kind_); }

private:
    ErrorKind kind_;
};

/// Bad input values: non-finite numbers, non-positive prices, ragged CSV rows.
class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

/// Caller violated a documented precondition (shape mismatch, bad parameter).
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

/// Coordinate descent hit its sweep limit before the KKT certificate held.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double kkt_violation)
        : Error(ErrorKind::convergence, what), kkt_violation_(kkt_violation) {}
    double kkt_violation() const noexcept { return kkt_violation_; }

private:
    double kkt_violation_;
};

/// Restricted design without full column rank.
class SingularityError : public DataError {
public:
    using DataError::DataError;
};

/// A numeric quantity collapsed to zero where the method needs it positive
/// (nodewise scale, residual variance, degrees of freedom).
class DegenerateError : public DataError {
public:
    using DataError::DataError;
};

}  // namespace sparsevar
