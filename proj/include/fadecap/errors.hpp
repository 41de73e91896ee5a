#pragma once

#include <stdexcept>
#include <string>

namespace fadecap {

/// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid argument outside the mathematical domain of an operation.
struct DomainError : Error {
    explicit DomainError(const std::string& msg) : Error(msg) {}
};

/// A documented precondition of an operation was violated.
struct PreconditionError : Error {
    explicit PreconditionError(const std::string& msg) : Error(msg) {}
};

/// Mismatched or infeasible dimensions (e.g. KL > N).
struct DimensionError : Error {
    explicit DimensionError(const std::string& msg) : Error(msg) {}
};

/// Numerically rank-deficient input where full rank is required.
struct DegeneracyError : Error {
    explicit DegeneracyError(const std::string& msg) : Error(msg) {}
};

/// Dense factorization or solve failed (singular matrix).
struct LinearAlgebraError : Error {
    explicit LinearAlgebraError(const std::string& msg) : Error(msg) {}
};

/// Unsupported configuration value (bad enum, bad flag combination).
struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

/// An iterative scheme ran out of budget. Carries the best estimate seen
/// and a bound on its error so callers can decide whether to keep it.
struct ConvergenceError : Error {
    double best_estimate;
    double error_bound;
    ConvergenceError(const std::string& msg, double best, double err)
        : Error(msg), best_estimate(best), error_bound(err) {}
};

}  // namespace fadecap
