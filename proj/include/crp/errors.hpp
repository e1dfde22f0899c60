#pragma once

#include <stdexcept>
#include <string>

namespace crp {

/// Failure classes; the CLI maps each one to a distinct exit code.
enum class ErrorKind { usage = 1, data = 2, numerical = 3 };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Caller passed inconsistent arguments (dimension mismatch, bad flag, unknown name).
class UsageError : public Error {
public:
    explicit UsageError(const std::string& what) : Error(ErrorKind::usage, what) {}
};

/// Input data is malformed or degenerate.
class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

/// A numerical routine could not produce a trustworthy answer.
class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

/// The multinomial loss cannot be fitted on this target/fold layout; callers fall back to MSE.
class MultinomialInfeasible : public DataError {
public:
    explicit MultinomialInfeasible(const std::string& what) : DataError(what) {}
};

}  // namespace crp
