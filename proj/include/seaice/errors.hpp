#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace seaice {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input row. Carries the 1-based line number of the offending row.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class EmptyInputError : public Error {
public:
    using Error::Error;
};

class RangeError : public Error {
public:
    using Error::Error;
};

/// A precondition of an operation was violated by the caller.
class ContractError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

/// Design matrix is numerically rank deficient; names one offending column.
class SingularDesignError : public Error {
public:
    explicit SingularDesignError(std::string column)
        : Error("singular design: column '" + column + "' is linearly dependent on the others"),
          column_(std::move(column)) {}
    [[nodiscard]] const std::string& column() const noexcept { return column_; }

private:
    std::string column_;
};

class ZeroVarianceError : public Error {
public:
    using Error::Error;
};

/// Series unsuitable for a diagnostic (too short, degenerate).
class DiagnosticError : public Error {
public:
    using Error::Error;
};

/// Kalman recursion broke down at a given step.
class FilterError : public Error {
public:
    FilterError(std::size_t step, const std::string& what)
        : Error("step " + std::to_string(step) + ": " + what), step_(step) {}
    [[nodiscard]] std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace seaice
