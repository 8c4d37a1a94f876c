#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace alrec {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (CLI exit code 2).
class DataError : public Error {
public:
    using Error::Error;
};

class ParseError : public DataError {
public:
    ParseError(const std::string& message, std::size_t line)
        : DataError("line " + std::to_string(line) + ": " + message), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class ValidationError : public DataError {
public:
    using DataError::DataError;
};

/// Rejected experiment configuration (CLI exit code 1).
class ConfigError : public Error {
public:
    using Error::Error;
};

class IneligibleUserError : public Error {
public:
    using Error::Error;
};

/// A metric or statistic asked of an empty or degenerate input.
class UndefinedMetricError : public Error {
public:
    using Error::Error;
};

/// Filesystem failure while writing results.
class IoError : public Error {
public:
    using Error::Error;
};

class TrainingDivergedError : public Error {
public:
    using Error::Error;
};

}  // namespace alrec
