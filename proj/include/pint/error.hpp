#pragma once

#include <stdexcept>
#include <string>

namespace pint {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numeric parameter is outside its documented domain (tau <= 0, lo >= hi, ...).
class InvalidParameter : public Error {
public:
    using Error::Error;
};

/// Input data cannot be processed (empty cloud, non-finite values, ...).
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// Two grids that must share a layout do not.
class IncompatibleGrids : public Error {
public:
    using Error::Error;
};

/// A statistic has zero variance where a positive one is required.
class DegenerateStatistic : public Error {
public:
    using Error::Error;
};

/// A similarity graph has an isolated vertex.
class DegenerateGraph : public Error {
public:
    using Error::Error;
};

/// An experiment configuration is internally inconsistent.
class InvalidConfiguration : public Error {
public:
    using Error::Error;
};

/// Malformed file content. Carries the 1-based line number when known.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace pint
