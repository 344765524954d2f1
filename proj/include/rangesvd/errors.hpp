#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rangesvd {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input data violates a contract (non-finite entries, shape mismatch, ...).
class InvalidInputError : public Error {
public:
    using Error::Error;
};

/// A parameter is outside its documented domain.
class InvalidParameterError : public Error {
public:
    using Error::Error;
};

/// A time range does not fit the addressed data.
class RangeError : public Error {
public:
    using Error::Error;
};

/// Malformed text input; carries the 1-based line number.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Input has a different column layout than requested.
class SchemaError : public Error {
public:
    using Error::Error;
};

/// Underlying file could not be opened, read or written.
class IoError : public Error {
public:
    using Error::Error;
};

/// A persisted store does not start with the expected magic/version.
class FormatError : public Error {
public:
    using Error::Error;
};

/// A persisted store is structurally damaged (truncation, bad counts,
/// factor invariants violated).
class CorruptionError : public Error {
public:
    using Error::Error;
};

} // namespace rangesvd
