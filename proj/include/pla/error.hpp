#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pla {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or out-of-domain argument (non-finite values, shape mismatch, bad label).
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// A batch that cannot form triplets (no positives or no negatives for some anchor).
class DegenerateBatch : public Error {
public:
    using Error::Error;
};

class InsufficientData : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Linear algebra failure, e.g. a Gram matrix that stays singular after jitter.
class NumericalError : public Error {
public:
    using Error::Error;
};

class InvalidMeasurement : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    /// 1-based line number, 0 when the input is not line oriented.
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace pla
