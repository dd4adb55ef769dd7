#pragma once

#include <stdexcept>
#include <string>

namespace qrng {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument violates a documented precondition (nonpositive duration, out-of-range code, ...).
class InvalidParameter : public Error {
public:
    using Error::Error;
};

/// Incompatible laser modes, mismatched repetition rates, inconsistent config fields.
class ConfigurationError : public Error {
public:
    ConfigurationError(std::string field, const std::string& message);
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Input is well-formed but carries no usable information (constant sequence, empty support).
class DegenerateInput : public Error {
public:
    using Error::Error;
};

class InsufficientData : public Error {
public:
    using Error::Error;
};

/// File could not be read, written or parsed.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace qrng
