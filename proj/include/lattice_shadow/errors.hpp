#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lattice_shadow {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Lattice geometry or state shape is unusable (too few sites, mismatched lengths).
class InvalidLatticeError : public Error {
public:
    using Error::Error;
};

/// The resonator equations were requested with mu = 0.
class SingularLimitError : public Error {
public:
    using Error::Error;
};

/// Step or quadrature settings cannot resolve the fast resonator period.
class ConfigurationError : public Error {
public:
    using Error::Error;
};

class BlowUpError : public Error {
public:
    BlowUpError(const std::string& what, double time) : Error(what), time_(time) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

/// Not enough derivative values for the requested expansion order.
class ArityError : public Error {
public:
    using Error::Error;
};

/// Log-log fit inputs outside the positive quadrant.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Log-log fit with fewer than two distinct abscissae.
class FitError : public Error {
public:
    using Error::Error;
};

/// Centered-difference derivatives requested at a trajectory endpoint.
class DerivativeUnavailableError : public Error {
public:
    using Error::Error;
};

/// File could not be written or read.
class IoError : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t line, std::size_t column)
        : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
          line_(line),
          column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

}  // namespace lattice_shadow
