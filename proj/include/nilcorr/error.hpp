#pragma once

#include <stdexcept>
#include <string>

namespace nilcorr {

/// Base class for every error raised by the library. The CLI maps the
/// concrete subclasses onto process exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A requested index window is not covered by the data.
class RangeError : public Error {
public:
    using Error::Error;
};

/// Arguments disagree in size or modulus.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// An input object violates its invariants (bad residue, non-integral
/// polynomial, unknown config key, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A computation would exceed a configured budget or overflow.
class ResourceError : public Error {
public:
    using Error::Error;
};

/// The operation is undefined for this input (negative iterate of a
/// non-invertible map, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A numerical configuration cannot deliver the requested exactness.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A quantity that must be real and nonnegative came out otherwise by more
/// than rounding can explain.
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace nilcorr
