#pragma once

#include <stdexcept>
#include <string>

namespace regsel {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input files, schemas or tables.
class DataError : public Error {
public:
    using Error::Error;
};

/// A numerical quantity is undefined for the given model (zero degrees of
/// freedom, exact fit, unit leverage, ...).
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Arguments that violate an operation's preconditions.
class ArgumentError : public Error {
public:
    using Error::Error;
};

}  // namespace regsel
