#pragma once

#include <stdexcept>
#include <string>

namespace rtfcs {

// Base class for all errors raised by the library. The CLI maps each
// subclass onto its own exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Sizes or indices that do not agree with each other.
class DimensionError : public Error {
public:
    using Error::Error;
};

// Arguments that violate a documented precondition (ranges, emptiness, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

// Rank-deficient or ill-conditioned linear systems, non-finite iterates,
// overflowing weight profiles.
class NumericError : public Error {
public:
    using Error::Error;
};

// Scenario / config file schema violations.
class ConfigError : public Error {
public:
    using Error::Error;
};

// File system and file-format failures.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace rtfcs
