#pragma once

#include <stdexcept>

namespace wordlelab {

/// Base class for toolkit failures.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Filesystem and parsing failures (missing files, malformed rows).
/// Mapped to CLI exit code 2.
class IoError : public Error {
public:
    using Error::Error;
};

/// Invalid or incomplete configuration. Mapped to CLI exit code 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Numerical or statistical failure (non-convergence, degenerate input).
/// Mapped to CLI exit code 1.
class ComputationError : public Error {
public:
    using Error::Error;
};

}  // namespace wordlelab
