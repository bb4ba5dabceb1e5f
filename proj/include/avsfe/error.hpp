#pragma once

#include <stdexcept>
#include <string>

namespace avsfe {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Tangled or degenerate geometry, misaligned coefficient jumps.
class GeometryError : public Error {
public:
    using Error::Error;
};

/// Factorization failure, CG stagnation, non-finite solution.
class SolverError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace avsfe
