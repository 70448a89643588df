#pragma once

#include <stdexcept>
#include <string>

namespace nla {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A parameter is outside the documented domain of an operation.
class PreconditionError : public Error {
public:
  using Error::Error;
};

/// A state does not fit in the working Fock cutoff, or an operation would
/// push amplitude past it.
class TruncationError : public Error {
public:
  using Error::Error;
};

/// Expectation or normalization requested for a state with zero norm.
class ZeroNormError : public Error {
public:
  using Error::Error;
};

/// An iterative or series method failed to converge, or produced an
/// unphysical intermediate.
class ConvergenceError : public Error {
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

} // namespace nla
