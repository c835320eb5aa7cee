#pragma once

#include <stdexcept>
#include <string>

namespace nfim {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A matrix expected to be symmetric is not, beyond tolerance.
class SymmetryError : public Error {
 public:
  using Error::Error;
};

/// Operand shapes, block tags or contract dimensions disagree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A function evaluation produced a non-finite value where a finite one is required.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

/// Every integrand term of a marginalization underflowed to zero.
class DegenerateMarginalError : public Error {
 public:
  using Error::Error;
};

/// FIM too ill-conditioned to invert.
class SingularFimError : public Error {
 public:
  using Error::Error;
};

/// The second-order expansion needs pr(A|phi,theta) > 0 and it was not.
class ExpansionUndefinedError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration, parameters or preconditions supplied by the caller.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace nfim
