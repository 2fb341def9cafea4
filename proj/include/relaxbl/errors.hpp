#pragma once

#include <stdexcept>
#include <string>

namespace relaxbl {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad arguments or violated preconditions (shape mismatch, empty grid, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A pivot fell below the singularity threshold in a dense solve.
class SingularMatrix : public Error {
 public:
  using Error::Error;
};

/// An eigenvalue sits on (or within tolerance of) the imaginary axis.
class CharacteristicBoundary : public Error {
 public:
  using Error::Error;
};

/// An iterative method (root finder, Newton, bisection) did not converge.
class ConvergenceFailure : public Error {
 public:
  using Error::Error;
};

/// The sign of f'(u) is zero or changes where a single sign is required.
class DegenerateSign : public Error {
 public:
  using Error::Error;
};

/// A time step produced NaN or Inf, or violated the CFL restriction.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace relaxbl
