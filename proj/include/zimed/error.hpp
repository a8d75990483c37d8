#pragma once

#include <stdexcept>
#include <string>

namespace zimed {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A function was called outside its mathematical domain (m <= 0 for a
// positive-part density, non-integer count, negative mediator ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Quadrature did not reach tolerance, an exp overflowed, or a likelihood
// term came out as -inf where the model requires it to be finite.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// The data cannot identify the model (no positive mediators, constant x).
class EstimationError : public Error {
 public:
  using Error::Error;
};

// Malformed input file or scenario definition.
class IngestionError : public Error {
 public:
  using Error::Error;
};

}  // namespace zimed
