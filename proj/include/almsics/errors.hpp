#pragma once

#include <stdexcept>
#include <string>

namespace almsics {

// Base for every numerical failure raised by the library. Argument problems
// use std::invalid_argument instead.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DecompositionError : public Error {
 public:
  using Error::Error;
};

class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefiniteError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

// Raised when an internal invariant fails; always indicates a bug.
class InvariantError : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, long iteration, double mu)
      : Error(what), iteration_(iteration), mu_(mu) {}

  long iteration() const { return iteration_; }
  double mu() const { return mu_; }

 private:
  long iteration_;
  double mu_;
};

}  // namespace almsics
