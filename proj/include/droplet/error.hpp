#pragma once

#include <stdexcept>
#include <string>

namespace droplet {

// Base of every error raised by the library. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A precondition on the inputs of an operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Empty/full supports, missing interfaces, empty boundaries.
class DegenerateGeometryError : public Error {
 public:
  using Error::Error;
};

class GridMismatchError : public Error {
 public:
  using Error::Error;
};

// Iterative solver or relaxation loop hit its cap.
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, double final_residual)
      : Error(what), final_residual_(final_residual) {}
  double final_residual() const { return final_residual_; }

 private:
  double final_residual_;
};

// The wet region grew into the margin of the computational box.
class BoxReachedError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace droplet
