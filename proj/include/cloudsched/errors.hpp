#pragma once

#include <stdexcept>

namespace cloudsched {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-range input (files, CLI arguments, generator parameters).
class InputError : public Error {
 public:
  using Error::Error;
};

/// Parameter outside the documented domain of an operation.
class ParameterError : public InputError {
 public:
  using InputError::InputError;
};

/// No feasible solution exists for the requested (sub)problem.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

}  // namespace cloudsched
