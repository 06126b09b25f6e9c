#pragma once

#include <stdexcept>
#include <string>

namespace tlgerm {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DomainError : Error {
  using Error::Error;
};

struct RangeError : Error {
  using Error::Error;
};

struct ValidationError : Error {
  using Error::Error;
};

struct ConvergenceError : Error {
  using Error::Error;
};

// Raised when a numerical junction state escapes the germ it is supposed to realise.
struct GermViolation : Error {
  using Error::Error;
};

}  // namespace tlgerm
