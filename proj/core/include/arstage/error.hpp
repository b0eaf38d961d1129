#pragma once

#include <stdexcept>
#include <string>

namespace arstage {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value violated a domain invariant (bad latitude, non-positive scale, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A lookup named an entity that does not exist.
class NotFoundError : public Error {
 public:
  using Error::Error;
};

}  // namespace arstage
