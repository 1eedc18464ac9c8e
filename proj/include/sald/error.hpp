#pragma once

#include <stdexcept>
#include <string>

namespace sald {

/// Invalid input: bad dimensions, empty geometry, malformed files.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A computation produced a non-finite value (e.g. a NaN training loss).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace sald
