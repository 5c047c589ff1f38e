#ifndef TGL_ERROR_HPP
#define TGL_ERROR_HPP

#include <stdexcept>
#include <string>

namespace tgl {

// Base of everything the library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input: malformed files, out-of-range arguments, violated preconditions.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// NaN/Inf showed up during computation.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace tgl

#endif  // TGL_ERROR_HPP
