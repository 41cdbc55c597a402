#ifndef HSFLOW_ERROR_HPP_
#define HSFLOW_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace hsflow {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input: unsorted breakpoints, negative time, bad sizes.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// Peakon amplitudes do not sum to zero, so the derivative is not square integrable.
class ConstraintViolated : public Error {
 public:
  using Error::Error;
};

class QuadratureUnresolved : public Error {
 public:
  using Error::Error;
};

class BlowupBeforeT : public Error {
 public:
  using Error::Error;
};

class CollisionDetected : public Error {
 public:
  using Error::Error;
};

class ConfigInvalid : public Error {
 public:
  using Error::Error;
};

}  // namespace hsflow

#endif  // HSFLOW_ERROR_HPP_
