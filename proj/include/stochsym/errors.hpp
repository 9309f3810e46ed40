#pragma once

#include <stdexcept>
#include <string>

namespace stochsym {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Point outside the open set an evaluator is defined on.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Non-finite evaluation, overflow.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Query outside a path's time range.
class RangeError : public Error {
 public:
  using Error::Error;
};

class SingularMapError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Too many rejected paths for an estimate to be trusted.
class ReliabilityError : public Error {
 public:
  using Error::Error;
};

// Time-changed path did not reach the requested physical time.
class HorizonError : public Error {
 public:
  using Error::Error;
};

}  // namespace stochsym
