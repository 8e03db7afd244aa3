#pragma once

#include <stdexcept>
#include <string>

namespace rencoal {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller supplied an argument outside an operation's domain
/// (empty group, K > N, non-divisible group count, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Input data failed validation (malformed CSV, bad covariance, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

/// A numerical routine could not proceed (e.g. covariance factorization).
class NumericalError : public Error {
 public:
  using Error::Error;
};

namespace detail {
[[noreturn]] void throw_invalid(const std::string& what);
[[noreturn]] void throw_data(const std::string& what);
}  // namespace detail

}  // namespace rencoal
