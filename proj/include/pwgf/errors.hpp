#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pwgf {

// Distribution parameter outside its domain (p outside [0,1], rate <= 0, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed input to an operation: mismatched lengths, unnormalized masses.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Operation not defined for the given distribution family.
class UnsupportedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Caller misuse: shape mismatches, caches from a different network.
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Exact enumeration would exceed the configured atom budget.
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

// A non-finite value appeared. `index` identifies the offending particle or
// sample when there is one.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what, std::ptrdiff_t index = -1)
      : std::runtime_error(what), index_(index) {}

  std::ptrdiff_t index() const noexcept { return index_; }

 private:
  std::ptrdiff_t index_;
};

}  // namespace pwgf
