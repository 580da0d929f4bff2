#pragma once

#include <stdexcept>

namespace easb {

/// Raised when an input violates a documented precondition or invariant.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised by pooled_entropy when a member site carries only direct entropies.
class UnsupportedPoolingError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace easb
