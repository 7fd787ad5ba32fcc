#pragma once

#include <stdexcept>
#include <string>

namespace finnet {

/// Input rejected: violated precondition, malformed file, inconsistent
/// dimensions. The CLI maps this to exit status 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure could not produce a usable result (singular
/// system, non-finite likelihood). The CLI maps this to exit status 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ValidationError(message);
}

}  // namespace finnet
