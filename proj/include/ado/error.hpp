#pragma once

#include <stdexcept>
#include <string>

namespace ado {

/// Broad failure classes. The CLI maps these onto its exit-code contract.
enum class ErrorCategory {
  InvalidArgument,  // bad order, bad coefficient, malformed input
  Domain,           // evaluation point outside the problem domain
  Numerical,        // spectrum, singular system, nonconvergence
  Unsupported,      // valid request outside what the solver handles
  Internal          // self-consistency check failed
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

inline const char* to_string(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::InvalidArgument: return "invalid-argument";
    case ErrorCategory::Domain: return "domain";
    case ErrorCategory::Numerical: return "numerical";
    case ErrorCategory::Unsupported: return "unsupported";
    case ErrorCategory::Internal: return "internal";
  }
  return "unknown";
}

[[noreturn]] inline void fail(ErrorCategory c, const std::string& msg) {
  throw Error(c, msg);
}

}  // namespace ado
