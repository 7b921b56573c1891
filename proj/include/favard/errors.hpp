#pragma once

#include <stdexcept>
#include <string>

namespace favard {

// Base class for every error the library raises. `kind()` is a stable,
// machine-readable tag used by the CLI error JSON.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

// Precondition violated by the caller (bad parameter, malformed config, ...).
class InvalidInput : public Error {
 public:
  explicit InvalidInput(const std::string& message) : Error("invalid_input", message) {}
};

// A configured resource cap would be exceeded.
class ResourceError : public Error {
 public:
  explicit ResourceError(const std::string& message) : Error("resource", message) {}
};

// A projection map is undefined at the requested point/parameter.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& message) : Error("domain", message) {}
};

// Non-finite or otherwise untrustworthy numerical result.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& message) : Error("numerical", message) {}
};

}  // namespace favard
