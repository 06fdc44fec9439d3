#pragma once

#include <stdexcept>
#include <string>

namespace img2uml {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A name that normalizes to the empty string.
class UnusableNameError : public Error {
 public:
  using Error::Error;
};

/// A model that violates one of the UmlModel invariants where a valid one is required.
class InvalidModelError : public Error {
 public:
  using Error::Error;
};

/// Malformed serialized input (model JSON, run log lines, config files).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Bad flags or unsupported option values.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Provider misconfiguration: unknown provider, missing API key, HTTP 4xx, bad image.
/// Not retryable.
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

/// Network failure, timeout or server-side error. Retryable.
class TransportError : public Error {
 public:
  using Error::Error;
};

/// The replay store holds no response for a conversation digest.
class FixtureMissingError : public Error {
 public:
  FixtureMissingError(const std::string& message, std::string digest)
      : Error(message), digest_(std::move(digest)) {}

  const std::string& digest() const noexcept { return digest_; }

 private:
  std::string digest_;
};

}  // namespace img2uml
