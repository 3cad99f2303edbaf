#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace vrts {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed dataset / trace / checkpoint input.
class FormatError : public Error {
 public:
  FormatError(std::string message, std::size_t line = 0, std::string field = {})
      : Error(line == 0 ? message : "line " + std::to_string(line) + ": " + message),
        line_(line),
        field_(std::move(field)) {}

  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

// Precondition violated by the caller (bad sizes, bad config values).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A configuration failed validation. Carries every offending field.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> issues);

  const std::vector<std::string>& issues() const { return issues_; }

 private:
  std::vector<std::string> issues_;
};

// Network or endpoint failure after the retry budget was spent.
class TransportError : public Error {
 public:
  TransportError(std::string message, int attempts, int status = 0)
      : Error(std::move(message)), attempts_(attempts), status_(status) {}

  int attempts() const { return attempts_; }
  int status() const { return status_; }

 private:
  int attempts_;
  int status_;
};

// A 4xx answer from the endpoint: retrying cannot help.
class EndpointConfigError : public Error {
 public:
  EndpointConfigError(std::string message, int status)
      : Error(std::move(message)), status_(status) {}

  int status() const { return status_; }

 private:
  int status_;
};

}  // namespace vrts
