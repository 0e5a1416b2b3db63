#pragma once

#include <stdexcept>
#include <string>

namespace lyrav {

// Base for everything thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input data, schema violations, invalid arguments. CLI exit code 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Filesystem problems: missing files, unreadable paths. CLI exit code 2.
class IoError : public Error {
 public:
  using Error::Error;
};

// Transport failures talking to the chat-completion backend. CLI exit code 2.
class GatewayError : public Error {
 public:
  using Error::Error;
};

// A model response that cannot be interpreted (genre line, verdict digit).
class ParseError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

}  // namespace lyrav
