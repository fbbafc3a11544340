#pragma once

#include <stdexcept>
#include <string>

namespace pixelrl {

// Config file violations; carries the offending field name in the message.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Transport-level failure talking to a remote victim. Retryable; the query
// counter must not be incremented when this is thrown.
class QueryError : public std::runtime_error {
 public:
  explicit QueryError(const std::string& msg) : std::runtime_error(msg) {}
};

// The remote victim answered, but the payload violates the wire contract.
class ProtocolError : public std::runtime_error {
 public:
  explicit ProtocolError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite value inside the policy forward/backward pass.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace pixelrl
