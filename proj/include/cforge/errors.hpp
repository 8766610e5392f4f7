#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cforge {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& reason)
      : Error("config error: " + key + ": " + reason), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

class UnknownProtocol : public Error {
 public:
  using Error::Error;
};

/// An undefined (state, event) pair was looked up: a protocol design bug.
class ProtocolViolation : public Error {
 public:
  using Error::Error;
};

/// Access with insufficient permission, e.g. a write to a line in S.
class StateViolation : public Error {
 public:
  using Error::Error;
};

class DoubleFill : public Error {
 public:
  using Error::Error;
};

class MshrError : public Error {
 public:
  using Error::Error;
};

class BeatCountMismatch : public Error {
 public:
  using Error::Error;
};

class OutOfRange : public Error {
 public:
  using Error::Error;
};

class InvariantViolation : public Error {
 public:
  using Error::Error;
};

class LivenessViolation : public Error {
 public:
  using Error::Error;
};

class MalformedRequest : public Error {
 public:
  using Error::Error;
};

class ScoreboardMismatch : public Error {
 public:
  using Error::Error;
};

class SpanTooSmall : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace cforge
