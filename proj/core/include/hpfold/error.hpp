#pragma once

#include <stdexcept>
#include <string>

namespace hpfold {

// Malformed input data: sequences, fold records, benchmark rows, corpora.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// A move whose target is occupied or off the board.
class IllegalMoveError : public std::runtime_error {
 public:
  explicit IllegalMoveError(const std::string& what) : std::runtime_error(what) {}
};

// Request exceeds a configured safety limit (e.g. the oracle length guard).
class GuardError : public std::runtime_error {
 public:
  explicit GuardError(const std::string& what) : std::runtime_error(what) {}
};

// Bad run configuration: missing or invalid fields.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A fold that cannot be represented on the requested tensor grid.
class EncodeError : public std::runtime_error {
 public:
  explicit EncodeError(const std::string& what) : std::runtime_error(what) {}
};

class CheckpointError : public std::runtime_error {
 public:
  enum class Kind { VersionMismatch, Corrupt, ConfigMismatch, Io };

  CheckpointError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

}  // namespace hpfold
