#pragma once

#include <stdexcept>
#include <string>

namespace degenwave {

// Base of every error raised by the library. Each module derives its own
// kinds so callers (and the CLI exit-code mapping) can tell them apart.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace degenwave
