#pragma once

#include <stdexcept>
#include <string>

namespace samplesize {

// Base class for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// A curve formula was evaluated outside its real domain.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& msg) : Error(msg) {}
};

// Malformed or inconsistent input (arity, bounds, configuration values).
class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& msg) : Error(msg) {}
};

// Every restart of a fit failed.
class FitError : public Error {
 public:
  explicit FitError(const std::string& msg) : Error(msg) {}
};

// Input text could not be parsed; message carries the line number.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& msg) : Error(msg) {}
};

}  // namespace samplesize
