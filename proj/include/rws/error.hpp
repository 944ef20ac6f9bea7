#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rws {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A state or goal that is out of bounds or sits on a wall.
class MalformedStateError : public Error {
 public:
  using Error::Error;
};

// Text input (maze, dataset, config, checkpoint) that does not parse.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Structurally valid input that violates a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class GenerationError : public Error {
 public:
  using Error::Error;
};

}  // namespace rws
